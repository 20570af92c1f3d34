#pragma once

#include <memory>
#include <string>
#include <utility>

#include "rfp/crypto.hpp"

namespace rfp::detail {

std::shared_ptr<const TagCipher> make_mock_cipher(std::size_t l, Bytes secret, Seed nonce_seed);

// p and q as hexadecimal strings.
std::shared_ptr<const TagCipher> make_paillier_cipher(std::size_t l, Security security, const std::string& p_hex,
                                                      const std::string& q_hex, Seed nonce_seed);
std::pair<std::string, std::string> generate_paillier_primes(unsigned modulus_bits, Seed seed);

std::shared_ptr<const TagCipher> read_cipher(Security security, std::size_t l, Seed nonce_seed, ByteReader& r);

}  // namespace rfp::detail
