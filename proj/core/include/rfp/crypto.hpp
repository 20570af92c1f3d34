#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfp/binary_io.hpp"
#include "rfp/bits.hpp"
#include "rfp/rng.hpp"

namespace rfp {

enum class Security { Mock, Paillier1024, Paillier2048 };

Security parse_security(std::string_view name);
std::string to_string(Security s);

using Digest = std::array<std::uint8_t, 32>;

// BLAKE2b-256.
Digest digest(std::span<const std::uint8_t> data);
Digest digest(std::string_view text);

// Bijection on {0..l-1}. Applying it yields out[k] = in[source(k)].
class PermutationKey {
 public:
  PermutationKey() = default;
  explicit PermutationKey(std::vector<std::uint32_t> source);

  static PermutationKey identity(std::size_t l);
  static PermutationKey random(std::size_t l, Seed seed);

  std::size_t size() const noexcept { return source_.size(); }
  std::uint32_t source(std::size_t k) const noexcept { return source_[k]; }
  // Permuted position that holds original position i.
  std::uint32_t image(std::size_t i) const noexcept { return image_[i]; }

  friend bool operator==(const PermutationKey& a, const PermutationKey& b) { return a.source_ == b.source_; }

 private:
  std::vector<std::uint32_t> source_;
  std::vector<std::uint32_t> image_;
};

BitVector permute(const BitVector& bits, const PermutationKey& sigma);
BitVector inverse_permute(const BitVector& bits, const PermutationKey& sigma);
std::vector<double> permute(std::span<const double> values, const PermutationKey& sigma);

// Per-position deterministic bit encryption: a fixed secret nonce per
// position turns a probabilistic scheme into one with exactly two valid tags
// at each position.
class TagCipher {
 public:
  virtual ~TagCipher() = default;

  virtual Security security() const noexcept = 0;
  virtual std::size_t length() const noexcept = 0;
  virtual std::size_t tag_width() const noexcept = 0;

  // Tag of `bit` at position k (zero-based); precomputed, so this is a lookup.
  virtual std::span<const std::uint8_t> tag(bool bit, std::size_t k) const = 0;

  // Recovers the bit behind `tag` at position k. IntegrityError if the tag is
  // not one of the two valid values there.
  bool decrypt(std::span<const std::uint8_t> tag, std::size_t k) const;

  std::uint64_t decrypt_count() const noexcept { return decrypts_.load(std::memory_order_relaxed); }

  virtual void write_secrets(ByteWriter& w) const = 0;

 protected:
  virtual bool decrypt_impl(std::span<const std::uint8_t> tag, std::size_t k) const = 0;

 private:
  mutable std::atomic<std::uint64_t> decrypts_{0};
};

struct AuthorityPublicKey {
  Bytes envelope;  // X25519 public key used for segment and group encryption
};

// Key material of the tracing authority for one content item.
class AuthorityKeyMaterial {
 public:
  AuthorityKeyMaterial(std::string content_binding, Seed nonce_seed, Seed permutation_seed, Bytes envelope_public,
                       Bytes envelope_secret, std::shared_ptr<const TagCipher> cipher);

  const std::string& content_binding() const noexcept { return content_binding_; }
  Security security() const noexcept { return cipher_->security(); }
  std::size_t length() const noexcept { return cipher_->length(); }
  const TagCipher& cipher() const noexcept { return *cipher_; }
  AuthorityPublicKey public_key() const { return {envelope_public_}; }
  std::span<const std::uint8_t> envelope_secret() const noexcept { return envelope_secret_; }
  Seed nonce_seed() const noexcept { return nonce_seed_; }
  Seed permutation_seed() const noexcept { return permutation_seed_; }

  // Tag decryptions performed with this key material so far.
  std::uint64_t decrypt_count() const noexcept { return cipher_->decrypt_count(); }

  // Versioned secrets file. The permutation is stored as its seed.
  Bytes serialize() const;
  static std::pair<AuthorityKeyMaterial, PermutationKey> deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::string content_binding_;
  Seed nonce_seed_;
  Seed permutation_seed_;
  Bytes envelope_public_;
  Bytes envelope_secret_;
  std::shared_ptr<const TagCipher> cipher_;
};

std::pair<AuthorityKeyMaterial, PermutationKey> generate_keys(std::size_t l, Security security, Seed seed,
                                                              std::string content_binding = {});

// l fixed-width tags, tag k covering permuted bit k.
class EncryptedFingerprint {
 public:
  EncryptedFingerprint() = default;
  EncryptedFingerprint(std::size_t tag_width, Bytes data);

  std::size_t size() const noexcept { return width_ == 0 ? 0 : data_.size() / width_; }
  std::size_t tag_width() const noexcept { return width_; }
  std::span<const std::uint8_t> tag(std::size_t k) const { return {data_.data() + k * width_, width_}; }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }
  bool tag_equal(std::size_t k, const EncryptedFingerprint& other) const;

  // u32 tag count, u16 tag width, then the tags.
  Bytes serialize() const;
  static EncryptedFingerprint deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const EncryptedFingerprint&, const EncryptedFingerprint&) = default;

 private:
  std::size_t width_ = 0;
  Bytes data_;
};

std::span<const std::uint8_t> encrypt_bit(bool bit, std::size_t k, const AuthorityKeyMaterial& keys);
bool decrypt_bit(std::span<const std::uint8_t> tag, std::size_t k, const AuthorityKeyMaterial& keys);

EncryptedFingerprint encrypt_fingerprint(const BitVector& fingerprint, const PermutationKey& sigma,
                                         const AuthorityKeyMaterial& keys);
BitVector decrypt_fingerprint(const EncryptedFingerprint& enc, const PermutationKey& sigma,
                              const AuthorityKeyMaterial& keys);

// Public-key envelope to the authority (X25519 + XSalsa20-Poly1305). The
// ephemeral key comes from `rng`, so sealing is reproducible under a seed.
Bytes seal_to_authority(std::span<const std::uint8_t> plaintext, const AuthorityPublicKey& pk, Rng& rng);
Bytes open_as_authority(std::span<const std::uint8_t> ciphertext, const AuthorityKeyMaterial& keys);

// E_KpA(g_j) carried alongside fragment j.
Bytes encrypt_segment(const BitVector& segment, const AuthorityPublicKey& pk, Rng& rng);
BitVector decrypt_segment(std::span<const std::uint8_t> ciphertext, const AuthorityKeyMaterial& keys);

struct GroupItem {
  std::uint32_t index = 0;  // segment position
  Bytes enc_segment;        // E_KpA(g_j)
  Bytes signer;             // public key of the fragment's sender
  Bytes signature;          // signature over (payload, enc_segment)

  friend bool operator==(const GroupItem&, const GroupItem&) = default;
};

// A proxy's set of contiguous encrypted segments, sealed to the authority.
Bytes encrypt_segment_group(std::span<const GroupItem> items, const AuthorityPublicKey& pk, Rng& rng);
// IntegrityError when the envelope fails or the indices are not contiguous.
std::vector<GroupItem> decrypt_segment_group(std::span<const std::uint8_t> ciphertext,
                                             const AuthorityKeyMaterial& keys);

class SigningKey {
 public:
  static SigningKey from_seed(Seed seed);

  const Bytes& public_key() const noexcept { return public_; }
  Bytes sign(std::span<const std::uint8_t> message) const;

 private:
  Bytes public_;
  Bytes secret_;
};

bool verify_signature(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature);

constexpr std::size_t kSessionKeyBytes = 32;
using SessionKey = std::array<std::uint8_t, kSessionKeyBytes>;

// Authenticated symmetric encryption for buyer-to-buyer transfers.
Bytes session_encrypt(const SessionKey& key, std::uint64_t nonce, std::span<const std::uint8_t> plaintext);
std::optional<Bytes> session_decrypt(const SessionKey& key, std::uint64_t nonce,
                                     std::span<const std::uint8_t> ciphertext);

// Number of distinct plaintexts for a group of m segments with M codewords
// each (M^m), as a decimal string.
std::string group_plaintext_space(std::uint64_t codewords, std::uint64_t segments);

}  // namespace rfp
