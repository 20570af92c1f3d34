#include "rfp/rng.hpp"

#include "sodium_init.hpp"

#include <array>
#include <cstring>

namespace rfp {

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

void Rng::fill(std::uint8_t* out, std::size_t len) {
  std::size_t i = 0;
  while (i < len) {
    std::uint64_t w = next();
    for (int b = 0; b < 8 && i < len; ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(w >> (8 * b));
    }
  }
}

Seed derive_seed(Seed master, std::string_view purpose, std::uint64_t index) {
  detail::ensure_sodium();
  std::array<std::uint8_t, 16> input{};
  for (int i = 0; i < 8; ++i) {
    input[i] = static_cast<std::uint8_t>(master >> (8 * i));
    input[8 + i] = static_cast<std::uint8_t>(index >> (8 * i));
  }
  std::array<std::uint8_t, 8> out{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, out.size());
  crypto_generichash_update(&st, input.data(), input.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(purpose.data()), purpose.size());
  crypto_generichash_final(&st, out.data(), out.size());
  Seed s = 0;
  for (int i = 0; i < 8; ++i) s |= static_cast<Seed>(out[i]) << (8 * i);
  return s;
}

}  // namespace rfp
