#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rfp {

using Seed = std::uint64_t;

// Deterministic random source. The engine is fully specified by the standard;
// the helpers below avoid std::*_distribution so that streams are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound must be non-zero.
  std::uint64_t below(std::uint64_t bound);

  // Uniform in [lo, hi], inclusive.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  bool coin() { return (next() >> 63) != 0; }

  void fill(std::uint8_t* out, std::size_t len);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent child seed for a named purpose (and optional index)
// from a master seed, so that sub-streams do not depend on call order.
Seed derive_seed(Seed master, std::string_view purpose, std::uint64_t index = 0);

}  // namespace rfp
