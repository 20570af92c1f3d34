#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "rfp/binary_io.hpp"
#include "rfp/bits.hpp"
#include "rfp/rng.hpp"

namespace rfp {

// Tardos arcsine density 1/(pi*sqrt(x(1-x))) restricted to [cutoff, 1-cutoff].
struct ClippedArcsine {
  double cutoff = 0.0;
};

// Finite bias distribution: (support point, probability) pairs.
struct DiscreteBias {
  std::vector<std::pair<double, double>> support;
};

using BiasSpec = std::variant<ClippedArcsine, DiscreteBias>;

struct CodeParameters {
  std::uint32_t c0 = 4;
  double epsilon = 1e-3;
  std::uint32_t num_codewords = 10;    // M
  std::uint32_t codeword_length = 788;  // l0
  BiasSpec bias = ClippedArcsine{1.0 / 1200.0};

  // Default cutoff 1/(300*c0) for the arcsine distribution.
  static double default_cutoff(std::uint32_t c0) { return 1.0 / (300.0 * c0); }

  // Throws ParameterError unless c0 >= 2, M >= 1, l0 >= 1 and 0 < epsilon < 1.
  // M > c0 is a tracing requirement and is checked separately.
  void validate() const;
  bool supports_tracing() const noexcept { return num_codewords > c0; }
};

// Discrete bias table for coalitions up to `c0`, read from a text file with
// lines "<c_max> <point> <probability>". The smallest c_max >= c0 is used.
DiscreteBias load_discrete_bias(const std::filesystem::path& path, std::uint32_t c0);

class BiasVector {
 public:
  BiasVector() = default;
  explicit BiasVector(std::vector<double> p);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t k) const noexcept { return p_[k]; }
  std::span<const double> values() const noexcept { return p_; }

  friend bool operator==(const BiasVector&, const BiasVector&) = default;

 private:
  std::vector<double> p_;
};

struct SegmentCodebook {
  BiasVector bias;
  std::vector<BitVector> codewords;

  std::size_t size() const noexcept { return codewords.size(); }
  std::size_t length() const noexcept { return bias.size(); }

  friend bool operator==(const SegmentCodebook&, const SegmentCodebook&) = default;
};

// Codebooks for every segment position. With a shared codebook a single
// SegmentCodebook serves all n_s positions.
class FullCode {
 public:
  FullCode(CodeParameters params, std::size_t num_segments, std::vector<SegmentCodebook> codebooks);

  const CodeParameters& params() const noexcept { return params_; }
  std::size_t num_segments() const noexcept { return num_segments_; }
  std::size_t segment_length() const noexcept { return params_.codeword_length; }
  std::size_t total_bits() const noexcept { return num_segments_ * params_.codeword_length; }
  bool shared() const noexcept { return codebooks_.size() == 1; }

  const SegmentCodebook& codebook(std::size_t segment) const { return codebooks_[shared() ? 0 : segment]; }
  const std::vector<SegmentCodebook>& codebooks() const noexcept { return codebooks_; }
  std::span<const double> concatenated_bias() const noexcept { return bias_; }

  Bytes serialize() const;
  static FullCode deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const FullCode& a, const FullCode& b) {
    return a.num_segments_ == b.num_segments_ && a.codebooks_ == b.codebooks_ && a.bias_ == b.bias_;
  }

 private:
  CodeParameters params_;
  std::size_t num_segments_;
  std::vector<SegmentCodebook> codebooks_;
  std::vector<double> bias_;
};

BiasVector sample_bias_vector(const CodeParameters& params, Seed seed);

SegmentCodebook generate_codebook(const CodeParameters& params, const BiasVector& bias, Seed seed);

// Samples bias and codewords for n_s positions; one shared codebook unless
// per_position is set.
FullCode generate_full_code(const CodeParameters& params, std::size_t num_segments, Seed seed,
                            bool per_position = false);

// Accusation weight sqrt((1-x)/x); DomainError outside (0,1).
double phi(double x);

// Mean per-bit accusation score of `tested` against `traced`:
//   equal bits 1/1 -> +phi(p), 0/0 -> +phi(1-p)
//   traced 1, tested 0 -> -phi(1-p); traced 0, tested 1 -> -phi(p)
// Summed in index order.
double cleartext_score(const BitVector& traced, const BitVector& tested, std::span<const double> p);

}  // namespace rfp
