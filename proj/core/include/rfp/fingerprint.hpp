#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rfp/binary_io.hpp"
#include "rfp/bits.hpp"
#include "rfp/code.hpp"
#include "rfp/rng.hpp"

namespace rfp {

// n_s segments of l0 bits each, stored contiguously.
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(std::size_t num_segments, std::size_t segment_length, BitVector bits);

  std::size_t num_segments() const noexcept { return num_segments_; }
  std::size_t segment_length() const noexcept { return segment_length_; }
  std::size_t total_bits() const noexcept { return bits_.size(); }
  const BitVector& bits() const noexcept { return bits_; }

  BitVector segment(std::size_t j) const { return bits_.slice(j * segment_length_, segment_length_); }

  // Row index of each segment in its position's codebook, or nullopt for a
  // segment that is not a codeword.
  std::vector<std::optional<std::size_t>> codebook_rows(const FullCode& code) const;
  bool within_codebook(const FullCode& code) const;

  Bytes serialize() const;
  static Fingerprint deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t num_segments_ = 0;
  std::size_t segment_length_ = 0;
  BitVector bits_;
};

struct SegmentRange {
  std::size_t begin = 0;  // first segment index
  std::size_t end = 0;    // one past the last segment index
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const SegmentRange&, const SegmentRange&) = default;
};

// L sets of m contiguous segments; the last set absorbs the remainder, so
// 0 <= n_s - L*m < m.
struct SegmentSetLayout {
  std::size_t m = 0;
  std::vector<SegmentRange> sets;

  std::size_t num_sets() const noexcept { return sets.size(); }
  std::size_t num_segments() const noexcept { return sets.empty() ? 0 : sets.back().end; }
  std::size_t set_of(std::size_t segment) const;
};

struct ParentAssignment {
  std::vector<std::uint32_t> parent_of;  // segment -> parent slot
  std::size_t parent_count = 0;

  std::size_t num_segments() const noexcept { return parent_of.size(); }
};

// Segment j is row `index` (zero-based) of codebook j.
Fingerprint seed_fingerprint(const FullCode& code, std::size_t index);

SegmentSetLayout segment_set_layout(std::size_t num_segments, std::size_t m);

// Each segment goes to a uniformly random parent; draws are repeated until
// every parent supplies at least one segment. Fewer than two parents is a
// ProtocolViolation.
ParentAssignment random_parent_assignment(std::size_t parents, std::size_t num_segments, Rng& rng);
ParentAssignment random_parent_assignment(std::size_t parents, std::size_t num_segments, Seed seed);

Fingerprint recombine(std::span<const Fingerprint> parents, const ParentAssignment& assignment);

}  // namespace rfp
