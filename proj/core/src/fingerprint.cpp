#include "rfp/fingerprint.hpp"

#include <algorithm>

#include "rfp/error.hpp"

namespace rfp {
namespace {
constexpr std::string_view kFingerprintMagic = "RFPF";
constexpr std::uint16_t kFingerprintVersion = 1;
}  // namespace

Fingerprint::Fingerprint(std::size_t num_segments, std::size_t segment_length, BitVector bits)
    : num_segments_(num_segments), segment_length_(segment_length), bits_(std::move(bits)) {
  if (num_segments_ == 0 || segment_length_ == 0) throw ParameterError("fingerprint needs n_s >= 1 and l0 >= 1");
  if (bits_.size() != num_segments_ * segment_length_) {
    throw ParameterError("fingerprint bit length differs from n_s * l0");
  }
}

std::vector<std::optional<std::size_t>> Fingerprint::codebook_rows(const FullCode& code) const {
  if (code.num_segments() != num_segments_ || code.segment_length() != segment_length_) {
    throw ParameterError("fingerprint shape differs from code");
  }
  std::vector<std::optional<std::size_t>> rows(num_segments_);
  for (std::size_t j = 0; j < num_segments_; ++j) {
    const auto seg = segment(j);
    const auto& words = code.codebook(j).codewords;
    auto it = std::find(words.begin(), words.end(), seg);
    if (it != words.end()) rows[j] = static_cast<std::size_t>(it - words.begin());
  }
  return rows;
}

bool Fingerprint::within_codebook(const FullCode& code) const {
  const auto rows = codebook_rows(code);
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); });
}

Bytes Fingerprint::serialize() const {
  ByteWriter w;
  w.magic(kFingerprintMagic);
  w.u16(kFingerprintVersion);
  w.u32(static_cast<std::uint32_t>(num_segments_));
  w.u32(static_cast<std::uint32_t>(segment_length_));
  for (auto word : bits_.words()) w.u64(word);
  return w.take();
}

Fingerprint Fingerprint::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kFingerprintMagic);
  if (r.u16() != kFingerprintVersion) throw IntegrityError("unsupported fingerprint version");
  const std::size_t ns = r.u32();
  const std::size_t l0 = r.u32();
  const std::size_t l = ns * l0;
  if ((l + 63) / 64 * 8 != r.remaining()) throw IntegrityError("fingerprint payload size mismatch");
  std::vector<std::uint64_t> words((l + 63) / 64);
  for (auto& word : words) word = r.u64();
  return Fingerprint(ns, l0, BitVector::from_words(l, std::move(words)));
}

std::size_t SegmentSetLayout::set_of(std::size_t segment) const {
  if (segment >= num_segments()) throw ParameterError("segment index outside layout");
  return std::min(segment / m, sets.size() - 1);
}

Fingerprint seed_fingerprint(const FullCode& code, std::size_t index) {
  if (index >= code.params().num_codewords) {
    throw ParameterError("seed index " + std::to_string(index) + " out of range for M=" +
                         std::to_string(code.params().num_codewords));
  }
  BitVector bits(code.total_bits());
  for (std::size_t j = 0; j < code.num_segments(); ++j) {
    bits.assign(j * code.segment_length(), code.codebook(j).codewords[index]);
  }
  return Fingerprint(code.num_segments(), code.segment_length(), std::move(bits));
}

SegmentSetLayout segment_set_layout(std::size_t num_segments, std::size_t m) {
  if (m < 1) throw ParameterError("segments per set (m) must be at least 1");
  if (num_segments < m) throw ParameterError("n_s must be at least m");
  SegmentSetLayout layout;
  layout.m = m;
  const std::size_t sets = num_segments / m;
  for (std::size_t s = 0; s < sets; ++s) {
    layout.sets.push_back({s * m, s + 1 == sets ? num_segments : (s + 1) * m});
  }
  return layout;
}

ParentAssignment random_parent_assignment(std::size_t parents, std::size_t num_segments, Rng& rng) {
  if (parents < 2) throw ProtocolViolation("a recombined copy needs at least two parents");
  if (parents > num_segments) throw ParameterError("more parents than segments");
  ParentAssignment a;
  a.parent_count = parents;
  a.parent_of.resize(num_segments);
  if (parents == num_segments) {
    // Conditioned on every parent contributing, the law is a uniform permutation.
    for (std::size_t j = 0; j < num_segments; ++j) a.parent_of[j] = static_cast<std::uint32_t>(j);
    for (std::size_t j = num_segments; j > 1; --j) std::swap(a.parent_of[j - 1], a.parent_of[rng.below(j)]);
    return a;
  }
  std::vector<bool> used(parents);
  for (;;) {
    std::fill(used.begin(), used.end(), false);
    for (auto& p : a.parent_of) {
      p = static_cast<std::uint32_t>(rng.below(parents));
      used[p] = true;
    }
    if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) return a;
  }
}

ParentAssignment random_parent_assignment(std::size_t parents, std::size_t num_segments, Seed seed) {
  Rng rng(seed);
  return random_parent_assignment(parents, num_segments, rng);
}

Fingerprint recombine(std::span<const Fingerprint> parents, const ParentAssignment& assignment) {
  if (parents.size() != assignment.parent_count) throw ParameterError("parent count differs from assignment");
  if (parents.empty()) throw ParameterError("no parents supplied");
  const auto ns = parents.front().num_segments();
  const auto l0 = parents.front().segment_length();
  for (const auto& p : parents) {
    if (p.num_segments() != ns || p.segment_length() != l0) throw ParameterError("parents differ in shape");
  }
  if (assignment.num_segments() != ns) throw ParameterError("assignment does not cover every segment");
  BitVector bits(ns * l0);
  for (std::size_t j = 0; j < ns; ++j) {
    const auto src = assignment.parent_of[j];
    if (src >= parents.size()) throw ParameterError("assignment refers to a missing parent");
    bits.assign(j * l0, parents[src].segment(j));
  }
  return Fingerprint(ns, l0, std::move(bits));
}

}  // namespace rfp
