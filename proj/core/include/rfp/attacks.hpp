#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfp/bits.hpp"
#include "rfp/rng.hpp"

namespace rfp {

enum class AttackKind : std::uint8_t { Average, Min, Max };

std::string to_string(AttackKind kind);
AttackKind parse_attack(std::string_view name);

// Q copies pooled by colluders. Members are distinct buyer indices; all
// fingerprints share one length.
class Coalition {
 public:
  Coalition(std::vector<std::size_t> members, std::vector<BitVector> fingerprints);

  std::size_t size() const noexcept { return members_.size(); }
  std::size_t length() const noexcept { return fingerprints_.front().size(); }
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  const std::vector<BitVector>& fingerprints() const noexcept { return fingerprints_; }

 private:
  std::vector<std::size_t> members_;
  std::vector<BitVector> fingerprints_;
};

struct TieDecision {
  std::uint32_t position = 0;
  bool bit = false;
  friend bool operator==(const TieDecision&, const TieDecision&) = default;
};

struct AttackResult {
  BitVector colluded;
  std::vector<TieDecision> ties;  // average attack only, ascending positions
};

// Majority per bit; exact ties take a fair coin drawn from `tie_seed` in
// position order, so the output depends only on the multiset of copies.
AttackResult average_attack(const Coalition& coalition, Seed tie_seed);
BitVector min_attack(const Coalition& coalition);
BitVector max_attack(const Coalition& coalition);
AttackResult apply_attack(AttackKind kind, const Coalition& coalition, Seed tie_seed);

struct MarkingCheck {
  bool ok = true;
  std::vector<std::size_t> violations;  // undetectable positions that were altered
};

MarkingCheck verify_marking_assumption(const BitVector& colluded, const Coalition& coalition);

// `count` distinct indices drawn uniformly from [first, last).
std::vector<std::size_t> sample_members(std::size_t first, std::size_t last, std::size_t count, Rng& rng);

// Everything needed to replay an attack byte-exactly from the population.
struct AttackTrace {
  AttackKind kind = AttackKind::Average;
  std::vector<std::size_t> members;
  Seed tie_seed = 0;
  std::vector<TieDecision> ties;
  std::uint32_t c0 = 0;
  bool out_of_warranty = false;  // coalition larger than c0
  std::string colluded;          // hex digest of the output bits

  std::string to_json() const;
  static AttackTrace from_json(std::string_view text);
};

std::string bits_digest_hex(const BitVector& bits);

// Recomputes the colluded copy from the trace's recorded tie decisions and
// checks it against the recorded digest (IntegrityError on mismatch).
BitVector replay_attack(const AttackTrace& trace, const Coalition& coalition);

}  // namespace rfp
