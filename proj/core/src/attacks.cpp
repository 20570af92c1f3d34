#include "rfp/attacks.hpp"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rfp/binary_io.hpp"
#include "rfp/crypto.hpp"
#include "rfp/error.hpp"

namespace rfp {
namespace {

void require_pair(const Coalition& c) {
  if (c.size() < 2) throw ParameterError("collusion attacks need at least two copies");
}

// Positions where copies disagree, as a packed mask.
BitVector detectable(const Coalition& c) {
  const auto& fps = c.fingerprints();
  BitVector all = fps.front();
  BitVector any = fps.front();
  for (std::size_t i = 1; i < fps.size(); ++i) {
    all &= fps[i];
    any |= fps[i];
  }
  return any ^ all;
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Average:
      return "average";
    case AttackKind::Min:
      return "min";
    case AttackKind::Max:
      return "max";
  }
  return "unknown";
}

AttackKind parse_attack(std::string_view name) {
  if (name == "average") return AttackKind::Average;
  if (name == "min") return AttackKind::Min;
  if (name == "max") return AttackKind::Max;
  throw ParameterError("unknown attack '" + std::string(name) + "'");
}

Coalition::Coalition(std::vector<std::size_t> members, std::vector<BitVector> fingerprints)
    : members_(std::move(members)), fingerprints_(std::move(fingerprints)) {
  if (members_.empty()) throw ParameterError("empty coalition");
  if (members_.size() != fingerprints_.size()) throw ParameterError("one fingerprint per member required");
  std::unordered_set<std::size_t> seen(members_.begin(), members_.end());
  if (seen.size() != members_.size()) throw ParameterError("coalition members must be distinct");
  for (const auto& f : fingerprints_) {
    if (f.size() != fingerprints_.front().size()) throw ParameterError("coalition fingerprints differ in length");
  }
}

AttackResult average_attack(const Coalition& coalition, Seed tie_seed) {
  require_pair(coalition);
  const auto& fps = coalition.fingerprints();
  const std::size_t q = fps.size();
  const std::size_t l = coalition.length();
  Rng rng(tie_seed);
  AttackResult out{BitVector(l), {}};
  const auto mask = detectable(coalition);
  for (std::size_t k = 0; k < l; ++k) {
    if (!mask.get(k)) {
      out.colluded.set(k, fps.front().get(k));
      continue;
    }
    std::size_t ones = 0;
    for (const auto& f : fps) ones += f.get(k);
    if (2 * ones == q) {
      const bool bit = rng.coin();
      out.colluded.set(k, bit);
      out.ties.push_back({static_cast<std::uint32_t>(k), bit});
    } else {
      out.colluded.set(k, 2 * ones > q);
    }
  }
  return out;
}

BitVector min_attack(const Coalition& coalition) {
  require_pair(coalition);
  BitVector out = coalition.fingerprints().front();
  for (const auto& f : coalition.fingerprints()) out &= f;
  return out;
}

BitVector max_attack(const Coalition& coalition) {
  require_pair(coalition);
  BitVector out = coalition.fingerprints().front();
  for (const auto& f : coalition.fingerprints()) out |= f;
  return out;
}

AttackResult apply_attack(AttackKind kind, const Coalition& coalition, Seed tie_seed) {
  switch (kind) {
    case AttackKind::Average:
      return average_attack(coalition, tie_seed);
    case AttackKind::Min:
      return {min_attack(coalition), {}};
    case AttackKind::Max:
      return {max_attack(coalition), {}};
  }
  throw ParameterError("unknown attack kind");
}

MarkingCheck verify_marking_assumption(const BitVector& colluded, const Coalition& coalition) {
  if (colluded.size() != coalition.length()) throw ParameterError("colluded copy length differs from coalition");
  const auto mask = detectable(coalition);
  // Altered undetectable positions: not detectable and differing from any copy.
  const auto diff = colluded ^ coalition.fingerprints().front();
  const auto bad = diff & ~mask;
  MarkingCheck out;
  const auto words = bad.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (auto x = words[w]; x != 0; x &= x - 1) {
      out.violations.push_back(w * 64 + static_cast<std::size_t>(__builtin_ctzll(x)));
    }
  }
  out.ok = out.violations.empty();
  return out;
}

std::vector<std::size_t> sample_members(std::size_t first, std::size_t last, std::size_t count, Rng& rng) {
  if (last < first || last - first < count) {
    throw ParameterError("population of " + std::to_string(last < first ? 0 : last - first) +
                         " cannot supply a coalition of " + std::to_string(count));
  }
  std::vector<std::size_t> out;
  while (out.size() < count) {
    const auto cand = first + static_cast<std::size_t>(rng.below(last - first));
    if (std::find(out.begin(), out.end(), cand) == out.end()) out.push_back(cand);
  }
  return out;
}

std::string bits_digest_hex(const BitVector& bits) {
  ByteWriter w;
  w.bits(bits);
  return to_hex(digest(w.data()));
}

std::string AttackTrace::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["attack"] = to_string(kind);
  j["members"] = members;
  j["tie_seed"] = tie_seed;
  j["c0"] = c0;
  j["out_of_warranty"] = out_of_warranty;
  auto ties_json = nlohmann::ordered_json::array();
  for (const auto& t : ties) ties_json.push_back({t.position, t.bit ? 1 : 0});
  j["ties"] = std::move(ties_json);
  j["colluded_digest"] = colluded;
  return j.dump(1) + "\n";
}

AttackTrace AttackTrace::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw IntegrityError("unsupported attack trace version");
    AttackTrace t;
    t.kind = parse_attack(j.at("attack").get<std::string>());
    t.members = j.at("members").get<std::vector<std::size_t>>();
    t.tie_seed = j.at("tie_seed").get<Seed>();
    t.c0 = j.at("c0").get<std::uint32_t>();
    t.out_of_warranty = j.at("out_of_warranty").get<bool>();
    for (const auto& e : j.at("ties")) t.ties.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<int>() != 0});
    t.colluded = j.at("colluded_digest").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed attack trace: ") + e.what());
  }
}

BitVector replay_attack(const AttackTrace& trace, const Coalition& coalition) {
  BitVector out;
  if (trace.kind == AttackKind::Average) {
    require_pair(coalition);
    const auto& fps = coalition.fingerprints();
    const std::size_t q = fps.size();
    out = BitVector(coalition.length());
    auto tie = trace.ties.begin();
    for (std::size_t k = 0; k < coalition.length(); ++k) {
      std::size_t ones = 0;
      for (const auto& f : fps) ones += f.get(k);
      if (2 * ones == q) {
        if (tie == trace.ties.end() || tie->position != k) throw IntegrityError("attack trace is missing a tie");
        out.set(k, (tie++)->bit);
      } else {
        out.set(k, 2 * ones > q);
      }
    }
    if (tie != trace.ties.end()) throw IntegrityError("attack trace has extra tie decisions");
  } else {
    out = apply_attack(trace.kind, coalition, trace.tie_seed).colluded;
  }
  if (!trace.colluded.empty() && bits_digest_hex(out) != trace.colluded) {
    throw IntegrityError("replayed copy does not match the recorded digest");
  }
  return out;
}

}  // namespace rfp
