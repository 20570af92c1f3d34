#include "rfp/attacks.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "rfp/error.hpp"

namespace rfp {
namespace {

std::vector<BitVector> column(std::initializer_list<const char*> bits) {
  std::vector<BitVector> out;
  for (const auto* b : bits) out.push_back(BitVector::from_string(b));
  return out;
}

Coalition coalition_of(std::vector<BitVector> fps) {
  std::vector<std::size_t> members(fps.size());
  for (std::size_t i = 0; i < members.size(); ++i) members[i] = 10 + i;
  return Coalition(std::move(members), std::move(fps));
}

Coalition random_coalition(Rng& rng, std::size_t q, std::size_t l) {
  std::vector<BitVector> fps;
  for (std::size_t i = 0; i < q; ++i) {
    BitVector b(l);
    for (std::size_t k = 0; k < l; ++k) b.set(k, rng.coin());
    fps.push_back(std::move(b));
  }
  return coalition_of(std::move(fps));
}

TEST(Coalition, Validation) {
  EXPECT_THROW(Coalition({}, {}), ParameterError);
  EXPECT_THROW(Coalition({1, 1}, column({"01", "10"})), ParameterError);
  EXPECT_THROW(Coalition({1, 2}, column({"01", "100"})), ParameterError);
  EXPECT_THROW(Coalition({1, 2}, column({"01"})), ParameterError);
}

TEST(Attacks, AverageExamples) {
  const auto same = coalition_of(column({"0110", "0110", "0110"}));
  EXPECT_EQ(average_attack(same, 1).colluded, BitVector::from_string("0110"));
  EXPECT_TRUE(average_attack(same, 1).ties.empty());

  const auto majority = coalition_of(column({"1", "1", "1", "0"}));
  EXPECT_EQ(average_attack(majority, 1).colluded.to_string(), "1");

  const auto tie = coalition_of(column({"001", "011"}));
  const auto r = average_attack(tie, 9);
  ASSERT_EQ(r.ties.size(), 1U);
  EXPECT_EQ(r.ties[0].position, 1U);
  EXPECT_EQ(r.colluded.get(1), r.ties[0].bit);
  EXPECT_FALSE(r.colluded.get(0));
  EXPECT_TRUE(r.colluded.get(2));
}

TEST(Attacks, TieCoinIsFair) {
  const auto c = coalition_of(column({"0000000000000000", "1111111111111111"}));
  std::size_t ones = 0;
  for (Seed s = 0; s < 2000; ++s) ones += average_attack(c, s).colluded.count();
  const double frac = static_cast<double>(ones) / (2000.0 * 16.0);
  EXPECT_NEAR(frac, 0.5, 0.02);
}

TEST(Attacks, MinMaxExamples) {
  EXPECT_EQ(min_attack(coalition_of(column({"1", "1", "1", "0"}))).to_string(), "0");
  EXPECT_EQ(max_attack(coalition_of(column({"1", "0", "0", "0"}))).to_string(), "1");
  EXPECT_EQ(min_attack(coalition_of(column({"1011", "0000"}))).to_string(), "0000");
  EXPECT_EQ(max_attack(coalition_of(column({"1011", "1111"}))).to_string(), "1111");
  EXPECT_EQ(min_attack(coalition_of(column({"1011", "1011"}))).to_string(), "1011");
  EXPECT_EQ(max_attack(coalition_of(column({"1011", "1011"}))).to_string(), "1011");
}

TEST(Attacks, SingleCopyIsRejected) {
  const auto one = Coalition({3}, column({"0101"}));
  EXPECT_THROW(average_attack(one, 1), ParameterError);
  EXPECT_THROW(min_attack(one), ParameterError);
  EXPECT_THROW(max_attack(one), ParameterError);
}

TEST(Attacks, MarkingAssumptionHoldsForAllAttacks) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = 2 + rng.below(4);
    const auto c = random_coalition(rng, q, 40);
    for (auto kind : {AttackKind::Average, AttackKind::Min, AttackKind::Max}) {
      const auto out = apply_attack(kind, c, rng.next()).colluded;
      ASSERT_TRUE(verify_marking_assumption(out, c).ok) << to_string(kind);
    }
  }
}

TEST(Attacks, MarkingViolationsAreReported) {
  const auto c = coalition_of(column({"0110", "0100"}));
  auto out = min_attack(c);
  out.set(0, true);
  const auto check = verify_marking_assumption(out, c);
  EXPECT_FALSE(check.ok);
  EXPECT_EQ(check.violations, std::vector<std::size_t>{0});

  const auto single = Coalition({1}, column({"0110"}));
  EXPECT_TRUE(verify_marking_assumption(BitVector::from_string("0110"), single).ok);
  EXPECT_FALSE(verify_marking_assumption(BitVector::from_string("0111"), single).ok);
}

TEST(Attacks, AverageLiesBetweenMinAndMax) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_coalition(rng, 2 + rng.below(5), 100);
    const auto lo = min_attack(c);
    const auto hi = max_attack(c);
    const auto mid = average_attack(c, rng.next()).colluded;
    for (std::size_t k = 0; k < 100; ++k) {
      ASSERT_LE(lo.get(k), mid.get(k));
      ASSERT_LE(mid.get(k), hi.get(k));
    }
  }
}

TEST(Attacks, MemberOrderDoesNotMatter) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_coalition(rng, 4, 80);
    auto members = c.members();
    auto fps = c.fingerprints();
    std::vector<std::size_t> order{3, 1, 0, 2};
    std::vector<std::size_t> m2;
    std::vector<BitVector> f2;
    for (auto i : order) {
      m2.push_back(members[i]);
      f2.push_back(fps[i]);
    }
    const Coalition shuffled(m2, f2);
    EXPECT_EQ(min_attack(c), min_attack(shuffled));
    EXPECT_EQ(max_attack(c), max_attack(shuffled));
    EXPECT_EQ(average_attack(c, 77).colluded, average_attack(shuffled, 77).colluded);
  }
}

TEST(Attacks, SampleMembers) {
  Rng rng(3);
  const auto m = sample_members(10, 30, 5, rng);
  ASSERT_EQ(m.size(), 5U);
  auto sorted = m;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  for (auto i : m) {
    EXPECT_GE(i, 10U);
    EXPECT_LT(i, 30U);
  }
  EXPECT_THROW(sample_members(0, 3, 4, rng), ParameterError);
}

TEST(AttackTrace, JsonRoundTripAndReplay) {
  Rng rng(21);
  const auto c = random_coalition(rng, 4, 300);
  const auto result = average_attack(c, 555);
  AttackTrace t;
  t.kind = AttackKind::Average;
  t.members = c.members();
  t.tie_seed = 555;
  t.ties = result.ties;
  t.c0 = 4;
  t.colluded = bits_digest_hex(result.colluded);

  const auto back = AttackTrace::from_json(t.to_json());
  EXPECT_EQ(back.kind, t.kind);
  EXPECT_EQ(back.members, t.members);
  EXPECT_EQ(back.tie_seed, t.tie_seed);
  EXPECT_EQ(back.ties, t.ties);
  EXPECT_EQ(back.colluded, t.colluded);
  EXPECT_EQ(replay_attack(back, c), result.colluded);

  auto tampered = back;
  ASSERT_FALSE(tampered.ties.empty());
  tampered.ties[0].bit = !tampered.ties[0].bit;
  EXPECT_THROW(replay_attack(tampered, c), IntegrityError);
}

TEST(AttackKindNames, ParseRoundTrip) {
  for (auto k : {AttackKind::Average, AttackKind::Min, AttackKind::Max}) EXPECT_EQ(parse_attack(to_string(k)), k);
  EXPECT_THROW(parse_attack("median"), ParameterError);
}

}  // namespace
}  // namespace rfp
