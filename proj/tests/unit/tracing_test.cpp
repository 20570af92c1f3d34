#include "rfp/tracing.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rfp/attacks.hpp"
#include "rfp/error.hpp"

namespace rfp {
namespace {

BitVector random_bits(Rng& rng, std::size_t l) {
  BitVector b(l);
  for (std::size_t k = 0; k < l; ++k) b.set(k, rng.coin());
  return b;
}

std::vector<double> random_bias(Rng& rng, std::size_t l) {
  std::vector<double> p(l);
  for (auto& x : p) x = 0.001 + 0.998 * rng.uniform();
  return p;
}

// Per-bit table written out independently of the library.
double reference_score(const BitVector& traced, const BitVector& tested, const std::vector<double>& p) {
  long double sum = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double up = std::sqrt((1 - p[k]) / p[k]);
    const double down = std::sqrt(p[k] / (1 - p[k]));
    const bool a = traced.get(k);
    const bool b = tested.get(k);
    if (a && b) sum += up;
    else if (!a && !b) sum += down;
    else if (a) sum -= down;
    else sum -= up;
  }
  return static_cast<double>(sum / p.size());
}

TEST(TracingVectors, Examples) {
  auto [keys, sigma] = generate_keys(64, Security::Mock, 1);
  Rng rng(2);
  const auto f = random_bits(rng, 64);
  const std::vector<double> half(64, 0.5);
  const auto enc = encrypt_fingerprint(f, sigma, keys);

  const auto same = mo_tracing_vectors(enc, enc, half);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(same.d0[k], 1);
    EXPECT_EQ(same.d1[k], 2);
    EXPECT_DOUBLE_EQ(same.omega1[k], 1.0);
    EXPECT_DOUBLE_EQ(same.omega2[k], 1.0);
  }
  EXPECT_DOUBLE_EQ(ta_score(same, f, sigma), 1.0);

  const auto flipped = encrypt_fingerprint(~f, sigma, keys);
  const auto diff = mo_tracing_vectors(enc, flipped, half);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(diff.d0[k], -2);
    EXPECT_EQ(diff.d1[k], -1);
  }
  EXPECT_DOUBLE_EQ(ta_score(diff, f, sigma), -1.0);
}

TEST(TracingVectors, LengthMismatch) {
  auto [keys, sigma] = generate_keys(32, Security::Mock, 1);
  auto [keys2, sigma2] = generate_keys(40, Security::Mock, 1);
  const auto a = encrypt_fingerprint(BitVector(32), sigma, keys);
  const auto b = encrypt_fingerprint(BitVector(40), sigma2, keys2);
  EXPECT_THROW(mo_tracing_vectors(a, b, std::vector<double>(32, 0.5)), ParameterError);
  EXPECT_THROW(mo_tracing_vectors(a, a, std::vector<double>(31, 0.5)), ParameterError);
}

TEST(TracingVectors, OmegaMatchesPhi) {
  Rng rng(5);
  const auto p = random_bias(rng, 100);
  const auto w = omega_vectors(p);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_DOUBLE_EQ(w.omega1[k], std::sqrt(p[k] / (1 - p[k])));
    EXPECT_DOUBLE_EQ(w.omega2[k], std::sqrt((1 - p[k]) / p[k]));
  }
}

class OracleEquivalence : public ::testing::TestWithParam<Security> {};

TEST_P(OracleEquivalence, SplitScoreEqualsCleartextScore) {
  const std::size_t l = GetParam() == Security::Mock ? 788 : 96;
  const int trials = GetParam() == Security::Mock ? 200 : 10;
  auto [keys, sigma] = generate_keys(l, GetParam(), 9);
  Rng rng(10);
  for (int t = 0; t < trials; ++t) {
    const auto traced = random_bits(rng, l);
    const auto tested = random_bits(rng, l);
    const auto p = random_bias(rng, l);
    const auto v = mo_tracing_vectors(encrypt_fingerprint(traced, sigma, keys), encrypt_fingerprint(tested, sigma, keys),
                                      p);
    const double split = ta_score(v, traced, sigma);
    EXPECT_EQ(split, cleartext_score(permute(traced, sigma), permute(tested, sigma), permute(p, sigma)));
    EXPECT_NEAR(split, reference_score(traced, tested, p), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Backends, OracleEquivalence, ::testing::Values(Security::Mock, Security::Paillier1024),
                         [](const auto& info) { return info.param == Security::Mock ? "Mock" : "Paillier1024"; });

class TracingPopulation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    CodeParameters params;
    params.c0 = 2;
    params.num_codewords = 6;
    params.codeword_length = 120;
    params.bias = ClippedArcsine{CodeParameters::default_cutoff(2)};
    auto code = generate_full_code(params, 10, 31);
    auto [keys, sigma] = generate_keys(code.total_bits(), Security::Mock, 32, "film");
    SimConfig cfg;
    cfg.record_observations = false;
    sim_ = new Simulation(cfg, std::move(code), std::move(keys), std::move(sigma));
    sim_->bootstrap("film", 6);
    sim_->grow_population(4);
  }
  static void TearDownTestSuite() {
    delete sim_;
    sim_ = nullptr;
  }

  static BitVector colluded_copy(std::vector<std::size_t> members, AttackKind kind) {
    std::vector<BitVector> fps;
    for (auto m : members) fps.push_back(sim_->buyer(m).fingerprint.bits());
    return apply_attack(kind, Coalition(members, fps), 4).colluded;
  }

  static std::size_t register_of(std::size_t buyer) { return buyer - sim_->seed_count(); }

  static Simulation* sim_;
};

Simulation* TracingPopulation::sim_ = nullptr;

TEST_F(TracingPopulation, ExactTracing) {
  const auto& b = sim_->buyer(20);
  const auto before = sim_->keys().decrypt_count();
  const auto p = trace_exact(b.fingerprint.bits(), sim_->keys(), sim_->sigma(), sim_->database());
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(*p, *b.pseudonym);
  EXPECT_FALSE(trace_exact(sim_->buyer(0).fingerprint.bits(), sim_->keys(), sim_->sigma(), sim_->database()));
  const auto colluded = colluded_copy({10, 20, 30, 40}, AttackKind::Average);
  EXPECT_FALSE(trace_exact(colluded, sim_->keys(), sim_->sigma(), sim_->database()));
  EXPECT_EQ(sim_->keys().decrypt_count(), before);
}

TEST_F(TracingPopulation, FastPathMatchesLiteralPath) {
  const auto& db = sim_->database();
  const auto p = sim_->code().concatenated_bias();
  for (auto kind : {AttackKind::Average, AttackKind::Min, AttackKind::Max}) {
    const auto colluded = colluded_copy({7, 19, 33, 41}, kind);
    TraceOptions literal;
    literal.literal = true;
    const auto fast = trace_colluders(colluded, db, sim_->keys(), sim_->sigma(), p, 12.0);
    const auto slow = trace_colluders(colluded, db, sim_->keys(), sim_->sigma(), p, 12.0, literal);
    ASSERT_EQ(fast.scores.size(), db.size());
    ASSERT_EQ(slow.scores.size(), db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
      EXPECT_NEAR(fast.scores[i].score, slow.scores[i].score, 1e-9);
      const auto expect = kScoreScale * reference_score(colluded, sim_->buyer(i + sim_->seed_count()).fingerprint.bits(),
                                                        {p.begin(), p.end()});
      EXPECT_NEAR(fast.scores[i].score, expect, 1e-9);
    }
  }
}

TEST_F(TracingPopulation, ReportInvariants) {
  const auto colluded = colluded_copy({8, 16, 24, 32}, AttackKind::Average);
  const auto before = sim_->keys().decrypt_count();
  const auto r = trace_colluders(colluded, sim_->database(), sim_->keys(), sim_->sigma(),
                                 sim_->code().concatenated_bias(), 12.0);
  EXPECT_EQ(sim_->keys().decrypt_count(), before);
  std::vector<std::size_t> accused;
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    EXPECT_EQ(r.scores[i].register_index, i);
    EXPECT_EQ(r.scores[i].pseudonym, sim_->database().at(i).pseudonym);
    EXPECT_EQ(r.scores[i].accused, r.scores[i].score > 12.0);
    if (r.scores[i].accused) {
      accused.push_back(i);
      EXPECT_LE(*r.accused_min, r.scores[i].score);
      EXPECT_GE(*r.accused_max, r.scores[i].score);
    } else {
      EXPECT_LE(*r.innocent_min, r.scores[i].score);
      EXPECT_GE(*r.innocent_max, r.scores[i].score);
    }
  }
  EXPECT_EQ(r.accused, accused);
}

TEST_F(TracingPopulation, SelfScoreDominates) {
  for (std::size_t buyer : {6, 15, 40}) {
    const auto r = trace_colluders(sim_->buyer(buyer).fingerprint.bits(), sim_->database(), sim_->keys(), sim_->sigma(),
                                   sim_->code().concatenated_bias(), 12.0);
    const auto own = register_of(buyer);
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      if (i != own) EXPECT_LT(r.scores[i].score, r.scores[own].score);
    }
    EXPECT_TRUE(r.scores[own].accused);
  }
}

TEST_F(TracingPopulation, ThresholdAboveEveryScoreFails) {
  const auto colluded = colluded_copy({8, 16, 24, 32}, AttackKind::Max);
  const auto r = trace_colluders(colluded, sim_->database(), sim_->keys(), sim_->sigma(),
                                 sim_->code().concatenated_bias(), 1e6);
  EXPECT_TRUE(r.failed());
  EXPECT_FALSE(r.accused_min.has_value());
  EXPECT_THROW(trace_colluders(colluded, sim_->database(), sim_->keys(), sim_->sigma(),
                               sim_->code().concatenated_bias(), 0.0),
               ParameterError);
}

TEST_F(TracingPopulation, ScoresAreInvariantUnderTheKeyPermutation) {
  // Same population, independently drawn permutation and tags.
  auto [keys, sigma] = generate_keys(sim_->code().total_bits(), Security::Mock, 77, "film");
  TransactionDatabase db;
  for (std::size_t i = sim_->seed_count(); i < sim_->buyers().size(); ++i) {
    TransactionRegister reg;
    reg.pseudonym = *sim_->buyer(i).pseudonym;
    reg.enc_fp = encrypt_fingerprint(sim_->buyer(i).fingerprint.bits(), sigma, keys);
    db.insert(reg);
  }
  const auto colluded = colluded_copy({9, 18, 27, 36}, AttackKind::Average);
  const auto p = sim_->code().concatenated_bias();
  const auto a = trace_colluders(colluded, sim_->database(), sim_->keys(), sim_->sigma(), p, 12.0);
  const auto b = trace_colluders(colluded, db, keys, sigma, p, 12.0);
  for (std::size_t i = 0; i < db.size(); ++i) EXPECT_NEAR(a.scores[i].score, b.scores[i].score, 1e-9);
  EXPECT_EQ(a.accused, b.accused);
}

TEST_F(TracingPopulation, TraceResolvesIdentities) {
  const auto& b = sim_->buyer(25);
  const auto exact = trace(b.fingerprint.bits(), *sim_, 12.0);
  ASSERT_TRUE(exact.exact.has_value());
  EXPECT_FALSE(exact.report.has_value());
  ASSERT_EQ(exact.identities.size(), 1U);
  EXPECT_EQ(exact.identities[0].real_identity, "buyer-25");

  const auto colluded = colluded_copy({10, 20, 30, 40}, AttackKind::Average);
  const auto out = trace(colluded, *sim_, 12.0);
  EXPECT_FALSE(out.exact.has_value());
  ASSERT_TRUE(out.report.has_value());
  EXPECT_EQ(out.identities.size(), out.report->accused.size());
  for (const auto& id : out.identities) EXPECT_TRUE(id.verify(sim_->content_id()));
}

TEST(Calibration, Examples) {
  EXPECT_DOUBLE_EQ(calibrate_threshold(16.0), 12.0);
  EXPECT_DOUBLE_EQ(calibrate_threshold(1.0), 0.75);
  EXPECT_THROW(calibrate_threshold(0.0), ParameterError);
  EXPECT_THROW(calibrate_threshold(-3.0), ParameterError);
}

TEST(ScoreCsv, Format) {
  ScoreReport r;
  BuyerScore s;
  s.register_index = 3;
  s.pseudonym.bytes[0] = 0x01;
  s.score = 12.5;
  s.accused = true;
  r.scores.push_back(s);
  const auto csv = score_csv(r);
  EXPECT_EQ(csv, "buyer_index,pseudonym,score,accused\n3," + s.pseudonym.hex() + ",12.500000,1\n");
  EXPECT_EQ(format_score(-0.25), "-0.250000");
}

}  // namespace
}  // namespace rfp
