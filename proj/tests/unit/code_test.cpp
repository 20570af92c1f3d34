#include "rfp/code.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "rfp/error.hpp"

namespace rfp {
namespace {

// Independent per-bit score oracle written from the truth table.
double oracle_score(const BitVector& y, const BitVector& x, const std::vector<double>& p) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double up = std::sqrt((1.0 - p[k]) / p[k]);
    const double down = std::sqrt(p[k] / (1.0 - p[k]));
    if (y.get(k) && x.get(k)) {
      sum += up;
    } else if (!y.get(k) && !x.get(k)) {
      sum += down;
    } else if (y.get(k)) {
      sum -= down;
    } else {
      sum -= up;
    }
  }
  return sum / static_cast<double>(p.size());
}

BitVector random_bits(std::size_t n, std::mt19937_64& gen) {
  BitVector b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, (gen() & 1) != 0);
  return b;
}

TEST(Phi, KnownValuesAndDomain) {
  EXPECT_DOUBLE_EQ(phi(0.5), 1.0);
  EXPECT_DOUBLE_EQ(phi(0.2), 2.0);
  EXPECT_DOUBLE_EQ(phi(0.8), 0.5);
  EXPECT_THROW(phi(0.0), DomainError);
  EXPECT_THROW(phi(1.0), DomainError);
  EXPECT_THROW(phi(-0.1), DomainError);
}

TEST(CleartextScore, UnbiasedIdentityAndComplement) {
  std::mt19937_64 gen(1);
  const auto f = random_bits(788, gen);
  const std::vector<double> half(788, 0.5);
  EXPECT_DOUBLE_EQ(cleartext_score(f, f, half), 1.0);
  EXPECT_DOUBLE_EQ(cleartext_score(f, ~f, half), -1.0);
}

TEST(CleartextScore, MatchesOracleOnRandomTriples) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 200; ++trial) {
    const auto y = random_bits(788, gen);
    const auto x = random_bits(788, gen);
    std::vector<double> p(788);
    for (auto& v : p) v = u(gen);
    const double oracle = oracle_score(y, x, p);
    EXPECT_NEAR(cleartext_score(y, x, p), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(CleartextScore, LengthMismatchIsAnError) {
  const BitVector a(4), b(5);
  const std::vector<double> p(4, 0.5);
  EXPECT_THROW(cleartext_score(a, b, p), ParameterError);
}

TEST(CodeParameters, Validation) {
  CodeParameters ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_TRUE(ok.supports_tracing());
  auto bad = ok;
  bad.c0 = 1;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.num_codewords = 0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.epsilon = 1.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.codeword_length = 0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.bias = ClippedArcsine{0.5};
  EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(CodeParameters, DefaultCutoff) {
  EXPECT_DOUBLE_EQ(CodeParameters::default_cutoff(4), 1.0 / 1200.0);
  EXPECT_DOUBLE_EQ(std::get<ClippedArcsine>(CodeParameters{}.bias).cutoff, 1.0 / 1200.0);
}

TEST(BiasSampling, ArcsineStaysInsideCutoffAndFitsTheCdf) {
  CodeParameters params;
  params.codeword_length = 20000;
  const double t = 1.0 / 1200.0;
  const auto p = sample_bias_vector(params, 17);
  std::vector<double> v(p.values().begin(), p.values().end());
  std::sort(v.begin(), v.end());
  EXPECT_GE(v.front(), t);
  EXPECT_LE(v.back(), 1.0 - t);
  // Kolmogorov-Smirnov distance to the clipped arcsine CDF.
  const double lo = std::asin(std::sqrt(t));
  const double hi = std::asin(std::sqrt(1.0 - t));
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double cdf = (std::asin(std::sqrt(v[i])) - lo) / (hi - lo);
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / v.size()),
                  std::abs(cdf - static_cast<double>(i + 1) / v.size())});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(v.size())));
}

TEST(BiasSampling, CodewordBitsFollowTheBias) {
  CodeParameters params;
  params.num_codewords = 4000;
  params.codeword_length = 64;
  const auto p = sample_bias_vector(params, 5);
  const auto book = generate_codebook(params, p, 6);
  ASSERT_EQ(book.size(), 4000U);
  for (std::size_t k = 0; k < 64; ++k) {
    std::size_t ones = 0;
    for (const auto& row : book.codewords) ones += row.get(k);
    const double freq = static_cast<double>(ones) / 4000.0;
    const double sd = std::sqrt(p[k] * (1 - p[k]) / 4000.0);
    EXPECT_NEAR(freq, p[k], 5 * sd + 1e-3) << "position " << k;
  }
}

// Gauss-Legendre nodes and weights for degrees 2 and 3, mapped to (0,1).
TEST(DiscreteBias, TableMatchesGaussLegendreConstruction) {
  const auto two = load_discrete_bias(std::filesystem::path(RFP_DATA_DIR) / "nuida_bias.txt", 3);
  ASSERT_EQ(two.support.size(), 2U);
  EXPECT_NEAR(two.support[0].first, (1 - 1 / std::sqrt(3.0)) / 2, 1e-12);
  EXPECT_NEAR(two.support[1].first, (1 + 1 / std::sqrt(3.0)) / 2, 1e-12);
  EXPECT_NEAR(two.support[0].second, 0.5, 1e-12);

  const auto three = load_discrete_bias(std::filesystem::path(RFP_DATA_DIR) / "nuida_bias.txt", 6);
  ASSERT_EQ(three.support.size(), 3U);
  const double r = std::sqrt(0.6);
  const double nodes[] = {(1 - r) / 2, 0.5, (1 + r) / 2};
  const double weights[] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  double norm = 0;
  for (int i = 0; i < 3; ++i) norm += weights[i] / std::sqrt(nodes[i] * (1 - nodes[i]));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(three.support[i].first, nodes[i], 1e-12);
    EXPECT_NEAR(three.support[i].second, weights[i] / std::sqrt(nodes[i] * (1 - nodes[i])) / norm, 1e-12);
  }
  EXPECT_THROW(load_discrete_bias(std::filesystem::path(RFP_DATA_DIR) / "nuida_bias.txt", 11), ParameterError);
}

TEST(DiscreteBias, SamplesOnlySupportPoints) {
  CodeParameters params;
  params.bias = load_discrete_bias(std::filesystem::path(RFP_DATA_DIR) / "nuida_bias.txt", 4);
  const auto p = sample_bias_vector(params, 1);
  for (double x : p.values()) {
    EXPECT_TRUE(std::abs(x - 0.21132486540518713) < 1e-15 || std::abs(x - 0.78867513459481287) < 1e-15);
  }
}

TEST(FullCode, PaperParametersGiveExpectedLength) {
  const auto code = generate_full_code(CodeParameters{}, 74, 1);
  EXPECT_EQ(code.total_bits(), 58312U);
  EXPECT_TRUE(code.shared());
  EXPECT_EQ(code.concatenated_bias().size(), 58312U);
  EXPECT_EQ(code.concatenated_bias()[788 * 3 + 5], code.codebook(0).bias[5]);
}

TEST(FullCode, SerializationRoundTripsAndIsDeterministic) {
  CodeParameters params;
  params.codeword_length = 100;
  for (bool per_position : {false, true}) {
    const auto code = generate_full_code(params, 6, 99, per_position);
    EXPECT_EQ(code.shared(), !per_position);
    const auto bytes = code.serialize();
    EXPECT_EQ(FullCode::deserialize(bytes), code);
    EXPECT_EQ(generate_full_code(params, 6, 99, per_position).serialize(), bytes);
  }
}

TEST(FullCode, CorruptFileIsRejected) {
  CodeParameters params;
  params.codeword_length = 10;
  auto bytes = generate_full_code(params, 2, 1).serialize();
  bytes.pop_back();
  EXPECT_THROW(FullCode::deserialize(bytes), IntegrityError);
  bytes[0] = 'X';
  EXPECT_THROW(FullCode::deserialize(bytes), IntegrityError);
}

}  // namespace
}  // namespace rfp
