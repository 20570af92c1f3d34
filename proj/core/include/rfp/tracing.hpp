#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfp/bits.hpp"
#include "rfp/crypto.hpp"
#include "rfp/simnet.hpp"
#include "rfp/transaction_db.hpp"

namespace rfp {

// Reported scores are the mean per-bit score expressed in percent; the
// default threshold of 12 is on this scale.
constexpr double kScoreScale = 100.0;
constexpr double kDefaultThreshold = 12.0;

struct OmegaVectors {
  std::vector<double> omega1;  // phi(1 - p)
  std::vector<double> omega2;  // phi(p)
};

// omega vectors in unpermuted order plus the D0/D1 encodings in permuted
// order: (+1, +2) where the tags agree and (-2, -1) where they differ.
struct TracingVectors {
  std::vector<double> omega1;
  std::vector<double> omega2;
  std::vector<std::int8_t> d0;
  std::vector<std::int8_t> d1;
};

OmegaVectors omega_vectors(std::span<const double> p);

// Monitor side: compares tags only.
TracingVectors mo_tracing_vectors(const EncryptedFingerprint& traced, const EncryptedFingerprint& tested,
                                  std::span<const double> p);

// Authority side: mean of sign(D_j) * W_|D_j| over permuted positions, with
// W = sigma(omega) and j the permuted traced bit. Unscaled.
double ta_score(const TracingVectors& vectors, const BitVector& traced, const PermutationKey& sigma);

// Protocol 3: re-encrypts the copy and searches the register table.
std::optional<Pseudonym> trace_exact(const BitVector& redistributed, const AuthorityKeyMaterial& keys,
                                     const PermutationKey& sigma, const TransactionDatabase& db);

struct BuyerScore {
  std::size_t register_index = 0;
  Pseudonym pseudonym;
  double score = 0.0;  // percent scale
  bool accused = false;
};

struct ScoreReport {
  std::vector<BuyerScore> scores;  // one per register, in register order
  double threshold = kDefaultThreshold;
  std::vector<std::size_t> accused;  // register indices, ascending
  std::optional<double> accused_min, accused_max;
  std::optional<double> innocent_min, innocent_max;

  // No score exceeded the threshold.
  bool failed() const noexcept { return accused.empty(); }
};

struct TraceOptions {
  unsigned threads = 0;  // 0 picks the hardware concurrency
  // Runs the monitor/authority computations literally per register instead
  // of the packed tag-class path.
  bool literal = false;
};

// Protocol 4 over every register. The traced copy is encrypted by the
// authority; the monitor never sees it in the clear and no stored
// fingerprint is decrypted.
ScoreReport trace_colluders(const BitVector& colluded, const TransactionDatabase& db, const AuthorityKeyMaterial& keys,
                            const PermutationKey& sigma, std::span<const double> p, double threshold,
                            const TraceOptions& options = {});

// Convenience forms that log protocol steps to the simulation's event log and,
// for Protocol 4, resolve accused pseudonyms through the merchant.
std::optional<Pseudonym> trace_exact(const BitVector& redistributed, Simulation& sim);

struct TraceOutcome {
  std::optional<Pseudonym> exact;
  std::optional<ScoreReport> report;  // present when the exact search missed
  std::vector<IdentityProof> identities;
};

TraceOutcome trace(const BitVector& copy, Simulation& sim, double threshold, const TraceOptions& options = {});

// T = 0.75 * Ta.
double calibrate_threshold(double expected_colluder_score);

// buyer_index,pseudonym,score,accused
std::string score_csv(const ScoreReport& report);

std::string format_score(double score);

}  // namespace rfp
