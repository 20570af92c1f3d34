#include "rfp/tracing.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "parallel.hpp"
#include "rfp/error.hpp"

namespace rfp {
namespace {

// Per-register score as sum(b) + sum over agreeing positions of (a - b),
// where a and b are the agreeing and differing per-bit terms. The second sum
// is read from one 256-entry table per byte of the packed agreement mask.
class PackedScorer {
 public:
  PackedScorer(const BitVector& traced_permuted, std::span<const double> w1, std::span<const double> w2)
      : l_(w1.size()), bytes_((l_ + 7) / 8), table_(bytes_ * 256) {
    std::vector<double> delta(bytes_ * 8, 0.0);
    for (std::size_t k = 0; k < l_; ++k) {
      const bool j = traced_permuted.get(k);
      const double a = j ? w2[k] : w1[k];
      const double b = j ? -w1[k] : -w2[k];
      base_ += b;
      delta[k] = a - b;
    }
    for (std::size_t c = 0; c < bytes_; ++c) {
      double* row = &table_[c * 256];
      const double* d = &delta[c * 8];
      row[0] = 0.0;
      for (unsigned mask = 1; mask < 256; ++mask) {
        const unsigned low = static_cast<unsigned>(__builtin_ctz(mask));
        row[mask] = row[mask & (mask - 1)] + d[low];
      }
    }
  }

  // Mean per-bit score for a register whose tag classes are `classes`, given
  // the traced copy's classes.
  double score(const BitVector& classes, const BitVector& traced_classes) const {
    const auto a = classes.words();
    const auto b = traced_classes.words();
    double sum = base_;
    for (std::size_t w = 0; w < a.size(); ++w) {
      std::uint64_t eq = ~(a[w] ^ b[w]);
      if (w + 1 == a.size() && l_ % 64 != 0) eq &= (std::uint64_t{1} << (l_ % 64)) - 1;
      for (std::size_t byte = 0; byte < 8 && w * 8 + byte < bytes_; ++byte) {
        sum += table_[(w * 8 + byte) * 256 + ((eq >> (8 * byte)) & 0xFF)];
      }
    }
    return sum / static_cast<double>(l_);
  }

 private:
  std::size_t l_;
  std::size_t bytes_;
  std::vector<double> table_;
  double base_ = 0.0;
};

void fill_extremes(ScoreReport& r) {
  for (const auto& s : r.scores) {
    auto& lo = s.accused ? r.accused_min : r.innocent_min;
    auto& hi = s.accused ? r.accused_max : r.innocent_max;
    lo = lo ? std::min(*lo, s.score) : s.score;
    hi = hi ? std::max(*hi, s.score) : s.score;
  }
}

}  // namespace

OmegaVectors omega_vectors(std::span<const double> p) {
  OmegaVectors out;
  out.omega1.reserve(p.size());
  out.omega2.reserve(p.size());
  for (double x : p) {
    out.omega1.push_back(phi(1.0 - x));
    out.omega2.push_back(phi(x));
  }
  return out;
}

TracingVectors mo_tracing_vectors(const EncryptedFingerprint& traced, const EncryptedFingerprint& tested,
                                  std::span<const double> p) {
  if (traced.size() != tested.size() || traced.size() != p.size() || traced.tag_width() != tested.tag_width()) {
    throw ParameterError("mo_tracing_vectors: length mismatch");
  }
  auto omega = omega_vectors(p);
  TracingVectors v{std::move(omega.omega1), std::move(omega.omega2), {}, {}};
  const std::size_t l = p.size();
  v.d0.resize(l);
  v.d1.resize(l);
  for (std::size_t k = 0; k < l; ++k) {
    if (traced.tag_equal(k, tested)) {
      v.d0[k] = 1;
      v.d1[k] = 2;
    } else {
      v.d0[k] = -2;
      v.d1[k] = -1;
    }
  }
  return v;
}

double ta_score(const TracingVectors& v, const BitVector& traced, const PermutationKey& sigma) {
  const std::size_t l = v.omega1.size();
  if (v.omega2.size() != l || v.d0.size() != l || v.d1.size() != l || traced.size() != l || sigma.size() != l) {
    throw ParameterError("ta_score: length mismatch");
  }
  if (l == 0) throw ParameterError("ta_score: empty vectors");
  const auto w1 = permute(v.omega1, sigma);
  const auto w2 = permute(v.omega2, sigma);
  const auto f = permute(traced, sigma);
  double sum = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    const int d = f.get(k) ? v.d1[k] : v.d0[k];
    const double w = (d == 1 || d == -1) ? w1[k] : w2[k];
    sum += d >= 0 ? w : -w;
  }
  return sum / static_cast<double>(l);
}

std::optional<Pseudonym> trace_exact(const BitVector& redistributed, const AuthorityKeyMaterial& keys,
                                     const PermutationKey& sigma, const TransactionDatabase& db) {
  if (redistributed.size() != keys.length()) throw ParameterError("trace_exact: fingerprint length mismatch");
  const auto enc = encrypt_fingerprint(redistributed, sigma, keys);
  const auto idx = db.find(enc);
  if (!idx) return std::nullopt;
  return db.at(*idx).pseudonym;
}

ScoreReport trace_colluders(const BitVector& colluded, const TransactionDatabase& db, const AuthorityKeyMaterial& keys,
                            const PermutationKey& sigma, std::span<const double> p, double threshold,
                            const TraceOptions& options) {
  if (!(threshold > 0.0)) throw ParameterError("threshold must be positive");
  if (colluded.size() != keys.length() || p.size() != keys.length()) {
    throw ParameterError("trace_colluders: length mismatch");
  }
  ScoreReport report;
  report.threshold = threshold;
  report.scores.resize(db.size());
  if (db.empty()) return report;

  // Authority: E(sigma(f')) goes to the monitor.
  const auto enc = encrypt_fingerprint(colluded, sigma, keys);

  if (options.literal) {
    detail::parallel_for(db.size(), options.threads, [&](std::size_t i) {
      const auto v = mo_tracing_vectors(enc, db.at(i).enc_fp, p);
      report.scores[i].score = kScoreScale * ta_score(v, colluded, sigma);
    });
  } else {
    const auto omega = omega_vectors(p);
    const auto w1 = permute(omega.omega1, sigma);
    const auto w2 = permute(omega.omega2, sigma);
    const PackedScorer scorer(permute(colluded, sigma), w1, w2);
    const auto traced_classes = db.classify(enc);
    detail::parallel_for(db.size(), options.threads, [&](std::size_t i) {
      report.scores[i].score = kScoreScale * scorer.score(db.tag_classes(i), traced_classes);
    });
  }

  for (std::size_t i = 0; i < db.size(); ++i) {
    auto& s = report.scores[i];
    s.register_index = i;
    s.pseudonym = db.at(i).pseudonym;
    s.accused = s.score > threshold;
    if (s.accused) report.accused.push_back(i);
  }
  fill_extremes(report);
  return report;
}

std::optional<Pseudonym> trace_exact(const BitVector& redistributed, Simulation& sim) {
  auto& log = sim.log();
  const auto t = sim.clock();
  log.record(t, "P3", 1, ActorRef::authority(), ActorRef::authority(), "extract_fingerprint");
  log.record(t, "P3", 2, ActorRef::authority(), ActorRef::authority(), "encrypt_permuted");
  log.record(t, "P3", 3, ActorRef::authority(), ActorRef::monitor(), "encrypted_copy");
  auto found = trace_exact(redistributed, sim.keys(), sim.sigma(), sim.database());
  log.record(t, "P3", 5, ActorRef::monitor(), ActorRef::monitor(), "search", found ? "hit" : "miss");
  if (found) log.record(t, "P3", 6, ActorRef::monitor(), ActorRef::authority(), "pseudonym", found->hex());
  return found;
}

TraceOutcome trace(const BitVector& copy, Simulation& sim, double threshold, const TraceOptions& options) {
  TraceOutcome out;
  out.exact = trace_exact(copy, sim);
  if (out.exact) {
    const std::array<Pseudonym, 1> one{*out.exact};
    out.identities = sim.resolve_identity(one);
    return out;
  }
  auto& log = sim.log();
  const auto t = sim.clock();
  log.record(t, "P4", 1, ActorRef::authority(), ActorRef::monitor(), "start_collusion_tracing");
  auto report = trace_colluders(copy, sim.database(), sim.keys(), sim.sigma(), sim.code().concatenated_bias(),
                                threshold, options);
  log.record(t, "P4", 2, ActorRef::monitor(), ActorRef::monitor(), "tracing_vectors",
             std::to_string(report.scores.size()) + " registers");
  log.record(t, "P4", 3, ActorRef::monitor(), ActorRef::authority(), "tracing_vectors");
  log.record(t, "P4", 4, ActorRef::authority(), ActorRef::authority(), "scores");
  log.record(t, "P4", 5, ActorRef::authority(), ActorRef::monitor(), "accused_indices",
             std::to_string(report.accused.size()));
  std::vector<Pseudonym> pseudonyms;
  for (auto i : report.accused) pseudonyms.push_back(report.scores[i].pseudonym);
  log.record(t, "P4", 6, ActorRef::monitor(), ActorRef::authority(), "pseudonyms",
             std::to_string(pseudonyms.size()));
  out.identities = sim.resolve_identity(pseudonyms);
  log.record(t, "P4", 7, ActorRef::merchant(), ActorRef::authority(), "identities",
             std::to_string(out.identities.size()));
  out.report = std::move(report);
  return out;
}

double calibrate_threshold(double expected_colluder_score) {
  if (!(expected_colluder_score > 0.0)) throw ParameterError("expected colluder score must be positive");
  return 0.75 * expected_colluder_score;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", score);
  return buf;
}

std::string score_csv(const ScoreReport& report) {
  std::string out = "buyer_index,pseudonym,score,accused\n";
  for (const auto& s : report.scores) {
    out += std::to_string(s.register_index) + "," + s.pseudonym.hex() + "," + format_score(s.score) + "," +
           (s.accused ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace rfp
