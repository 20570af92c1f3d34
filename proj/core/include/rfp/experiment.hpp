#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfp/attacks.hpp"
#include "rfp/code.hpp"
#include "rfp/crypto.hpp"
#include "rfp/simnet.hpp"
#include "rfp/tracing.hpp"

namespace rfp {

enum class ThresholdMode : std::uint8_t { Fixed, Auto };

struct ExperimentConfig {
  std::string profile = "desk";
  std::string content_id = "content-0";
  Seed seed = 1;

  // code
  std::uint32_t M = 10;
  std::uint32_t c0 = 4;
  double epsilon = 1e-3;
  std::uint32_t l0 = 788;
  std::string bias = "arcsine";  // arcsine | nuida
  double cutoff = 0.0;           // 0 selects 1/(300*c0)
  bool per_position_codebooks = false;

  // layout
  std::uint32_t n_s = 74;
  std::uint32_t m = 0;  // 0 derives n_s / proxies

  // population
  std::uint32_t K = 7;
  std::uint32_t min_parents = 2;
  std::uint32_t max_parents = 4;
  std::uint32_t proxies = 5;
  std::uint32_t proxy_pool = 16;
  std::uint32_t relays_per_hop = 1;
  std::uint64_t purge_delay = 1;

  Security backend = Security::Mock;

  // attack plan
  std::vector<AttackKind> attacks{AttackKind::Average, AttackKind::Min, AttackKind::Max};
  std::uint32_t coalitions = 50;
  std::uint32_t c = 4;

  // threshold
  ThresholdMode threshold_mode = ThresholdMode::Fixed;
  double threshold = kDefaultThreshold;
  std::uint32_t calibration_coalitions = 20;

  unsigned threads = 0;
  std::filesystem::path output = "rfp-out";

  static ExperimentConfig for_profile(std::string_view name);
  static ExperimentConfig from_json(std::string_view text);
  // Reads `path` on top of the named profile (or the file's own "profile").
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  // ConfigError naming the offending field.
  void validate() const;
  std::vector<std::string> warnings() const;

  std::uint32_t effective_m() const { return m != 0 ? m : n_s / proxies; }
  std::size_t population() const { return static_cast<std::size_t>(M) << (K - 1); }
  CodeParameters code_parameters() const;
  SimConfig sim_config() const;
};

// Fresh in-memory run: code, keys and bootstrapped seeds.
Simulation make_simulation(const ExperimentConfig& config);

struct CoalitionRun {
  std::size_t run = 0;
  AttackKind attack = AttackKind::Average;
  AttackTrace trace;
  BitVector colluded;
  bool marking_ok = true;
  std::optional<Pseudonym> exact;
  ScoreReport report;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::optional<double> colluder_min, colluder_max;
  std::optional<double> innocent_min, innocent_max;

  bool exact_accusation() const { return false_positives == 0 && false_negatives == 0; }
};

struct AttackSummary {
  AttackKind attack = AttackKind::Average;
  std::size_t runs = 0;
  std::size_t exact_runs = 0;         // accused set equals the coalition
  std::size_t runs_with_false = 0;    // at least one innocent accused
  std::size_t colluders_total = 0;
  std::size_t colluders_detected = 0;
  std::optional<double> colluder_min, colluder_max;
  std::optional<double> innocent_min, innocent_max;
};

struct ExperimentResult {
  double threshold = kDefaultThreshold;
  std::optional<double> calibrated_ta;
  std::size_t population = 0;
  std::size_t registers = 0;
  std::vector<CoalitionRun> runs;
  std::vector<AttackSummary> summaries;
  std::uint64_t decrypts_during_tracing = 0;
};

// Samples a coalition of non-seed buyers and applies the attack. Members and
// tie seed are derived from (seed, attack, run).
CoalitionRun make_coalition_run(const Simulation& sim, const ExperimentConfig& config, AttackKind attack,
                                std::size_t run, std::string_view purpose = "coalition");

// Protocol 3 then Protocol 4 for one run, filling the scoring fields.
void trace_run(CoalitionRun& run, const Simulation& sim, double threshold, unsigned threads);

// Mean colluder score over synthetic coalitions of every configured attack.
double estimate_colluder_score(const Simulation& sim, const ExperimentConfig& config, std::size_t coalitions);

// Attacks and traces every planned coalition on a grown population.
ExperimentResult run_experiment(const Simulation& sim, const ExperimentConfig& config);

std::vector<AttackSummary> summarize(const std::vector<CoalitionRun>& runs, const std::vector<AttackKind>& attacks);

// CSV artifacts; column orders are fixed (see docs/csv_schemas.md).
std::string runs_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result, const ExperimentConfig& config);
std::string figure_scores_csv(const ExperimentResult& result, const Simulation& sim);

}  // namespace rfp
