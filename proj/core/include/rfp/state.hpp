#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfp/experiment.hpp"
#include "rfp/simnet.hpp"

namespace rfp {

// Files of a persisted content state directory.
struct StateLayout {
  std::filesystem::path dir;

  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path codebook() const { return dir / "codebook.bin"; }
  std::filesystem::path key() const { return dir / "authority.key"; }
  std::filesystem::path population() const { return dir / "population.bin"; }
  std::filesystem::path transactions() const { return dir / "transactions.db"; }
  std::filesystem::path events() const { return dir / "events.ndjson"; }
  std::filesystem::path attacks() const { return dir / "attacks"; }
};

struct LoadedState {
  ExperimentConfig config;
  Simulation sim;
  std::size_t registers_on_disk = 0;
};

// Writes everything but the append-only files, then appends registers from
// `registers_on_disk` and all events currently in the simulation's log.
void save_state(const std::filesystem::path& dir, const ExperimentConfig& config, const Simulation& sim,
                std::size_t registers_on_disk);
// StateError when the directory holds no bootstrapped content.
LoadedState load_state(const std::filesystem::path& dir);

struct BootstrapReport {
  std::size_t seeds = 0;
  std::size_t length = 0;
  double code_ms = 0, keys_ms = 0, seeds_ms = 0;
};

struct GrowReport {
  std::size_t population = 0;
  std::size_t registers = 0;
  std::size_t distinct_fingerprints = 0;
  std::uint32_t generations = 0;
  double ms = 0;
};

struct AttackFiles {
  AttackTrace trace;
  std::filesystem::path trace_path;
  std::filesystem::path fingerprint_path;
};

struct TraceCommandReport {
  std::optional<Pseudonym> exact;
  std::optional<ScoreReport> report;
  std::vector<IdentityProof> identities;
  std::vector<bool> identity_verified;  // AGR check per identity
  std::vector<Pseudonym> known_innocent_accused;
  bool truth_supplied = false;
  int exit_code = 0;
};

struct CalibrateReport {
  double ta = 0;
  double threshold = 0;
  std::size_t coalitions = 0;
};

BootstrapReport cmd_bootstrap(const ExperimentConfig& config, const std::filesystem::path& dir, bool force);
GrowReport cmd_grow(const std::filesystem::path& dir, std::optional<std::uint32_t> generations);
std::vector<AttackFiles> cmd_attack(const std::filesystem::path& dir, const std::vector<AttackKind>& attacks,
                                    std::uint32_t coalitions, std::uint32_t c);
TraceCommandReport cmd_trace(const std::filesystem::path& dir, const std::filesystem::path& copy,
                             const std::optional<std::filesystem::path>& truth,
                             const std::optional<std::filesystem::path>& csv_out, std::optional<double> threshold);
ExperimentResult cmd_experiment(const ExperimentConfig& config, bool force);
CalibrateReport cmd_calibrate(const std::filesystem::path& dir, std::uint32_t coalitions);

}  // namespace rfp
