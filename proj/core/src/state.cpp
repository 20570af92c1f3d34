#include "rfp/state.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "rfp/error.hpp"

namespace rfp {
namespace {

namespace fs = std::filesystem;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

// Refuses to reuse a directory holding anything other than files this tool
// writes; with `force` those files are removed.
void prepare_dir(const fs::path& dir, bool force, std::initializer_list<const char*> ours) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw StateError(dir.string() + " is not empty (use --force to overwrite)");
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (std::none_of(ours.begin(), ours.end(), [&](const char* n) { return name == n; })) {
        throw StateError("refusing to overwrite " + dir.string() + ": unexpected entry '" + name + "'");
      }
    }
    for (const auto* name : ours) fs::remove_all(dir / name);
  }
  fs::create_directories(dir);
}

}  // namespace

void save_state(const fs::path& dir, const ExperimentConfig& config, const Simulation& sim,
                std::size_t registers_on_disk) {
  const StateLayout files{dir};
  fs::create_directories(dir);
  write_file(files.config(), as_bytes(config.to_json()));
  write_file(files.codebook(), sim.code().serialize());
  write_file(files.key(), sim.keys().serialize(), true);
  write_file(files.population(), sim.serialize_state());
  if (registers_on_disk == 0) write_file(files.transactions(), {});
  sim.database().append_to(files.transactions(), registers_on_disk);
  append_file(files.events(), as_bytes(sim.log().to_ndjson()));
}

LoadedState load_state(const fs::path& dir) {
  const StateLayout files{dir};
  if (!fs::exists(files.population()) || !fs::exists(files.config())) {
    throw StateError("no bootstrapped content in " + dir.string() + " (run bootstrap first)");
  }
  auto config = ExperimentConfig::from_json(read_text(files.config()));
  auto code = FullCode::deserialize(read_file(files.codebook()));
  auto [keys, sigma] = AuthorityKeyMaterial::deserialize(read_file(files.key()));
  auto db = TransactionDatabase::load(files.transactions());
  const auto on_disk = db.size();
  auto sim = Simulation::restore(config.sim_config(), std::move(code), std::move(keys), std::move(sigma),
                                 read_file(files.population()), std::move(db));
  return {std::move(config), std::move(sim), on_disk};
}

BootstrapReport cmd_bootstrap(const ExperimentConfig& config, const fs::path& dir, bool force) {
  config.validate();
  prepare_dir(dir, force,
              {"config.json", "codebook.bin", "authority.key", "population.bin", "transactions.db", "events.ndjson",
               "attacks"});
  BootstrapReport report;
  auto t0 = std::chrono::steady_clock::now();
  auto code = generate_full_code(config.code_parameters(), config.n_s, derive_seed(config.seed, "code"),
                                 config.per_position_codebooks);
  report.code_ms = elapsed_ms(t0);
  t0 = std::chrono::steady_clock::now();
  auto [keys, sigma] = generate_keys(code.total_bits(), config.backend, derive_seed(config.seed, "keys"),
                                     config.content_id);
  report.keys_ms = elapsed_ms(t0);
  t0 = std::chrono::steady_clock::now();
  Simulation sim(config.sim_config(), std::move(code), std::move(keys), std::move(sigma));
  sim.bootstrap(config.content_id, config.M);
  report.seeds_ms = elapsed_ms(t0);
  report.seeds = sim.seed_count();
  report.length = sim.code().total_bits();
  save_state(dir, config, sim, 0);
  return report;
}

GrowReport cmd_grow(const fs::path& dir, std::optional<std::uint32_t> generations) {
  auto state = load_state(dir);
  // An explicit target leaves the configured K untouched.
  auto target = state.config;
  if (generations) target.K = *generations;
  target.validate();
  const auto t0 = std::chrono::steady_clock::now();
  state.sim.grow_population(target.K);
  GrowReport report;
  report.ms = elapsed_ms(t0);
  report.population = state.sim.buyers().size();
  report.registers = state.sim.database().size();
  report.generations = state.sim.generations();
  std::unordered_set<BitVector, BitVectorHash> distinct;
  for (std::size_t i = state.sim.seed_count(); i < state.sim.buyers().size(); ++i) {
    distinct.insert(state.sim.buyer(i).fingerprint.bits());
  }
  report.distinct_fingerprints = distinct.size();
  save_state(dir, state.config, state.sim, state.registers_on_disk);
  return report;
}

std::vector<AttackFiles> cmd_attack(const fs::path& dir, const std::vector<AttackKind>& attacks,
                                    std::uint32_t coalitions, std::uint32_t c) {
  auto state = load_state(dir);
  if (c < 2) throw ParameterError("coalition size must be at least 2");
  state.config.c = c;
  const auto non_seed = state.sim.buyers().size() - state.sim.seed_count();
  if (non_seed < c) {
    throw ParameterError("population has " + std::to_string(non_seed) + " non-seed buyers, fewer than c = " +
                         std::to_string(c));
  }
  const StateLayout files{dir};
  fs::create_directories(files.attacks());
  std::vector<AttackFiles> out;
  for (auto a : attacks) {
    for (std::uint32_t r = 0; r < coalitions; ++r) {
      auto run = make_coalition_run(state.sim, state.config, a, r);
      char stem[64];
      std::snprintf(stem, sizeof stem, "%s-%04u", to_string(a).c_str(), r);
      AttackFiles f{run.trace, files.attacks() / (std::string(stem) + ".json"),
                    files.attacks() / (std::string(stem) + ".fp")};
      write_file(f.trace_path, as_bytes(run.trace.to_json()));
      const Fingerprint fp(state.sim.code().num_segments(), state.sim.code().segment_length(), run.colluded);
      write_file(f.fingerprint_path, fp.serialize());
      out.push_back(std::move(f));
    }
  }
  return out;
}

TraceCommandReport cmd_trace(const fs::path& dir, const fs::path& copy, const std::optional<fs::path>& truth,
                             const std::optional<fs::path>& csv_out, std::optional<double> threshold) {
  auto state = load_state(dir);
  const auto input = Fingerprint::deserialize(read_file(copy));
  if (input.total_bits() != state.sim.code().total_bits()) {
    throw ParameterError("copy has " + std::to_string(input.total_bits()) + " bits, expected " +
                         std::to_string(state.sim.code().total_bits()));
  }
  double t = state.config.threshold;
  if (threshold) {
    t = *threshold;
  } else if (state.config.threshold_mode == ThresholdMode::Auto) {
    t = calibrate_threshold(estimate_colluder_score(state.sim, state.config, state.config.calibration_coalitions));
  }

  TraceCommandReport report;
  TraceOptions opts;
  opts.threads = state.config.threads;
  auto outcome = trace(input.bits(), state.sim, t, opts);
  report.exact = outcome.exact;
  report.report = std::move(outcome.report);
  report.identities = std::move(outcome.identities);
  for (const auto& id : report.identities) report.identity_verified.push_back(id.verify(state.sim.content_id()));

  std::vector<Pseudonym> accused;
  if (report.exact) accused.push_back(*report.exact);
  if (report.report) {
    for (auto i : report.report->accused) accused.push_back(report.report->scores[i].pseudonym);
  }
  if (truth) {
    report.truth_supplied = true;
    const auto tr = AttackTrace::from_json(read_text(*truth));
    std::set<Pseudonym> guilty;
    for (auto m : tr.members) {
      if (m >= state.sim.buyers().size() || !state.sim.buyer(m).pseudonym) {
        throw ParameterError("ground truth names buyer " + std::to_string(m) + ", which has no pseudonym");
      }
      guilty.insert(*state.sim.buyer(m).pseudonym);
    }
    for (const auto& p : accused) {
      if (!guilty.contains(p)) report.known_innocent_accused.push_back(p);
    }
  }
  report.exit_code = (!accused.empty() && report.known_innocent_accused.empty()) ? 0 : 1;

  if (csv_out && report.report) write_file(*csv_out, as_bytes(score_csv(*report.report)));
  append_file(StateLayout{dir}.events(), as_bytes(state.sim.log().to_ndjson()));
  return report;
}

ExperimentResult cmd_experiment(const ExperimentConfig& config, bool force) {
  config.validate();
  prepare_dir(config.output, force, {"config.json", "runs.csv", "summary.csv", "figure_scores.csv"});
  auto sim = make_simulation(config);
  sim.grow_population(config.K);
  auto result = run_experiment(sim, config);
  write_file(config.output / "config.json", as_bytes(config.to_json()));
  write_file(config.output / "runs.csv", as_bytes(runs_csv(result)));
  write_file(config.output / "summary.csv", as_bytes(summary_csv(result, config)));
  write_file(config.output / "figure_scores.csv", as_bytes(figure_scores_csv(result, sim)));
  return result;
}

CalibrateReport cmd_calibrate(const fs::path& dir, std::uint32_t coalitions) {
  auto state = load_state(dir);
  if (state.sim.database().empty()) throw StateError("calibration needs a grown population (run grow first)");
  CalibrateReport report;
  report.coalitions = coalitions;
  report.ta = estimate_colluder_score(state.sim, state.config, coalitions);
  report.threshold = calibrate_threshold(report.ta);
  return report;
}

}  // namespace rfp
