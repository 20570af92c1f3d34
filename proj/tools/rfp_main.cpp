// rfp: bootstrap, grow, attack and trace recombined-fingerprint content.
//
// Exit codes: 0 success, 1 tracing failed or accused a known innocent,
// 2 invalid arguments or configuration, 3 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfp/error.hpp"
#include "rfp/experiment.hpp"
#include "rfp/state.hpp"

namespace {

struct GlobalOptions {
  std::string config_file;
  std::string profile;
  std::optional<rfp::Seed> seed;
  std::string backend;
  std::optional<unsigned> threads;
};

rfp::ExperimentConfig build_config(const GlobalOptions& g) {
  rfp::ExperimentConfig c;
  if (!g.config_file.empty()) {
    c = rfp::ExperimentConfig::load(g.config_file);
    if (!g.profile.empty() && g.profile != c.profile) {
      throw rfp::ConfigError("--profile " + g.profile + " conflicts with profile '" + c.profile + "' in " +
                             g.config_file);
    }
  } else if (!g.profile.empty()) {
    c = rfp::ExperimentConfig::for_profile(g.profile);
  }
  if (g.seed) c.seed = *g.seed;
  if (!g.backend.empty()) c.backend = rfp::parse_security(g.backend);
  if (g.threads) c.threads = *g.threads;
  return c;
}

std::vector<rfp::AttackKind> parse_attacks(const std::vector<std::string>& names) {
  std::vector<rfp::AttackKind> out;
  for (const auto& n : names) out.push_back(rfp::parse_attack(n));
  return out;
}

void print_warnings(const rfp::ExperimentConfig& c) {
  for (const auto& w : c.warnings()) std::cerr << "warning: " << w << "\n";
}

std::string opt(const std::optional<double>& v) { return v ? rfp::format_score(*v) : "-"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recombined-fingerprint distribution and traitor tracing"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--profile", g.profile, "Preset: desk, paper or crypto")
      ->check(CLI::IsMember({"desk", "paper", "crypto"}));
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--backend", g.backend, "Tag cipher: mock, paillier-1024 or paillier-2048")
      ->check(CLI::IsMember({"mock", "paillier-1024", "paillier-2048"}));
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  std::string state_dir = "rfp-state";
  bool force = false;

  auto* bootstrap = app.add_subcommand("bootstrap", "Generate the code, keys and seed copies");
  bootstrap->add_option("--state", state_dir, "State directory");
  bootstrap->add_flag("--force", force, "Overwrite an existing state directory");

  std::optional<std::uint32_t> generations;
  auto* grow = app.add_subcommand("grow", "Grow the buyer population to K generations");
  grow->add_option("--state", state_dir, "State directory");
  grow->add_option("-K,--generations", generations, "Generations (default from config)");

  std::vector<std::string> attack_names{"average", "min", "max"};
  std::optional<std::uint32_t> coalitions;
  std::optional<std::uint32_t> coalition_size;
  auto* attack = app.add_subcommand("attack", "Sample coalitions and write colluded copies with attack traces");
  attack->add_option("--state", state_dir, "State directory");
  attack->add_option("--attacks", attack_names, "Attack types")->delimiter(',');
  attack->add_option("--coalitions", coalitions, "Coalitions per attack");
  attack->add_option("-c,--colluders", coalition_size, "Coalition size");

  std::string input;
  std::optional<std::string> truth, csv_out;
  std::optional<double> threshold;
  auto* trace = app.add_subcommand("trace", "Trace a redistributed copy (exact search, then collusion tracing)");
  trace->add_option("--state", state_dir, "State directory");
  trace->add_option("--input", input, "Fingerprint file of the redistributed copy")->required();
  trace->add_option("--truth", truth, "Attack trace naming the real colluders");
  trace->add_option("--csv", csv_out, "Write per-buyer scores as CSV");
  trace->add_option("--threshold", threshold, "Accusation threshold T");

  std::optional<std::string> output;
  auto* experiment = app.add_subcommand("experiment", "Bootstrap, grow, attack and trace in one batch");
  experiment->add_option("--output", output, "Output directory for CSV artifacts");
  experiment->add_flag("--force", force, "Overwrite an existing output directory");
  experiment->add_option("--coalitions", coalitions, "Coalitions per attack");
  experiment->add_option("-K,--generations", generations, "Generations");
  experiment->add_option("--threshold", threshold, "Fixed accusation threshold T");

  std::optional<double> ta;
  std::uint32_t calib_coalitions = 20;
  auto* calibrate = app.add_subcommand("calibrate", "Derive T = 0.75 * Ta from a colluder score estimate");
  calibrate->add_option("--state", state_dir, "State directory");
  calibrate->add_option("--ta", ta, "Known expected colluder score");
  calibrate->add_option("--coalitions", calib_coalitions, "Synthetic coalitions per attack");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bootstrap) {
      const auto config = build_config(g);
      print_warnings(config);
      const auto r = rfp::cmd_bootstrap(config, state_dir, force);
      std::printf("bootstrap: %zu seed copies, l = %zu\n", r.seeds, r.length);
      std::printf("  code generation   %10.1f ms\n  key generation    %10.1f ms\n  seed copies       %10.1f ms\n",
                  r.code_ms, r.keys_ms, r.seeds_ms);
    } else if (*grow) {
      const auto r = rfp::cmd_grow(state_dir, generations);
      std::printf("grow: K = %u, N = %zu, registers = %zu, distinct non-seed fingerprints = %zu (%.1f ms)\n",
                  r.generations, r.population, r.registers, r.distinct_fingerprints, r.ms);
    } else if (*attack) {
      const auto state = rfp::load_state(state_dir);
      const auto files = rfp::cmd_attack(state_dir, parse_attacks(attack_names),
                                         coalitions.value_or(state.config.coalitions),
                                         coalition_size.value_or(state.config.c));
      for (const auto& f : files) std::printf("%s\n", f.fingerprint_path.string().c_str());
    } else if (*trace) {
      const auto r = rfp::cmd_trace(state_dir, input, truth ? std::optional<std::filesystem::path>(*truth) : std::nullopt,
                                    csv_out ? std::optional<std::filesystem::path>(*csv_out) : std::nullopt,
                                    threshold);
      if (r.exact) {
        std::printf("exact match: %s\n", r.exact->hex().c_str());
      } else {
        const auto& rep = *r.report;
        std::printf("collusion tracing: T = %s, %zu of %zu registers accused\n", rfp::format_score(rep.threshold).c_str(),
                    rep.accused.size(), rep.scores.size());
        std::printf("  accused scores   [%s, %s]\n  other scores     [%s, %s]\n", opt(rep.accused_min).c_str(),
                    opt(rep.accused_max).c_str(), opt(rep.innocent_min).c_str(), opt(rep.innocent_max).c_str());
      }
      for (std::size_t i = 0; i < r.identities.size(); ++i) {
        const auto& id = r.identities[i];
        std::printf("  %s %s agr=%s\n", id.pseudonym.hex().c_str(), id.real_identity.c_str(),
                    r.identity_verified[i] ? "valid" : "INVALID");
      }
      if (r.truth_supplied && !r.known_innocent_accused.empty()) {
        std::printf("  %zu accused buyers are not in the ground truth\n", r.known_innocent_accused.size());
      }
      if (r.exit_code != 0 && !r.exact && r.report->failed()) std::printf("tracing failed: no score above T\n");
      return r.exit_code;
    } else if (*experiment) {
      auto config = build_config(g);
      if (output) config.output = *output;
      if (coalitions) config.coalitions = *coalitions;
      if (generations) config.K = *generations;
      if (threshold) {
        config.threshold = *threshold;
        config.threshold_mode = rfp::ThresholdMode::Fixed;
      }
      print_warnings(config);
      const auto r = rfp::cmd_experiment(config, force);
      std::printf("experiment: N = %zu, registers = %zu, T = %s%s\n", r.population, r.registers,
                  rfp::format_score(r.threshold).c_str(),
                  r.calibrated_ta ? (" (Ta = " + rfp::format_score(*r.calibrated_ta) + ")").c_str() : "");
      for (const auto& s : r.summaries) {
        std::printf("  %-8s runs %4zu  exact %4zu  with false accusations %4zu  colluders [%s, %s]  innocents [%s, %s]\n",
                    rfp::to_string(s.attack).c_str(), s.runs, s.exact_runs, s.runs_with_false,
                    opt(s.colluder_min).c_str(), opt(s.colluder_max).c_str(), opt(s.innocent_min).c_str(),
                    opt(s.innocent_max).c_str());
      }
      std::printf("artifacts in %s\n", config.output.string().c_str());
    } else if (*calibrate) {
      if (ta) {
        std::printf("T = %s\n", rfp::format_score(rfp::calibrate_threshold(*ta)).c_str());
      } else {
        const auto r = rfp::cmd_calibrate(state_dir, calib_coalitions);
        std::printf("Ta = %s over %zu coalitions per attack, T = %s\n", rfp::format_score(r.ta).c_str(), r.coalitions,
                    rfp::format_score(r.threshold).c_str());
      }
    }
  } catch (const rfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rfp::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const rfp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
