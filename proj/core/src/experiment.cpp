#include "rfp/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "rfp/error.hpp"

namespace rfp {
namespace {

using json = nlohmann::ordered_json;

std::string opt_score(const std::optional<double>& v) { return v ? format_score(*v) : std::string{}; }

void widen(std::optional<double>& lo, std::optional<double>& hi, double v) {
  lo = lo ? std::min(*lo, v) : v;
  hi = hi ? std::max(*hi, v) : v;
}

void merge(std::optional<double>& lo, std::optional<double>& hi, const std::optional<double>& olo,
           const std::optional<double>& ohi) {
  if (olo) widen(lo, hi, *olo);
  if (ohi) widen(lo, hi, *ohi);
}

std::string rate(std::size_t num, std::size_t den) {
  return den == 0 ? std::string{} : format_score(static_cast<double>(num) / static_cast<double>(den));
}

template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& path) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + path + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; })) {
      throw ConfigError("unknown config field '" + path + k + "'");
    }
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::for_profile(std::string_view name) {
  ExperimentConfig c;
  c.profile = std::string(name);
  if (name == "desk") return c;
  if (name == "paper") {
    c.K = 10;
    c.coalitions = 1000;
    return c;
  }
  if (name == "crypto") {
    c.backend = Security::Paillier1024;
    c.n_s = 10;
    c.l0 = 64;
    c.K = 3;
    c.coalitions = 5;
    c.threshold_mode = ThresholdMode::Auto;
    c.calibration_coalitions = 10;
    return c;
  }
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected desk, paper or crypto)");
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"version", "profile", "content_id", "seed", "code", "layout", "population", "backend", "attacks",
                     "threshold", "threads", "output"},
                 "");
  std::string profile = "desk";
  take(j, "profile", profile, "");
  auto c = for_profile(profile);
  take(j, "content_id", c.content_id, "");
  take(j, "seed", c.seed, "");
  take(j, "threads", c.threads, "");
  if (j.contains("output")) {
    std::string out;
    take(j, "output", out, "");
    c.output = out;
  }
  if (j.contains("backend")) {
    std::string b;
    take(j, "backend", b, "");
    try {
      c.backend = parse_security(b);
    } catch (const Error&) {
      throw ConfigError("config field 'backend' must be mock, paillier-1024 or paillier-2048");
    }
  }
  if (j.contains("code")) {
    const auto& s = j["code"];
    reject_unknown(s, {"M", "c0", "epsilon", "l0", "bias", "cutoff", "per_position"}, "code.");
    take(s, "M", c.M, "code.");
    take(s, "c0", c.c0, "code.");
    take(s, "epsilon", c.epsilon, "code.");
    take(s, "l0", c.l0, "code.");
    take(s, "bias", c.bias, "code.");
    take(s, "cutoff", c.cutoff, "code.");
    take(s, "per_position", c.per_position_codebooks, "code.");
  }
  if (j.contains("layout")) {
    const auto& s = j["layout"];
    reject_unknown(s, {"n_s", "m"}, "layout.");
    take(s, "n_s", c.n_s, "layout.");
    take(s, "m", c.m, "layout.");
  }
  if (j.contains("population")) {
    const auto& s = j["population"];
    reject_unknown(s, {"K", "min_parents", "max_parents", "proxies", "proxy_pool", "relays_per_hop", "purge_delay"},
                   "population.");
    take(s, "K", c.K, "population.");
    take(s, "min_parents", c.min_parents, "population.");
    take(s, "max_parents", c.max_parents, "population.");
    take(s, "proxies", c.proxies, "population.");
    take(s, "proxy_pool", c.proxy_pool, "population.");
    take(s, "relays_per_hop", c.relays_per_hop, "population.");
    take(s, "purge_delay", c.purge_delay, "population.");
  }
  if (j.contains("attacks")) {
    const auto& s = j["attacks"];
    reject_unknown(s, {"types", "coalitions", "c"}, "attacks.");
    if (s.contains("types")) {
      std::vector<std::string> names;
      take(s, "types", names, "attacks.");
      c.attacks.clear();
      try {
        for (const auto& n : names) c.attacks.push_back(parse_attack(n));
      } catch (const Error& e) {
        throw ConfigError(std::string("config field 'attacks.types': ") + e.what());
      }
    }
    take(s, "coalitions", c.coalitions, "attacks.");
    take(s, "c", c.c, "attacks.");
  }
  if (j.contains("threshold")) {
    const auto& s = j["threshold"];
    reject_unknown(s, {"mode", "T", "calibration_coalitions"}, "threshold.");
    if (s.contains("mode")) {
      std::string mode;
      take(s, "mode", mode, "threshold.");
      if (mode == "fixed") {
        c.threshold_mode = ThresholdMode::Fixed;
      } else if (mode == "auto") {
        c.threshold_mode = ThresholdMode::Auto;
      } else {
        throw ConfigError("config field 'threshold.mode' must be fixed or auto");
      }
    }
    take(s, "T", c.threshold, "threshold.");
    take(s, "calibration_coalitions", c.calibration_coalitions, "threshold.");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["version"] = 1;
  j["profile"] = profile;
  j["content_id"] = content_id;
  j["seed"] = seed;
  j["code"] = {{"M", M}, {"c0", c0}, {"epsilon", epsilon}, {"l0", l0},
               {"bias", bias}, {"cutoff", cutoff}, {"per_position", per_position_codebooks}};
  j["layout"] = {{"n_s", n_s}, {"m", m}};
  j["population"] = {{"K", K},
                     {"min_parents", min_parents},
                     {"max_parents", max_parents},
                     {"proxies", proxies},
                     {"proxy_pool", proxy_pool},
                     {"relays_per_hop", relays_per_hop},
                     {"purge_delay", purge_delay}};
  j["backend"] = to_string(backend);
  std::vector<std::string> names;
  for (auto a : attacks) names.push_back(to_string(a));
  j["attacks"] = {{"types", names}, {"coalitions", coalitions}, {"c", c}};
  j["threshold"] = {{"mode", threshold_mode == ThresholdMode::Fixed ? "fixed" : "auto"},
                    {"T", threshold},
                    {"calibration_coalitions", calibration_coalitions}};
  j["threads"] = threads;
  j["output"] = output.string();
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config field '" + field + "': " + why);
  };
  if (M < 2) fail("code.M", "at least two seed buyers are needed");
  if (c0 < 2) fail("code.c0", "must be at least 2");
  if (M <= c0) fail("code.M", "must exceed c0 (" + std::to_string(c0) + ") for tracing");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("code.epsilon", "must lie in (0, 1)");
  if (l0 < 1) fail("code.l0", "must be positive");
  if (bias != "arcsine" && bias != "nuida") fail("code.bias", "must be arcsine or nuida");
  if (!(cutoff >= 0.0 && cutoff < 0.5)) fail("code.cutoff", "must lie in [0, 0.5)");
  if (n_s < 2) fail("layout.n_s", "must be at least 2");
  if (proxies < 2) fail("population.proxies", "at least two proxies are required");
  if (proxies > n_s) fail("population.proxies", "more proxies than segments");
  if (m != 0) {
    if (n_s < m) fail("layout.m", "n_s (" + std::to_string(n_s) + ") is smaller than m (" + std::to_string(m) + ")");
    if (n_s / m != n_s / (n_s / proxies)) {
      fail("layout.m", "m = " + std::to_string(m) + " gives " + std::to_string(n_s / m) + " segment sets but " +
                           std::to_string(proxies) + " proxies are configured");
    }
  }
  if (K < 1 || K > 24) fail("population.K", "must lie in [1, 24]");
  if (min_parents < 2) fail("population.min_parents", "must be at least 2");
  if (max_parents < min_parents) fail("population.max_parents", "below min_parents");
  if (proxy_pool < n_s / (n_s / proxies)) fail("population.proxy_pool", "smaller than the number of segment sets");
  if (relays_per_hop < 1 || relays_per_hop > proxy_pool) fail("population.relays_per_hop", "out of range");
  if (c < 2) fail("attacks.c", "coalitions need at least two members");
  if (!(threshold > 0.0)) fail("threshold.T", "must be positive");
  if (threshold_mode == ThresholdMode::Auto && calibration_coalitions < 1) {
    fail("threshold.calibration_coalitions", "must be positive in auto mode");
  }
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  if (M < 2 * c0) out.push_back("M < 2*c0: colluder/innocent separation is not expected");
  if (c > c0) out.push_back("coalition size exceeds c0: runs are outside the code's guarantee");
  if (n_s % effective_m() != 0) {
    out.push_back("last segment set absorbs " + std::to_string(n_s % effective_m()) + " extra segments");
  }
  return out;
}

CodeParameters ExperimentConfig::code_parameters() const {
  CodeParameters p;
  p.c0 = c0;
  p.epsilon = epsilon;
  p.num_codewords = M;
  p.codeword_length = l0;
  if (bias == "nuida") {
    const char* env = std::getenv("RFP_DATA_DIR");
    p.bias = load_discrete_bias(std::filesystem::path(env != nullptr ? env : RFP_DATA_DIR) / "nuida_bias.txt", c0);
  } else {
    p.bias = ClippedArcsine{cutoff > 0.0 ? cutoff : CodeParameters::default_cutoff(c0)};
  }
  p.validate();
  return p;
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig s;
  s.proxies_per_purchase = proxies;
  s.proxy_pool = proxy_pool;
  s.relays_per_hop = relays_per_hop;
  s.min_parents = min_parents;
  s.max_parents = max_parents;
  s.purge_delay = purge_delay;
  s.record_observations = false;
  s.seed = derive_seed(seed, "simulation");
  return s;
}

Simulation make_simulation(const ExperimentConfig& config) {
  config.validate();
  auto code = generate_full_code(config.code_parameters(), config.n_s, derive_seed(config.seed, "code"),
                                 config.per_position_codebooks);
  auto [keys, sigma] = generate_keys(code.total_bits(), config.backend, derive_seed(config.seed, "keys"),
                                     config.content_id);
  Simulation sim(config.sim_config(), std::move(code), std::move(keys), std::move(sigma));
  sim.bootstrap(config.content_id, config.M);
  return sim;
}

CoalitionRun make_coalition_run(const Simulation& sim, const ExperimentConfig& config, AttackKind attack,
                                std::size_t run, std::string_view purpose) {
  const std::string tag = std::string(purpose) + "-" + to_string(attack);
  Rng rng(derive_seed(config.seed, tag, run));
  CoalitionRun out;
  out.run = run;
  out.attack = attack;
  auto members = sample_members(sim.seed_count(), sim.buyers().size(), config.c, rng);
  std::sort(members.begin(), members.end());
  std::vector<BitVector> fps;
  for (auto m : members) fps.push_back(sim.buyer(m).fingerprint.bits());
  const Coalition coalition(members, std::move(fps));
  const Seed tie_seed = derive_seed(config.seed, tag + "-ties", run);
  auto result = apply_attack(attack, coalition, tie_seed);

  out.trace.kind = attack;
  out.trace.members = members;
  out.trace.tie_seed = tie_seed;
  out.trace.ties = std::move(result.ties);
  out.trace.c0 = config.c0;
  out.trace.out_of_warranty = config.c > config.c0;
  out.trace.colluded = bits_digest_hex(result.colluded);
  out.marking_ok = verify_marking_assumption(result.colluded, coalition).ok;
  out.colluded = std::move(result.colluded);
  return out;
}

void trace_run(CoalitionRun& run, const Simulation& sim, double threshold, unsigned threads) {
  const auto& db = sim.database();
  run.exact = trace_exact(run.colluded, sim.keys(), sim.sigma(), db);
  if (run.exact) {
    run.report = ScoreReport{};
    run.report.threshold = threshold;
  } else {
    TraceOptions opts;
    opts.threads = threads;
    run.report = trace_colluders(run.colluded, db, sim.keys(), sim.sigma(), sim.code().concatenated_bias(),
                                 threshold, opts);
  }

  std::set<std::size_t> colluder_registers;
  for (auto m : run.trace.members) {
    if (auto idx = db.find(*sim.buyer(m).pseudonym)) colluder_registers.insert(*idx);
  }
  run.true_positives = run.false_positives = run.false_negatives = 0;
  run.colluder_min = run.colluder_max = run.innocent_min = run.innocent_max = std::nullopt;
  if (run.exact) {
    const auto idx = *db.find(*run.exact);
    (colluder_registers.contains(idx) ? run.true_positives : run.false_positives) = 1;
    run.false_negatives = colluder_registers.size() - run.true_positives;
    return;
  }
  for (const auto& s : run.report.scores) {
    const bool colluder = colluder_registers.contains(s.register_index);
    if (colluder) {
      widen(run.colluder_min, run.colluder_max, s.score);
      (s.accused ? run.true_positives : run.false_negatives) += 1;
    } else {
      widen(run.innocent_min, run.innocent_max, s.score);
      if (s.accused) ++run.false_positives;
    }
  }
}

double estimate_colluder_score(const Simulation& sim, const ExperimentConfig& config, std::size_t coalitions) {
  if (coalitions == 0 || config.attacks.empty()) throw ParameterError("calibration needs at least one coalition");
  const std::size_t per = coalitions;
  const std::size_t total = per * config.attacks.size();
  std::vector<double> sums(total, 0.0);
  std::vector<std::size_t> counts(total, 0);
  detail::parallel_for(total, config.threads, [&](std::size_t i) {
    auto run = make_coalition_run(sim, config, config.attacks[i / per], i % per, "calibration");
    trace_run(run, sim, 1.0, 1);
    for (const auto& s : run.report.scores) {
      for (auto m : run.trace.members) {
        if (sim.buyer(m).pseudonym == s.pseudonym) {
          sums[i] += s.score;
          ++counts[i];
        }
      }
    }
  });
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < total; ++i) {
    sum += sums[i];
    n += counts[i];
  }
  if (n == 0) throw StateError("calibration produced no colluder scores");
  return sum / static_cast<double>(n);
}

std::vector<AttackSummary> summarize(const std::vector<CoalitionRun>& runs, const std::vector<AttackKind>& attacks) {
  std::vector<AttackSummary> out;
  for (auto a : attacks) {
    AttackSummary s;
    s.attack = a;
    for (const auto& r : runs) {
      if (r.attack != a) continue;
      ++s.runs;
      if (r.exact_accusation()) ++s.exact_runs;
      if (r.false_positives > 0) ++s.runs_with_false;
      s.colluders_total += r.trace.members.size();
      s.colluders_detected += r.true_positives;
      merge(s.colluder_min, s.colluder_max, r.colluder_min, r.colluder_max);
      merge(s.innocent_min, s.innocent_max, r.innocent_min, r.innocent_max);
    }
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const Simulation& sim, const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.population = sim.buyers().size();
  result.registers = sim.database().size();
  const auto decrypts_before = sim.keys().decrypt_count();
  result.threshold = config.threshold;
  if (config.threshold_mode == ThresholdMode::Auto && config.coalitions > 0) {
    result.calibrated_ta = estimate_colluder_score(sim, config, config.calibration_coalitions);
    result.threshold = calibrate_threshold(*result.calibrated_ta);
  }
  const std::size_t per = config.coalitions;
  const std::size_t total = per * config.attacks.size();
  result.runs.resize(total);
  detail::parallel_for(total, config.threads, [&](std::size_t i) {
    auto run = make_coalition_run(sim, config, config.attacks[i / per], i % per);
    trace_run(run, sim, result.threshold, 1);
    result.runs[i] = std::move(run);
  });
  result.summaries = summarize(result.runs, config.attacks);
  result.decrypts_during_tracing = sim.keys().decrypt_count() - decrypts_before;
  return result;
}

std::string runs_csv(const ExperimentResult& result) {
  std::string out =
      "run,attack,c,members,ties,marking_ok,exact_hit,threshold,accused,true_positives,false_positives,"
      "false_negatives,colluder_min,colluder_max,innocent_min,innocent_max\n";
  for (const auto& r : result.runs) {
    std::string members;
    for (auto m : r.trace.members) members += (members.empty() ? "" : ";") + std::to_string(m);
    const auto accused = r.exact ? std::size_t{1} : r.report.accused.size();
    out += std::to_string(r.run) + "," + to_string(r.attack) + "," + std::to_string(r.trace.members.size()) + "," +
           members + "," + std::to_string(r.trace.ties.size()) + "," + (r.marking_ok ? "1" : "0") + "," +
           (r.exact ? "1" : "0") + "," + format_score(r.report.threshold) + "," + std::to_string(accused) + "," +
           std::to_string(r.true_positives) + "," + std::to_string(r.false_positives) + "," +
           std::to_string(r.false_negatives) + "," + opt_score(r.colluder_min) + "," + opt_score(r.colluder_max) +
           "," + opt_score(r.innocent_min) + "," + opt_score(r.innocent_max) + "\n";
  }
  return out;
}

std::string summary_csv(const ExperimentResult& result, const ExperimentConfig& config) {
  std::string out =
      "attack,runs,c,threshold,exact_rate,detection_rate,false_accusation_rate,colluder_min,colluder_max,"
      "innocent_min,innocent_max,out_of_warranty\n";
  for (const auto& s : result.summaries) {
    out += to_string(s.attack) + "," + std::to_string(s.runs) + "," + std::to_string(config.c) + "," +
           format_score(result.threshold) + "," + rate(s.exact_runs, s.runs) + "," +
           rate(s.colluders_detected, s.colluders_total) + "," + rate(s.runs_with_false, s.runs) + "," +
           opt_score(s.colluder_min) + "," + opt_score(s.colluder_max) + "," + opt_score(s.innocent_min) + "," +
           opt_score(s.innocent_max) + "," + (config.c > config.c0 ? "1" : "0") + "\n";
  }
  return out;
}

std::string figure_scores_csv(const ExperimentResult& result, const Simulation& sim) {
  std::string out = "attack,buyer_index,pseudonym,score,colluder,accused\n";
  std::set<AttackKind> done;
  for (const auto& r : result.runs) {
    if (!done.insert(r.attack).second) continue;
    std::set<Pseudonym> colluders;
    for (auto m : r.trace.members) colluders.insert(*sim.buyer(m).pseudonym);
    for (const auto& s : r.report.scores) {
      out += to_string(r.attack) + "," + std::to_string(s.register_index) + "," + s.pseudonym.hex() + "," +
             format_score(s.score) + "," + (colluders.contains(s.pseudonym) ? "1" : "0") + "," +
             (s.accused ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace rfp
