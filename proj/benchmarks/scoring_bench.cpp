#include <benchmark/benchmark.h>

#include "rfp/attacks.hpp"
#include "rfp/experiment.hpp"
#include "rfp/tracing.hpp"

namespace rfp {
namespace {

struct World {
  ExperimentConfig config;
  Simulation sim;
  BitVector colluded;

  static World& get() {
    static World w = [] {
      auto cfg = ExperimentConfig::for_profile("desk");
      cfg.K = 6;
      auto sim = make_simulation(cfg);
      sim.grow_population(cfg.K);
      auto run = make_coalition_run(sim, cfg, AttackKind::Average, 0);
      return World{cfg, std::move(sim), std::move(run.colluded)};
    }();
    return w;
  }
};

void BM_TraceColluders(benchmark::State& state) {
  auto& w = World::get();
  TraceOptions opts;
  opts.threads = 1;
  opts.literal = state.range(0) != 0;
  for (auto _ : state) {
    auto r = trace_colluders(w.colluded, w.sim.database(), w.sim.keys(), w.sim.sigma(),
                             w.sim.code().concatenated_bias(), kDefaultThreshold, opts);
    benchmark::DoNotOptimize(r.scores.data());
  }
  state.counters["registers"] = static_cast<double>(w.sim.database().size());
  state.SetLabel(opts.literal ? "literal" : "packed");
}
BENCHMARK(BM_TraceColluders)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CleartextScore(benchmark::State& state) {
  auto& w = World::get();
  const auto& tested = w.sim.buyer(w.sim.seed_count()).fingerprint.bits();
  const auto p = w.sim.code().concatenated_bias();
  for (auto _ : state) benchmark::DoNotOptimize(cleartext_score(w.colluded, tested, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tested.size()));
}
BENCHMARK(BM_CleartextScore);

void BM_Attack(benchmark::State& state) {
  auto& w = World::get();
  const auto kind = static_cast<AttackKind>(state.range(0));
  std::vector<std::size_t> members{20, 40, 60, 80};
  std::vector<BitVector> fps;
  for (auto m : members) fps.push_back(w.sim.buyer(m).fingerprint.bits());
  const Coalition c(members, fps);
  for (auto _ : state) benchmark::DoNotOptimize(apply_attack(kind, c, 7).colluded.words().data());
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Attack)->DenseRange(0, 2);

}  // namespace
}  // namespace rfp
