#include <benchmark/benchmark.h>

#include "rfp/experiment.hpp"
#include "rfp/fingerprint.hpp"

namespace rfp {
namespace {

void BM_Recombine(benchmark::State& state) {
  CodeParameters params;
  const auto code = generate_full_code(params, 74, 1);
  std::vector<Fingerprint> parents;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) parents.push_back(seed_fingerprint(code, i));
  Rng rng(2);
  for (auto _ : state) {
    const auto a = random_parent_assignment(parents.size(), 74, rng);
    benchmark::DoNotOptimize(recombine(parents, a).bits().words().data());
  }
}
BENCHMARK(BM_Recombine)->Arg(2)->Arg(4);

void BM_GrowPopulation(benchmark::State& state) {
  auto cfg = ExperimentConfig::for_profile("desk");
  cfg.K = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    auto sim = make_simulation(cfg);
    sim.grow_population(cfg.K);
    benchmark::DoNotOptimize(sim.database().size());
  }
  state.counters["buyers"] = static_cast<double>(cfg.population());
}
BENCHMARK(BM_GrowPopulation)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rfp
