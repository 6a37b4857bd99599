#include <benchmark/benchmark.h>

#include "jdqml/simulate.hpp"

using namespace jdqml;

namespace {

const ParamVector kTheta = ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25);

void BM_SimulateLevyOuExact(benchmark::State& state) {
  PathConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.h = std::pow(static_cast<double>(cfg.n), -2.0 / 3.0);
  cfg.seed = 1;
  for (auto _ : state) {
    Path path = simulate_levy_ou(kTheta, cfg);
    benchmark::DoNotOptimize(path.values.data());
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateLevyOuExact)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_SimulateGenericEuler(benchmark::State& state) {
  const ModelSpec model = levy_ou_model();
  PathConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.h = 0.01;
  cfg.substeps = 10;
  cfg.seed = 1;
  for (auto _ : state) {
    Path path = simulate_generic(model, kTheta, cfg);
    benchmark::DoNotOptimize(path.values.data());
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.substeps);
}
BENCHMARK(BM_SimulateGenericEuler)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
