#include <benchmark/benchmark.h>

#include "jdqml/estimate.hpp"
#include "jdqml/simulate.hpp"

using namespace jdqml;

namespace {

void BM_AdaptiveClosedForm(benchmark::State& state) {
  PathConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.h = std::pow(static_cast<double>(cfg.n), -2.0 / 3.0);
  cfg.seed = 3;
  const Path path = simulate_levy_ou(ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25), cfg);

  EstimationConfig est;
  est.thresholds.th1 = {1.0, 0.285};
  est.thresholds.th2 = {1.0, 0.26};
  est.thresholds.th3 = {1.0, 0.255};
  est.with_loglik = false;
  for (auto _ : state) {
    EstimateResult result = estimate_adaptive_levy_ou(path, est);
    benchmark::DoNotOptimize(result.theta.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AdaptiveClosedForm)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
