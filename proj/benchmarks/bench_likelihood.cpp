#include <benchmark/benchmark.h>

#include "jdqml/likelihood.hpp"
#include "jdqml/simulate.hpp"

using namespace jdqml;

namespace {

Path bench_path(std::size_t n) {
  PathConfig cfg;
  cfg.n = n;
  cfg.h = std::pow(static_cast<double>(n), -2.0 / 3.0);
  cfg.seed = 7;
  return simulate_levy_ou(ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25), cfg);
}

void BM_Classify(benchmark::State& state) {
  const Path path = bench_path(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto cls = classify(path, {1.0, 0.26});
    benchmark::DoNotOptimize(cls.n_small);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Classify)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_QllJoint(benchmark::State& state) {
  const Path path = bench_path(static_cast<std::size_t>(state.range(0)));
  const ModelSpec model = levy_ou_model();
  QllContext ctx(model, path);
  const auto theta = ParamVector::levy_ou(2.0, 2.5, 6.0, 0.0, 20.25);
  const Threshold th{1.0, 0.26};
  (void)ctx.classification(th);  // classification cached outside the loop
  for (auto _ : state) {
    benchmark::DoNotOptimize(qll_joint(ctx, theta, th, th));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QllJoint)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
