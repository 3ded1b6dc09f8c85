// Serial reference vs OpenMP execution of the Monte Carlo replication loop.

#include <benchmark/benchmark.h>

#include "propcov/montecarlo.hpp"

using namespace propcov;
using namespace propcov::montecarlo;

namespace {

SimConfig make_config(Execution execution, int p) {
  Matrix sigma = Matrix::identity(static_cast<std::size_t>(p));
  for (int i = 1; i < p; ++i) sigma(i, i - 1) = sigma(i - 1, i) = 0.3;
  SimConfig cfg{CovParam{Coefficients({1.0, 1.5, 0.7}), SymMatrix(sigma)}, {500, 500, 500}};
  cfg.replications = 400;
  cfg.seed = 42;
  cfg.execution = execution;
  return cfg;
}

void BM_CovarianceStudy(benchmark::State& state, Execution execution) {
  const SimConfig cfg = make_config(execution, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const CovarianceStudy s = run_covariance_study(cfg);
    benchmark::DoNotOptimize(s.max_relative_error);
  }
  state.SetItemsProcessed(state.iterations() * cfg.replications);
}

void BM_LevelStudy(benchmark::State& state, Execution execution) {
  SimConfig cfg = make_config(execution, static_cast<int>(state.range(0)));
  cfg.truth = CovParam{Coefficients::ones(3), cfg.truth.Sigma1};
  for (auto _ : state) {
    const LevelStudy s = run_level_study(cfg);
    benchmark::DoNotOptimize(s.rejection_rate);
  }
  state.SetItemsProcessed(state.iterations() * cfg.replications);
}

}  // namespace

BENCHMARK_CAPTURE(BM_CovarianceStudy, serial, Execution::Serial)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_CovarianceStudy, openmp, Execution::Parallel)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_LevelStudy, serial, Execution::Serial)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LevelStudy, openmp, Execution::Parallel)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
