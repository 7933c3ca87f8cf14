#include <benchmark/benchmark.h>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/estimation.hpp"
#include "skilldyn/performance.hpp"
#include "skilldyn/separatrix.hpp"
#include "skilldyn/simulate.hpp"

using namespace skilldyn;

static void BM_Drift(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  PhaseState s{0.4, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_drift(m, s));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Drift);

static void BM_IntegrateOde(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(integrate_ode(m, {0.4, 0.3}, 10.0, 1e-3));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_IntegrateOde)->Unit(benchmark::kMillisecond);

static void BM_SimulateDiscrete(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  const auto cfg = DiscreteSimConfig::for_horizon(1e-3, 5.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_discrete(m, {0.4, 0.3}, cfg));
}
BENCHMARK(BM_SimulateDiscrete)->Unit(benchmark::kMillisecond);

static void BM_Separatrix(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_separatrix(m, n));
}
BENCHMARK(BM_Separatrix)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_CrossingTime(benchmark::State& state) {
  const auto m = ModelParams::simplified(0.78, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(crossing_time(m, {0.4, 0.3}, 1e4));
}
BENCHMARK(BM_CrossingTime)->Unit(benchmark::kMillisecond);

static void BM_SdeBasinCell(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  for (auto _ : state)
    benchmark::DoNotOptimize(basin_grid(m, {0.5}, {0.4}, SdeMethod{0.1, 50, 3}, 1));
}
BENCHMARK(BM_SdeBasinCell)->Unit(benchmark::kMillisecond);

static void BM_EstimateAll(benchmark::State& state) {
  const auto m = ModelParams::defaults();
  const auto traj = simulate_discrete(m, {0.3, 0.4}, {0.01, 2000, 1});
  const auto log = sessions_from_trajectory(m, traj);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_all(log));
}
BENCHMARK(BM_EstimateAll);
BENCHMARK_MAIN();
