#include <benchmark/benchmark.h>

#include "specflow/disc.hpp"
#include "specflow/flow.hpp"
#include "specflow/herm.hpp"
#include "specflow/jost.hpp"
#include "specflow/scenario.hpp"

using namespace specflow;

namespace {

path::OperatorPath battery_path(int d) { return cli::generate_random_scenario(3, d, d > 1 ? 1 : 0).build_path(); }

void BM_JacobiEig(benchmark::State& state) {
  const auto m = herm::random_hermitian(state.range(0), 17);
  for (auto _ : state) benchmark::DoNotOptimize(herm::eig(m));
}
BENCHMARK(BM_JacobiEig)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_SolveJost(benchmark::State& state) {
  const path::OperatorPath p = battery_path(static_cast<int>(state.range(0)));
  const jost::GridSpec g = jost::GridSpec::with_step(16.0, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(jost::solve_jost(p, -1.0, g));
}
BENCHMARK(BM_SolveJost)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ResolventTraceDiff(benchmark::State& state) {
  const path::OperatorPath p = battery_path(static_cast<int>(state.range(0)));
  const disc::DiscretizedPair d = disc::build_discretized(p, jost::GridSpec(16.0, 2801));
  for (auto _ : state) benchmark::DoNotOptimize(disc::resolvent_trace_diff(d, -1.0));
}
BENCHMARK(BM_ResolventTraceDiff)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_KernelDims(benchmark::State& state) {
  const path::OperatorPath p = battery_path(static_cast<int>(state.range(0)));
  const disc::DiscretizedPair d = disc::build_discretized(p, jost::GridSpec(16.0, 2801));
  const double a = path::gap_bound(p);
  for (auto _ : state) benchmark::DoNotOptimize(disc::kernel_dims(d, a / 10.0));
}
BENCHMARK(BM_KernelDims)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SpectralFlow(benchmark::State& state) {
  const path::OperatorPath p = battery_path(static_cast<int>(state.range(0)));
  const std::vector<double> grid = flow::default_flow_grid(p);
  for (auto _ : state) benchmark::DoNotOptimize(flow::spectral_flow(p, 0.0, grid));
}
BENCHMARK(BM_SpectralFlow)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
