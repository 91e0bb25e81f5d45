#include <benchmark/benchmark.h>

#include <cstdint>

#include "replica_grid/asymptotics.hpp"
#include "replica_grid/delivery_sim.hpp"
#include "replica_grid/density_solver.hpp"
#include "replica_grid/placement.hpp"

namespace rg = replica_grid;

namespace {

// Arg: nu. M = N, K = 2, tau = 1.
void BM_SolveCd(benchmark::State& state) {
  const std::int64_t n = std::int64_t{1} << (2 * state.range(0));
  const auto pop = rg::Popularity::zipf(static_cast<std::size_t>(n), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rg::solve_cd(n, 2.0, pop));
}
BENCHMARK(BM_SolveCd)->DenseRange(4, 10, 2)->Unit(benchmark::kMicrosecond);

void BM_CanonicalPlace(benchmark::State& state) {
  const rg::GridSpec grid(static_cast<int>(state.range(0)));
  const auto n = grid.node_count();
  const auto pop = rg::Popularity::zipf(static_cast<std::size_t>(n), 1.0);
  const auto canon = rg::canonical_truncate(rg::solve_cd(n, 2.0, pop));
  for (auto _ : state) benchmark::DoNotOptimize(rg::canonical_place(grid, canon, pop, 2));
}
BENCHMARK(BM_CanonicalPlace)->DenseRange(3, 7, 2)->Unit(benchmark::kMicrosecond);

// Args: nu, method (0 tiled, 1 direct).
void BM_LinkLoads(benchmark::State& state) {
  const rg::GridSpec grid(static_cast<int>(state.range(0)));
  const auto n = grid.node_count();
  const auto pop = rg::Popularity::zipf(static_cast<std::size_t>(n), 1.0);
  const auto placed = rg::canonical_place(grid, rg::canonical_truncate(rg::solve_cd(n, 2.0, pop)), pop, 2);
  rg::LoadOptions opt;
  opt.method = state.range(1) == 0 ? rg::LoadMethod::kTiled : rg::LoadMethod::kDirect;
  for (auto _ : state) benchmark::DoNotOptimize(rg::link_loads(placed, pop, opt));
}
BENCHMARK(BM_LinkLoads)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  rg::SweepScenario s;
  s.tau = 1.25;
  s.capacity = 2.0;
  s.m_law = "floor(0.1*K*N)";
  s.nus = {5, 6, 7, 8, 9, 10};
  for (auto _ : state) benchmark::DoNotOptimize(rg::sweep(s));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
