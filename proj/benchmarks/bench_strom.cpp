#include <benchmark/benchmark.h>

#include <random>

#include "strom/strom.hpp"

namespace {

using namespace strom;

LinearDynamicalSystem advdiff(std::size_t n) {
  ProblemSpec spec;
  spec.kind = ProblemKind::advdiff2d;
  spec.nx = spec.ny = n;
  spec.vx = 1.0;
  spec.x0_amplitude = 1.0;
  return make_system(spec, {});
}

DenseMatrix orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  DenseMatrix g(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return thin_svd(g).W;
}

// Reduced space-time operators for a fixed basis; cost should grow linearly in N_t.
void BM_BuildStMatrix(benchmark::State& state) {
  const auto n_time = static_cast<std::size_t>(state.range(0));
  const LinearDynamicalSystem sys = advdiff(30);
  std::mt19937_64 rng(7);
  BasisSet b;
  b.n_s = 8;
  b.n_t = 3;
  b.n_time = n_time;
  b.n_mu = 3;
  b.Phi_s = orthonormal(sys.state_dim(), b.n_s, rng);
  for (std::size_t i = 0; i < b.n_s; ++i) b.temporal.push_back(orthonormal(n_time, b.n_t, rng));
  const TimeGrid grid = TimeGrid::uniform(1e-3, n_time);
  const SpatialRom srom = build_spatial_rom(sys, b, RefMode::zero);
  for (auto _ : state) benchmark::DoNotOptimize(build_space_time_rom(srom, b, grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildStMatrix)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN)->Unit(benchmark::kMicrosecond);

void BM_FomMarch(benchmark::State& state) {
  const LinearDynamicalSystem sys = advdiff(static_cast<std::size_t>(state.range(0)));
  const TimeGrid grid = TimeGrid::uniform(5e-3, 50);
  for (auto _ : state) benchmark::DoNotOptimize(fom_march(sys, grid));
  state.counters["N_s"] = static_cast<double>(sys.state_dim());
}
BENCHMARK(BM_FomMarch)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

// One column ingested into a factorisation that already holds rank r.
void BM_IsvdUpdate(benchmark::State& state) {
  const std::size_t n = 10000;
  const auto r = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  IsvdOptions opts;
  opts.max_rank = r + 1;
  opts.at_max_rank = MaxRankPolicy::reject;
  SvdState base = isvd_empty(n, opts);
  Vector col(n);
  for (std::size_t c = 0; c < r; ++c) {
    for (double& x : col) x = normal(rng);
    base = isvd_update(std::move(base), col);
  }
  for (double& x : col) x = normal(rng);
  for (auto _ : state) {
    state.PauseTiming();
    SvdState s = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(isvd_update(std::move(s), col));
  }
}
BENCHMARK(BM_IsvdUpdate)->Arg(5)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
