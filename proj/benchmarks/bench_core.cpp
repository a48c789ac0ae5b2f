#include <benchmark/benchmark.h>

#include "stochinv/bessel.hpp"
#include "stochinv/correlation.hpp"
#include "stochinv/farfield.hpp"
#include "stochinv/reconstruction.hpp"
#include "stochinv/rng.hpp"
#include "stochinv/sampler.hpp"

using namespace stochinv;

namespace {

CheckedSource poly_source(int n) {
  const SpatialGrid grid(2, n);
  return validate_source(WaveModel::polyharmonic(2, 1), SourceSpec{2.0, 4, gaussian_bump_strength(grid, Vec3::Zero(), 0.15, 1.0)});
}

}  // namespace

static void BM_Hankel0(benchmark::State& state) {
  const cplx z(state.range(0) / 4.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(hankel0(z));
}
BENCHMARK(BM_Hankel0)->Arg(1)->Arg(20)->Arg(200);

static void BM_FourierAt(benchmark::State& state) {
  const auto src = poly_source(static_cast<int>(state.range(0)));
  const auto sigma = src.strength().scalar_values();
  const Vec3 w(11.0, -7.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(fourier_at(src.grid(), sigma, w));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_FourierAt)->RangeMultiplier(2)->Range(32, 256)->Complexity(benchmark::oN);

static void BM_SampleScalar(benchmark::State& state) {
  const auto src = poly_source(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_scalar(src, seed++));
}
BENCHMARK(BM_SampleScalar)->RangeMultiplier(2)->Range(32, 256);

static void BM_SampleLeray3D(benchmark::State& state) {
  const SpatialGrid grid(3, static_cast<int>(state.range(0)));
  const GaussianStrength g(3, {GaussianBump{Vec3::Zero(), 0.15, 1.0, RMat3::Identity()}}, true);
  const auto src = validate_source(WaveModel::electromagnetic(), SourceSpec{2.5, 4, g.rasterize(grid)});
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(leray_project(sample_vector(src, seed++)));
}
BENCHMARK(BM_SampleLeray3D)->Arg(16)->Arg(32);

// One Monte Carlo realization: sample, far fields on 64 directions, 64 antipodal products.
static void BM_MonteCarloRealization(benchmark::State& state) {
  const auto src = poly_source(64);
  const auto dirs = direction_set(2, 64);
  std::vector<CorrelationAccumulator> acc(dirs.size(), CorrelationAccumulator(false, 2));
  std::uint64_t r = 0;
  for (auto _ : state) {
    const auto u = poly_farfield(sample(src, derive_seed(7, r++)), 16.0, 1, dirs);
    for (std::size_t i = 0; i < dirs.size(); ++i) acc[i].add(u[i].value, u[(i + 32) % 64].value);
  }
}
BENCHMARK(BM_MonteCarloRealization);

static void BM_InverseCutoff(benchmark::State& state) {
  const SpatialGrid out(2, 64);
  const GaussianStrength g(2, {GaussianBump{Vec3::Zero(), 0.15, 1.0, RMat3::Identity()}}, false);
  auto coeffs = FourierCoefficientGrid::for_box(out, static_cast<double>(state.range(0)));
  coeffs.values.resize(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs.values[i] = g.transform(coeffs.gamma(i));
  for (auto _ : state) benchmark::DoNotOptimize(inverse_fourier_cutoff(coeffs, out));
}
BENCHMARK(BM_InverseCutoff)->Arg(16)->Arg(64);
BENCHMARK_MAIN();
