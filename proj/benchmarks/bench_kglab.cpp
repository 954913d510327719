#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "kglab/covariance.hpp"
#include "kglab/model.hpp"
#include "kglab/reduction.hpp"
#include "kglab/sampler.hpp"

using namespace kglab;

namespace {

void BM_CovCritical(benchmark::State& state) {
  const SpaceTimePoint p{1.3, 0.4}, q{0.9, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(cov_critical(p, q, 1.0));
}
BENCHMARK(BM_CovCritical);

void BM_CovSpectral(benchmark::State& state) {
  const ModelParams params(1.0, 0.8, 3.0);
  const SpaceTimePoint p{1.3, 0.4}, q{0.9, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(cov_spectral(p, q, params, 1e-8));
}
BENCHMARK(BM_CovSpectral);

void BM_RectIncrementMoment(benchmark::State& state) {
  const ModelParams params(1.0, 0.5, 4.0);
  const double eps = std::ldexp(1.0, -int(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(rect_increment_moment(1.0, 0.2, eps, eps, params));
}
BENCHMARK(BM_RectIncrementMoment)->Arg(4)->Arg(8);

void BM_DesignSample(benchmark::State& state) {
  const ModelParams params(1.0, 0.5, 4.0);
  std::vector<SpaceTimePoint> pts;
  for (int i = 0; i < state.range(0); ++i)
    pts.push_back({1.0 + 0.01 * double(i), 0.3 - 0.005 * double(i)});
  const GaussianDesign design(pts, params);
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(design.sample({77, r++}));
}
BENCHMARK(BM_DesignSample)->Arg(8)->Arg(64)->Arg(256);

void BM_NoiseGenerate(benchmark::State& state) {
  const double h = 1.0 / double(state.range(0));
  std::uint64_t r = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(NoiseGrid::generate(1.0, -2.0, 2.0, h, h, {11, r++}));
}
BENCHMARK(BM_NoiseGenerate)->Arg(64)->Arg(128)->Arg(256);

void BM_WalshValueAt(benchmark::State& state) {
  const double h = 1.0 / double(state.range(0));
  const NoiseGrid noise = NoiseGrid::generate(1.0, -2.0, 2.0, h, h, {13, 0});
  const WalshEvaluator eval(noise, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval.value_at(0.75, 0.125));
}
BENCHMARK(BM_WalshValueAt)->Arg(64)->Arg(256);

void BM_YPath(benchmark::State& state) {
  std::vector<double> zs;
  for (int i = 0; i <= state.range(0); ++i) zs.push_back(0.3 + 0.001 * double(i));
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_Y_path(zs, 1.0, 1.0, {17, r++}));
}
BENCHMARK(BM_YPath)->Arg(64)->Arg(1024);

void BM_StochasticConvolution(benchmark::State& state) {
  const double h = 1.0 / double(state.range(0));
  const NoiseGrid noise = NoiseGrid::generate(1.0, -2.0 - h, 2.0 + h, h, h, {19, 0});
  GridSpec grid;
  grid.step = h;
  grid.nt = std::size_t(state.range(0)) + 1;
  grid.nx = 2 * std::size_t(state.range(0)) + 1;
  grid.x0 = -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(stochastic_convolution(noise, 1.0, grid));
}
BENCHMARK(BM_StochasticConvolution)->Arg(32)->Arg(64)->Arg(128);

void BM_PicardSolve(benchmark::State& state) {
  const ModelParams params(2.0, 1.2, 1.0);
  const double h = 1.0 / double(state.range(0));
  const NoiseGrid noise = NoiseGrid::generate(1.0, -2.0 - h, 2.0 + h, h, h, {23, 0});
  GridSpec grid;
  grid.step = h;
  grid.nt = std::size_t(state.range(0)) + 1;
  grid.nx = 2 * std::size_t(state.range(0)) + 1;
  grid.x0 = -1.0;
  const GridField u_C = stochastic_convolution(noise, params.a, grid);
  for (auto _ : state) benchmark::DoNotOptimize(picard_solve(u_C, params, 1e-8, 50));
}
BENCHMARK(BM_PicardSolve)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
