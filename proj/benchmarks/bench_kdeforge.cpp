#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/distfunc.hpp"
#include "kdeforge/estimator.hpp"
#include "kdeforge/geometry.hpp"
#include "kdeforge/inference.hpp"

using namespace kdeforge;

namespace {

Sample normal_sample(std::size_t n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  PointMatrix m(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (int c = 0; c < d; ++c) m(i, c) = z(rng);
  return Sample(m);
}

PointMatrix line_grid(double lo, double hi, std::size_t count) {
  const auto xs = linspace(lo, hi, count);
  PointMatrix g(static_cast<Eigen::Index>(count), 1);
  for (std::size_t i = 0; i < count; ++i) g(static_cast<Eigen::Index>(i), 0) = xs[i];
  return g;
}

void BM_GridExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = normal_sample(n, 2, 1);
  const DensityModel m(s, KernelSpec::gaussian(2), rule_of_thumb(s));
  const auto axes = make_axes(s, m.bandwidth(), 64);
  for (auto _ : state) benchmark::DoNotOptimize(m.evaluate_grid(axes, EvalPath::Exact));
  state.SetItemsProcessed(state.iterations() * 64 * 64);
}
BENCHMARK(BM_GridExact)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GridTruncated(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = normal_sample(n, 2, 1);
  const DensityModel m(s, KernelSpec::gaussian(2), rule_of_thumb(s));
  const auto axes = make_axes(s, m.bandwidth(), 64);
  for (auto _ : state) benchmark::DoNotOptimize(m.evaluate_grid(axes, EvalPath::Truncated));
  state.SetItemsProcessed(state.iterations() * 64 * 64);
}
BENCHMARK(BM_GridTruncated)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BootstrapBand(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = normal_sample(n, 1, 2);
  const DensityModel m(s, KernelSpec::gaussian(1), rule_of_thumb(s));
  const auto grid = line_grid(-3.0, 3.0, 256);
  for (auto _ : state) benchmark::DoNotOptimize(band_bootstrap(m, grid, 0.05, {1000, 7}));
}
BENCHMARK(BM_BootstrapBand)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DebiasedBand(benchmark::State& state) {
  const Sample s = normal_sample(2000, 1, 3);
  const double h = rule_of_thumb(s);
  const auto grid = line_grid(-3.0, 3.0, 256);
  for (auto _ : state)
    benchmark::DoNotOptimize(band_debiased_bootstrap(s, KernelSpec::gaussian(1), h, grid, 0.05, {1000, 7}));
}
BENCHMARK(BM_DebiasedBand)->Unit(benchmark::kMillisecond);

void BM_Lscv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = normal_sample(n, 1, 4);
  const auto candidates = default_lscv_candidates(s);
  for (auto _ : state) benchmark::DoNotOptimize(lscv(s, KernelSpec::gaussian(1), candidates));
}
BENCHMARK(BM_Lscv)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_FindModes(benchmark::State& state) {
  const Sample s = normal_sample(1000, 2, 5);
  const DensityModel m(s, KernelSpec::gaussian(2), rule_of_thumb(s));
  for (auto _ : state) benchmark::DoNotOptimize(find_modes(m));
}
BENCHMARK(BM_FindModes)->Unit(benchmark::kMillisecond);

void BM_RocBand(benchmark::State& state) {
  const Sample a = normal_sample(500, 1, 6);
  const Sample b = normal_sample(500, 1, 7);
  const auto t = roc_t_grid();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        roc_band(a, b, KernelSpec::gaussian(1), rule_of_thumb(a), rule_of_thumb(b), t, 0.05, {1000, 8}));
}
BENCHMARK(BM_RocBand)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
