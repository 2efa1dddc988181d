#include "kdeforge/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kdeforge/error.hpp"
#include "parallel.hpp"

namespace kdeforge {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Replicates per GEMM block; bounds the n × block count matrix.
constexpr std::size_t kBlock = 128;

}  // namespace

void BootstrapPlan::validate(std::size_t min_replicates) const {
  if (replicates < min_replicates)
    throw InvalidArgument("bootstrap needs at least " + std::to_string(min_replicates) +
                          " replicates, got " + std::to_string(replicates));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ replicate);
}

std::mt19937_64 replicate_engine(const BootstrapPlan& plan, std::size_t replicate, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(plan.seed, replicate, stream));
}

std::vector<std::size_t> resample_indices(std::size_t n, const BootstrapPlan& plan,
                                          std::size_t replicate, std::uint64_t stream) {
  if (n == 0) throw InvalidArgument("cannot resample an empty sample");
  auto engine = replicate_engine(plan, replicate, stream);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(engine);
  return idx;
}

Eigen::VectorXd resample_counts(std::size_t n, const BootstrapPlan& plan, std::size_t replicate,
                                std::uint64_t stream) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i : resample_indices(n, plan, replicate, stream))
    counts[static_cast<Eigen::Index>(i)] += 1.0;
  return counts;
}

Sample resample(const Sample& sample, const BootstrapPlan& plan, std::size_t replicate,
                std::uint64_t stream) {
  const auto idx = resample_indices(sample.size(), plan, replicate, stream);
  PointMatrix out(static_cast<Eigen::Index>(idx.size()), sample.dim());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = sample.data().row(static_cast<Eigen::Index>(idx[r]));
  return Sample(std::move(out));
}

std::size_t quantile_rank(std::size_t replicates, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  // The small offset keeps exact products such as 0.95 × 1000 from rounding up.
  const double target = (1.0 - alpha) * static_cast<double>(replicates);
  const auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
  if (k < 1 || k > replicates)
    throw InvalidArgument("too few bootstrap replicates (" + std::to_string(replicates) +
                          ") for alpha = " + std::to_string(alpha));
  return k;
}

double bootstrap_quantile(std::vector<double> deviations, double alpha) {
  if (deviations.empty()) throw InvalidArgument("no bootstrap deviations");
  const std::size_t k = quantile_rank(deviations.size(), alpha);
  std::nth_element(deviations.begin(), deviations.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   deviations.end());
  return deviations[k - 1];
}

Matrix bootstrap_curves(const Matrix& design, const BootstrapPlan& plan, std::uint64_t stream) {
  plan.validate(1);
  const auto n = static_cast<std::size_t>(design.cols());
  const std::size_t b = plan.replicates;
  Matrix curves(design.rows(), static_cast<Eigen::Index>(b));
  const std::size_t blocks = (b + kBlock - 1) / kBlock;
  const double inv_n = 1.0 / static_cast<double>(n);
  detail::parallel_for(blocks, [&](std::size_t blk) {
    const std::size_t begin = blk * kBlock;
    const std::size_t width = std::min(kBlock, b - begin);
    Matrix counts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    for (std::size_t k = 0; k < width; ++k)
      counts.col(static_cast<Eigen::Index>(k)) = resample_counts(n, plan, begin + k, stream);
    curves.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(width)).noalias() =
        inv_n * (design * counts);
  });
  return curves;
}

}  // namespace kdeforge
