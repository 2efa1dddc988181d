#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kdeforge/sample.hpp"
#include "kdeforge/types.hpp"

namespace kdeforge {

/// Empirical-bootstrap configuration. Replicate r always draws from the
/// stream derived from (seed, r, stream), so results do not depend on the
/// order in which replicates are computed.
struct BootstrapPlan {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument if replicates < min_replicates.
  void validate(std::size_t min_replicates = 2) const;
};

/// Seed for replicate r of the given stream (splitmix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream = 0) noexcept;

std::mt19937_64 replicate_engine(const BootstrapPlan& plan, std::size_t replicate,
                                 std::uint64_t stream = 0);

/// n row indices drawn uniformly with replacement for replicate r.
std::vector<std::size_t> resample_indices(std::size_t n, const BootstrapPlan& plan,
                                          std::size_t replicate, std::uint64_t stream = 0);

/// Multiplicity of each row in resample_indices(n, plan, r, stream).
Eigen::VectorXd resample_counts(std::size_t n, const BootstrapPlan& plan, std::size_t replicate,
                                std::uint64_t stream = 0);

Sample resample(const Sample& sample, const BootstrapPlan& plan, std::size_t replicate,
                std::uint64_t stream = 0);

/// k = ⌈(1 − α) B⌉, the order statistic used for every bootstrap quantile.
/// Throws InvalidArgument when k falls outside [1, B].
std::size_t quantile_rank(std::size_t replicates, double alpha);

/// The k-th smallest deviation with k = quantile_rank(B, α).
double bootstrap_quantile(std::vector<double> deviations, double alpha);

/// Bootstrap replicates of an estimator that is linear in the empirical
/// measure: column r is design · counts_r / n, where design(g, i) is the
/// contribution of observation i at evaluation point g. Returns m × B.
Matrix bootstrap_curves(const Matrix& design, const BootstrapPlan& plan, std::uint64_t stream = 0);

}  // namespace kdeforge
