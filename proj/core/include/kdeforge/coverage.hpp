#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kdeforge/inference.hpp"
#include "kdeforge/kernels.hpp"
#include "kdeforge/sample.hpp"

namespace kdeforge {

/// Simulation truth: N(μ, σ²) or the two-component mixture
/// w N(μ1, σ1²) + (1 − w) N(μ2, σ2²).
struct Truth {
  enum class Kind { Normal, NormalMixture };
  Kind kind = Kind::Normal;
  double weight = 1.0;
  double mean1 = 0.0, mean2 = 0.0;
  double sd1 = 1.0, sd2 = 1.0;

  static Truth normal(double mean = 0.0, double sd = 1.0);
  static Truth mixture(double weight, double mean1, double mean2, double sd1, double sd2);

  double density(double x) const;
  /// E p̂(x) for the gaussian kernel: each component convolved with N(0, h²).
  double smoothed_density(double x, double h) const;
  double cdf(double x) const;
  double mean() const;
  double sd() const;
  /// [mean − 3 sd, mean + 3 sd].
  std::pair<double, double> central_region() const;

  Sample draw(std::size_t n, std::mt19937_64& rng) const;
  std::string describe() const;
};

/// "normal", "normal:mu,sigma" or "mixture:w,mu1,mu2,sigma1,sigma2".
Truth parse_truth(std::string_view text);

struct CoverageConfig {
  Truth truth;
  std::size_t n = 1000;
  IntervalMethod method = IntervalMethod::BootstrapBand;
  /// Defaults to the method's own target (p for the debiased band, p_h otherwise).
  std::optional<InferenceTarget> target;
  double alpha = 0.05;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::size_t replicates = 1000;
  std::size_t grid = 256;
  /// Evaluate at this single point instead of the central grid.
  std::optional<double> point;
  /// Fixed bandwidth; rule_of_thumb of each simulated sample when absent.
  std::optional<double> bandwidth;
  KernelFamily kernel = KernelFamily::Gaussian;

  InferenceTarget resolved_target() const;
  void validate() const;
};

struct TrialOutcome {
  bool covered = false;
  double mean_width = 0.0;
  double bandwidth = 0.0;
};

/// One trial. The data come from stream (seed, trial, 0) and the bootstrap
/// from stream (seed, trial, 1), so two configs that differ only in method
/// see the same samples and the same resampling seeds.
TrialOutcome run_coverage_trial(const CoverageConfig& config, std::size_t trial);

struct CoverageReport {
  IntervalMethod method;
  InferenceTarget target;
  double nominal = 0.95;
  std::size_t trials = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
  double mean_width = 0.0;
  double runtime_seconds = 0.0;
  double region_lo = 0.0;
  double region_hi = 0.0;
  std::vector<TrialOutcome> outcomes;
};

CoverageReport simulate_coverage(const CoverageConfig& config);

}  // namespace kdeforge
