#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kdeforge/bootstrap.hpp"
#include "kdeforge/estimator.hpp"
#include "kdeforge/types.hpp"

namespace kdeforge {

enum class IntervalMethod {
  Plugin,             ///< pointwise, asymptotic variance μ_K p̂ / (n h^d)
  BootstrapPlugin,    ///< pointwise, bootstrap standard deviation
  Bootstrap,          ///< pointwise, bootstrap quantile of |p̂* − p̂|
  EvtPlugin,          ///< band, extreme-value limit
  BootstrapBand,      ///< band, bootstrap quantile of sup |p̂* − p̂|
  DebiasedBootstrapBand,
  RocBootstrapBand,
};

/// What the interval claims to cover: the smoothed density p_h = E p̂, or p.
enum class InferenceTarget { Smoothed, True };

std::string_view to_string(IntervalMethod method) noexcept;
std::string_view to_string(InferenceTarget target) noexcept;

struct IntervalResult {
  PointMatrix points;  ///< evaluation points, one per row
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  double alpha = 0.05;
  IntervalMethod method = IntervalMethod::Plugin;
  InferenceTarget target = InferenceTarget::Smoothed;
  std::vector<bool> degenerate;  ///< zero-width because the estimate is 0
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return center.size(); }
};

struct BandResult : IntervalResult {
  /// Constant half-width c for bootstrap bands; for the extreme-value band
  /// the multiplier d_n + E/√(−2 log h) (widths then vary with p̂).
  double critical_value = 0.0;
  bool constant_width = true;
  /// max(center, 0): the debiased center can dip below zero.
  std::vector<double> display_center;
};

/// Standard normal quantile.
double normal_quantile(double p);

/// z_{1−α/2} √(μ_K p̂ / (n h^d)).
double plugin_half_width(double density, const KernelSpec& kernel, std::size_t n, double h,
                         double alpha);

IntervalResult ci_plugin(const DensityModel& model, const PointMatrix& grid, double alpha);

/// Unbiased sample standard deviation.
double bootstrap_sd(std::span<const double> values);

/// p̂ ± z_{1−α/2} σ̂_BT, σ̂_BT the bootstrap standard deviation.
IntervalResult ci_bootstrap_plugin(const DensityModel& model, const PointMatrix& grid, double alpha,
                                   const BootstrapPlan& plan);

/// p̂ ± c(x), c(x) the ⌈(1−α)B⌉-th smallest |p̂*_j(x) − p̂(x)|. Needs B ≥ 20.
IntervalResult ci_bootstrap(const DensityModel& model, const PointMatrix& grid, double alpha,
                            const BootstrapPlan& plan);

enum class EvtQuantile {
  /// −log(−log(1−α)/2): the (1−α) quantile of the limit CDF exp(−2e^{−t}).
  LimitDistribution,
  /// −log(−log(α)/2), the expression as commonly printed.
  AsPrinted,
};

double evt_quantile(double alpha, EvtQuantile convention = EvtQuantile::LimitDistribution);

struct EvtOptions {
  /// Added to the leading-order d_n = √(−2 log h).
  double dn_correction = 0.0;
  EvtQuantile quantile = EvtQuantile::LimitDistribution;
};

/// Extreme-value plug-in band, half-width √(p̂ μ_K / (n h)) (d_n + E/√(−2 log h)).
/// d = 1, gaussian kernel, h < 1. Convergence to the limit is slow; the
/// result always carries a "slow-convergence" warning.
BandResult band_plugin_evt(const DensityModel& model, const PointMatrix& grid, double alpha,
                           const EvtOptions& options = {});

/// Constant-width band from precomputed replicates (m × B): deviations are
/// sup_g |replicates(g, j) − center(g)|.
BandResult band_from_replicates(const PointMatrix& points, std::span<const double> center,
                                const Matrix& replicates, double alpha, IntervalMethod method,
                                InferenceTarget target);

BandResult band_bootstrap(const DensityModel& model, const PointMatrix& grid, double alpha,
                          const BootstrapPlan& plan);

/// p̂(x) − (h²/2) σ_K² ∇²p̂(x).
double debiased_value(double density, double laplacian, double h, double sigma_k2) noexcept;

/// Bias-corrected KDE p̃ = p̂ − (h²/2) σ_K² ∇²p̂, same bandwidth for both
/// terms. Values may be negative; they are never clipped here.
class DebiasedDensity {
 public:
  explicit DebiasedDensity(const DensityModel& model);

  double value_at(const PointRef& x) const;
  double display_value_at(const PointRef& x) const;
  const DensityModel& model() const noexcept { return model_; }

 private:
  DensityModel model_;
};

/// Throws Unsupported for the spherical kernel.
DebiasedDensity debias(const DensityModel& model);

/// design(g, i) = K((x_g − X_i)/h) / h^d, so p̂ = design · 1 / n.
Matrix kde_design(const DensityModel& model, const PointMatrix& grid);

/// Same for the debiased estimator: the effective kernel is
/// K(u) − (σ_K²/2) ΔK(u) = K(u) (1 − (σ_K²/2)(‖u‖² − d)).
Matrix debiased_design(const DensityModel& model, const PointMatrix& grid);

/// Bootstrap band around the debiased KDE; targets p itself.
BandResult band_debiased_bootstrap(const Sample& sample, const KernelSpec& kernel, double h,
                                   const PointMatrix& grid, double alpha, const BootstrapPlan& plan);

}  // namespace kdeforge
