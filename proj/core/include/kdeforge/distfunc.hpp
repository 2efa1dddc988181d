#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kdeforge/bootstrap.hpp"
#include "kdeforge/estimator.hpp"
#include "kdeforge/inference.hpp"

namespace kdeforge {

enum class CdfMethod {
  Analytic,    ///< closed-form integral of each kernel bump
  Quadrature,  ///< adaptive Gauss–Kronrod over density_at
};

/// F̂(x) = ∫_{−∞}^x p̂(y) dy for a one-dimensional KDE.
class SmoothedCdf {
 public:
  explicit SmoothedCdf(DensityModel model, CdfMethod method = CdfMethod::Analytic);

  const DensityModel& model() const noexcept { return model_; }
  CdfMethod method() const noexcept { return method_; }

  double cdf_at(double x) const;

  /// Bisection on [min − 10h, max + 10h]; |F̂(x) − q| ≤ 1e-9 on return
  /// wherever F̂ is continuous. Throws InvalidArgument unless 0 < q < 1.
  double inverse(double q) const;

  double search_lower() const noexcept { return lower_; }
  double search_upper() const noexcept { return upper_; }

 private:
  DensityModel model_;
  CdfMethod method_;
  double lower_;
  double upper_;
};

double cdf_at(const SmoothedCdf& cdf, double x);
double cdf_inverse(const SmoothedCdf& cdf, double q);

/// Contribution of each observation to F̂ at each x: Φ((x − X_i)/h) for the
/// gaussian kernel, the clamped linear ramp for the spherical one. m × n.
Matrix cdf_design(const DensityModel& model, std::span<const double> xs);

enum class RocMethod { Empirical, Smoothed };

struct RocCurve {
  std::vector<double> t;
  std::vector<double> roc;
  RocMethod method = RocMethod::Smoothed;
};

/// t_k = k / (count − 1).
std::vector<double> roc_t_grid(std::size_t count = 101);

/// ROC(t) = 1 − Ĝ(F̂^{-1}(1 − t)), F̂ from the healthy group and Ĝ from the
/// diseased group. ROC(0) = 0 and ROC(1) = 1 by continuity.
RocCurve roc_curve(const Sample& healthy, const Sample& diseased, const KernelSpec& kernel,
                   double h_healthy, double h_diseased, std::span<const double> t);

/// Unsmoothed ROC from the empirical CDFs. Used as a reference.
RocCurve empirical_roc(const Sample& healthy, const Sample& diseased, std::span<const double> t);

/// Bootstrap band for the smoothed ROC. Groups are resampled independently
/// (healthy on stream 0, diseased on stream 1); each replicate curve is
/// computed from CDFs tabulated on a fine x grid; deviations are taken as
/// sup over t; the band is clipped to [0, 1]. Needs B ≥ 20.
BandResult roc_band(const Sample& healthy, const Sample& diseased, const KernelSpec& kernel,
                    double h_healthy, double h_diseased, std::span<const double> t, double alpha,
                    const BootstrapPlan& plan);

}  // namespace kdeforge
