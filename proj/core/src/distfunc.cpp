#include "kdeforge/distfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kdeforge/error.hpp"

namespace kdeforge {

namespace {

constexpr double kTailPadding = 10.0;
// x-grid resolution used by the tabulated bootstrap path.
constexpr std::size_t kRocTable = 1024;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void require_1d(const Sample& s, const char* what) {
  if (s.dim() != 1) throw InvalidArgument(std::string(what) + " needs one-dimensional data");
}

double bump_cdf(KernelFamily family, double z) {
  if (family == KernelFamily::Gaussian) return std_normal_cdf(z);
  return std::clamp(0.5 * (z + 1.0), 0.0, 1.0);
}

// Smallest x with table(x) ≥ q, linearly interpolated between nodes.
double table_inverse(const std::vector<double>& xs, const double* f, double q) {
  const std::size_t m = xs.size();
  const double* it = std::lower_bound(f, f + m, q);
  if (it == f) return xs.front();
  if (it == f + m) return xs.back();
  const std::size_t k = static_cast<std::size_t>(it - f);
  const double f0 = f[k - 1];
  const double f1 = f[k];
  const double w = f1 > f0 ? (q - f0) / (f1 - f0) : 1.0;
  return xs[k - 1] + w * (xs[k] - xs[k - 1]);
}

double table_eval(const std::vector<double>& xs, const double* f, double x) {
  if (x <= xs.front()) return f[0];
  if (x >= xs.back()) return f[xs.size() - 1];
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return f[k - 1] + w * (f[k] - f[k - 1]);
}

std::vector<double> table_roc(const std::vector<double>& xs, const double* f, const double* g,
                              std::span<const double> t) {
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= 0.0) {
      out[k] = 0.0;
    } else if (t[k] >= 1.0) {
      out[k] = 1.0;
    } else {
      out[k] = std::clamp(1.0 - table_eval(xs, g, table_inverse(xs, f, 1.0 - t[k])), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace

SmoothedCdf::SmoothedCdf(DensityModel model, CdfMethod method)
    : model_(std::move(model)), method_(method) {
  require_1d(model_.sample(), "smoothed CDF");
  lower_ = model_.sample().min(0) - kTailPadding * model_.bandwidth();
  upper_ = model_.sample().max(0) + kTailPadding * model_.bandwidth();
}

double SmoothedCdf::cdf_at(double x) const {
  if (std::isnan(x)) throw InvalidArgument("cdf argument is NaN");
  if (method_ == CdfMethod::Quadrature) {
    if (x <= lower_) return 0.0;
    auto f = [this](double y) {
      Point p(1);
      p[0] = y;
      return model_.density_at(p);
    };
    const double b = std::min(x, upper_);
    // The spherical density jumps at X_i ± h; integrate between jumps.
    std::vector<double> cuts{lower_, b};
    if (model_.kernel().family() == KernelFamily::Spherical) {
      const double h = model_.bandwidth();
      for (double v : model_.sample().column(0))
        for (double c : {v - h, v + h})
          if (c > lower_ && c < b) cuts.push_back(c);
      std::sort(cuts.begin(), cuts.end());
    }
    // Pieces are constant for the spherical kernel, so the fixed rule is
    // exact there; adaptive splitting would chase rounding-level jumps.
    const unsigned depth = model_.kernel().family() == KernelFamily::Spherical ? 0 : 20;
    double value = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i])
        value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], depth, 1e-13);
    return std::clamp(value, 0.0, 1.0);
  }
  const auto& data = model_.sample().data();
  const double inv_h = 1.0 / model_.bandwidth();
  const KernelFamily family = model_.kernel().family();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) sum += bump_cdf(family, (x - data(i, 0)) * inv_h);
  return sum / static_cast<double>(data.rows());
}

double SmoothedCdf::inverse(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("cdf_inverse needs q in (0, 1)");
  double lo = lower_;
  double hi = upper_;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf_at(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double cdf_at(const SmoothedCdf& cdf, double x) { return cdf.cdf_at(x); }
double cdf_inverse(const SmoothedCdf& cdf, double q) { return cdf.inverse(q); }

Matrix cdf_design(const DensityModel& model, std::span<const double> xs) {
  require_1d(model.sample(), "cdf design");
  const auto& data = model.sample().data();
  const double inv_h = 1.0 / model.bandwidth();
  const KernelFamily family = model.kernel().family();
  Matrix design(static_cast<Eigen::Index>(xs.size()), data.rows());
  for (std::size_t g = 0; g < xs.size(); ++g)
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      design(static_cast<Eigen::Index>(g), i) = bump_cdf(family, (xs[g] - data(i, 0)) * inv_h);
  return design;
}

std::vector<double> roc_t_grid(std::size_t count) {
  if (count < 2) throw InvalidArgument("t grid needs at least two points");
  return linspace(0.0, 1.0, count);
}

RocCurve roc_curve(const Sample& healthy, const Sample& diseased, const KernelSpec& kernel,
                   double h_healthy, double h_diseased, std::span<const double> t) {
  require_1d(healthy, "ROC");
  require_1d(diseased, "ROC");
  const SmoothedCdf f(DensityModel(healthy, kernel, h_healthy));
  const SmoothedCdf g(DensityModel(diseased, kernel, h_diseased));
  RocCurve curve;
  curve.t.assign(t.begin(), t.end());
  curve.roc.resize(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= 0.0)
      curve.roc[k] = 0.0;
    else if (t[k] >= 1.0)
      curve.roc[k] = 1.0;
    else
      curve.roc[k] = std::clamp(1.0 - g.cdf_at(f.inverse(1.0 - t[k])), 0.0, 1.0);
  }
  return curve;
}

RocCurve empirical_roc(const Sample& healthy, const Sample& diseased, std::span<const double> t) {
  require_1d(healthy, "ROC");
  require_1d(diseased, "ROC");
  auto x = healthy.column(0);
  auto y = diseased.column(0);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  RocCurve curve;
  curve.method = RocMethod::Empirical;
  curve.t.assign(t.begin(), t.end());
  for (double tk : t) {
    if (tk <= 0.0) {
      curve.roc.push_back(0.0);
      continue;
    }
    if (tk >= 1.0) {
      curve.roc.push_back(1.0);
      continue;
    }
    // F^{-1}(1 − t): smallest order statistic with F_n ≥ 1 − t.
    const auto k = static_cast<std::size_t>(std::ceil((1.0 - tk) * static_cast<double>(x.size()) - 1e-12));
    const double cut = x[std::min(std::max<std::size_t>(k, 1), x.size()) - 1];
    const auto below = std::upper_bound(y.begin(), y.end(), cut) - y.begin();
    curve.roc.push_back(1.0 - static_cast<double>(below) / static_cast<double>(y.size()));
  }
  return curve;
}

BandResult roc_band(const Sample& healthy, const Sample& diseased, const KernelSpec& kernel,
                    double h_healthy, double h_diseased, std::span<const double> t, double alpha,
                    const BootstrapPlan& plan) {
  plan.validate(20);
  (void)quantile_rank(plan.replicates, alpha);
  if (t.empty()) throw InvalidArgument("t grid is empty");
  const RocCurve center = roc_curve(healthy, diseased, kernel, h_healthy, h_diseased, t);

  const DensityModel mf(healthy, kernel, h_healthy);
  const DensityModel mg(diseased, kernel, h_diseased);
  const double pad = kTailPadding * std::max(h_healthy, h_diseased);
  const double lo = std::min(healthy.min(0), diseased.min(0)) - pad;
  const double hi = std::max(healthy.max(0), diseased.max(0)) + pad;
  const auto xs = linspace(lo, hi, kRocTable);

  const Matrix design_f = cdf_design(mf, xs);
  const Matrix design_g = cdf_design(mg, xs);
  const Eigen::VectorXd f0 = design_f.rowwise().mean();
  const Eigen::VectorXd g0 = design_g.rowwise().mean();
  const auto base = table_roc(xs, f0.data(), g0.data(), t);

  const Matrix boot_f = bootstrap_curves(design_f, plan, 0);
  const Matrix boot_g = bootstrap_curves(design_g, plan, 1);

  // Replicates expressed relative to the table-based estimate, then shifted
  // onto the exact center so that only the deviations come from the table.
  Matrix replicates(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(plan.replicates));
  for (std::size_t j = 0; j < plan.replicates; ++j) {
    const auto roc = table_roc(xs, boot_f.col(static_cast<Eigen::Index>(j)).data(),
                               boot_g.col(static_cast<Eigen::Index>(j)).data(), t);
    for (std::size_t k = 0; k < t.size(); ++k)
      replicates(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          center.roc[k] + (roc[k] - base[k]);
  }

  PointMatrix points(static_cast<Eigen::Index>(t.size()), 1);
  for (std::size_t k = 0; k < t.size(); ++k) points(static_cast<Eigen::Index>(k), 0) = t[k];
  BandResult band = band_from_replicates(points, center.roc, replicates, alpha,
                                         IntervalMethod::RocBootstrapBand, InferenceTarget::Smoothed);
  for (std::size_t k = 0; k < band.size(); ++k) {
    band.lower[k] = std::clamp(band.lower[k], 0.0, 1.0);
    band.upper[k] = std::clamp(band.upper[k], 0.0, 1.0);
  }
  return band;
}

}  // namespace kdeforge
