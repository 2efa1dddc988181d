#include "kdeforge/inference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "kdeforge/error.hpp"
#include "parallel.hpp"

namespace kdeforge {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

void check_grid(const DensityModel& model, const PointMatrix& grid) {
  if (grid.rows() == 0) throw InvalidArgument("evaluation grid is empty");
  if (grid.cols() != model.dim()) throw DimensionMismatch(model.dim(), grid.cols());
}

IntervalResult make_result(const PointMatrix& grid, double alpha, IntervalMethod method,
                           InferenceTarget target, std::vector<double> center) {
  IntervalResult r;
  r.points = grid;
  r.alpha = alpha;
  r.method = method;
  r.target = target;
  r.center = std::move(center);
  r.lower.resize(r.center.size());
  r.upper.resize(r.center.size());
  r.degenerate.assign(r.center.size(), false);
  return r;
}

void set_symmetric(IntervalResult& r, std::size_t g, double half_width) {
  r.lower[g] = r.center[g] - half_width;
  r.upper[g] = r.center[g] + half_width;
}

std::vector<double> row_means(const Matrix& design) {
  const Eigen::VectorXd mean = design.rowwise().mean();
  return {mean.data(), mean.data() + mean.size()};
}

}  // namespace

std::string_view to_string(IntervalMethod method) noexcept {
  switch (method) {
    case IntervalMethod::Plugin:
      return "plugin";
    case IntervalMethod::BootstrapPlugin:
      return "bootstrap-plugin";
    case IntervalMethod::Bootstrap:
      return "bootstrap";
    case IntervalMethod::EvtPlugin:
      return "evt";
    case IntervalMethod::BootstrapBand:
      return "boot";
    case IntervalMethod::DebiasedBootstrapBand:
      return "debias";
    case IntervalMethod::RocBootstrapBand:
      return "roc-boot";
  }
  return "unknown";
}

std::string_view to_string(InferenceTarget target) noexcept {
  return target == InferenceTarget::True ? "true" : "smoothed";
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double plugin_half_width(double density, const KernelSpec& kernel, std::size_t n, double h,
                         double alpha) {
  check_alpha(alpha);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double var = kernel.constants().mu_k * std::max(density, 0.0) /
                     (static_cast<double>(n) * std::pow(h, kernel.dim()));
  return z * std::sqrt(var);
}

IntervalResult ci_plugin(const DensityModel& model, const PointMatrix& grid, double alpha) {
  check_alpha(alpha);
  check_grid(model, grid);
  auto r = make_result(grid, alpha, IntervalMethod::Plugin, InferenceTarget::Smoothed,
                       model.density_at_points(grid));
  for (std::size_t g = 0; g < r.size(); ++g) {
    set_symmetric(r, g, plugin_half_width(r.center[g], model.kernel(), model.size(),
                                          model.bandwidth(), alpha));
    r.degenerate[g] = r.center[g] <= 0.0;
  }
  if (std::find(r.degenerate.begin(), r.degenerate.end(), true) != r.degenerate.end())
    r.warnings.emplace_back("zero-density points have zero-width intervals");
  return r;
}

double bootstrap_sd(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("standard deviation needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

IntervalResult ci_bootstrap_plugin(const DensityModel& model, const PointMatrix& grid, double alpha,
                                   const BootstrapPlan& plan) {
  check_alpha(alpha);
  check_grid(model, grid);
  plan.validate(2);
  const Matrix design = kde_design(model, grid);
  const Matrix curves = bootstrap_curves(design, plan);
  auto r = make_result(grid, alpha, IntervalMethod::BootstrapPlugin, InferenceTarget::Smoothed,
                       row_means(design));
  const double z = normal_quantile(1.0 - alpha / 2.0);
  std::vector<double> row(plan.replicates);
  for (std::size_t g = 0; g < r.size(); ++g) {
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = curves(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j));
    set_symmetric(r, g, z * bootstrap_sd(row));
  }
  return r;
}

IntervalResult ci_bootstrap(const DensityModel& model, const PointMatrix& grid, double alpha,
                            const BootstrapPlan& plan) {
  check_alpha(alpha);
  check_grid(model, grid);
  plan.validate(20);
  (void)quantile_rank(plan.replicates, alpha);
  const Matrix design = kde_design(model, grid);
  const Matrix curves = bootstrap_curves(design, plan);
  auto r = make_result(grid, alpha, IntervalMethod::Bootstrap, InferenceTarget::Smoothed,
                       row_means(design));
  std::vector<double> dev(plan.replicates);
  for (std::size_t g = 0; g < r.size(); ++g) {
    for (std::size_t j = 0; j < dev.size(); ++j)
      dev[j] = std::abs(curves(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) - r.center[g]);
    set_symmetric(r, g, bootstrap_quantile(dev, alpha));
  }
  return r;
}

double evt_quantile(double alpha, EvtQuantile convention) {
  check_alpha(alpha);
  const double p = convention == EvtQuantile::LimitDistribution ? 1.0 - alpha : alpha;
  return -std::log(-std::log(p) / 2.0);
}

BandResult band_plugin_evt(const DensityModel& model, const PointMatrix& grid, double alpha,
                           const EvtOptions& options) {
  check_alpha(alpha);
  check_grid(model, grid);
  if (model.dim() != 1) throw Unsupported("extreme-value band is only available for d = 1");
  if (model.kernel().family() != KernelFamily::Gaussian)
    throw Unsupported("extreme-value band requires the gaussian kernel");
  const double h = model.bandwidth();
  if (!(h < 1.0)) throw InvalidArgument("extreme-value band needs h < 1");

  const double root = std::sqrt(-2.0 * std::log(h));
  const double dn = root + options.dn_correction;
  const double multiplier = dn + evt_quantile(alpha, options.quantile) / root;

  BandResult band;
  static_cast<IntervalResult&>(band) = make_result(grid, alpha, IntervalMethod::EvtPlugin,
                                                   InferenceTarget::Smoothed,
                                                   model.density_at_points(grid));
  band.critical_value = multiplier;
  band.constant_width = false;
  const double mu_k = model.kernel().constants().mu_k;
  const double nh = static_cast<double>(model.size()) * h;
  for (std::size_t g = 0; g < band.size(); ++g) {
    const double p = std::max(band.center[g], 0.0);
    set_symmetric(band, g, std::sqrt(p * mu_k / nh) * multiplier);
    band.degenerate[g] = band.center[g] <= 0.0;
  }
  band.display_center = band.center;
  band.warnings.emplace_back("slow-convergence: extreme-value limit is approached slowly in n");
  return band;
}

BandResult band_from_replicates(const PointMatrix& points, std::span<const double> center,
                                const Matrix& replicates, double alpha, IntervalMethod method,
                                InferenceTarget target) {
  check_alpha(alpha);
  if (static_cast<std::size_t>(replicates.rows()) != center.size())
    throw InvalidArgument("replicate matrix rows must match the number of evaluation points");
  const auto b = static_cast<std::size_t>(replicates.cols());
  std::vector<double> dev(b);
  const Eigen::Map<const Eigen::VectorXd> c(center.data(), static_cast<Eigen::Index>(center.size()));
  for (std::size_t j = 0; j < b; ++j)
    dev[j] = (replicates.col(static_cast<Eigen::Index>(j)) - c).cwiseAbs().maxCoeff();
  const double half = bootstrap_quantile(std::move(dev), alpha);

  BandResult band;
  static_cast<IntervalResult&>(band) =
      make_result(points, alpha, method, target, std::vector<double>(center.begin(), center.end()));
  band.critical_value = half;
  band.constant_width = true;
  band.display_center.resize(band.size());
  for (std::size_t g = 0; g < band.size(); ++g) {
    set_symmetric(band, g, half);
    band.display_center[g] = std::max(band.center[g], 0.0);
  }
  return band;
}

BandResult band_bootstrap(const DensityModel& model, const PointMatrix& grid, double alpha,
                          const BootstrapPlan& plan) {
  check_alpha(alpha);
  check_grid(model, grid);
  plan.validate(20);
  (void)quantile_rank(plan.replicates, alpha);
  const Matrix design = kde_design(model, grid);
  const auto center = row_means(design);
  return band_from_replicates(grid, center, bootstrap_curves(design, plan), alpha,
                              IntervalMethod::BootstrapBand, InferenceTarget::Smoothed);
}

double debiased_value(double density, double laplacian, double h, double sigma_k2) noexcept {
  return density - 0.5 * h * h * sigma_k2 * laplacian;
}

DebiasedDensity::DebiasedDensity(const DensityModel& model) : model_(model) {
  if (!model_.kernel().differentiable())
    throw Unsupported("the debiased estimator requires the gaussian kernel");
}

double DebiasedDensity::value_at(const PointRef& x) const {
  const auto fit = model_.local_fit(x);
  return debiased_value(fit.density, fit.hessian.trace(), model_.bandwidth(),
                        model_.kernel().constants().sigma_k2);
}

double DebiasedDensity::display_value_at(const PointRef& x) const {
  return std::max(value_at(x), 0.0);
}

DebiasedDensity debias(const DensityModel& model) { return DebiasedDensity(model); }

namespace {

template <class Weight>
Matrix design_matrix(const DensityModel& model, const PointMatrix& grid, Weight&& weight) {
  check_grid(model, grid);
  const auto& data = model.sample().data();
  const Eigen::Index m = grid.rows();
  const auto n = static_cast<Eigen::Index>(model.size());
  const Eigen::Index d = model.dim();
  const double inv_h = 1.0 / model.bandwidth();
  const double inv_hd = std::pow(inv_h, static_cast<double>(d));
  const KernelSpec& kernel = model.kernel();
  Matrix design(m, n);
  detail::parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t gi) {
        const auto g = static_cast<Eigen::Index>(gi);
        for (Eigen::Index i = 0; i < n; ++i) {
          double r2 = 0.0;
          for (Eigen::Index c = 0; c < d; ++c) {
            const double u = (grid(g, c) - data(i, c)) * inv_h;
            r2 += u * u;
          }
          design(g, i) = inv_hd * weight(kernel.profile(r2), r2);
        }
      },
      16);
  return design;
}

}  // namespace

Matrix kde_design(const DensityModel& model, const PointMatrix& grid) {
  return design_matrix(model, grid, [](double k, double) { return k; });
}

Matrix debiased_design(const DensityModel& model, const PointMatrix& grid) {
  if (!model.kernel().differentiable())
    throw Unsupported("the debiased estimator requires the gaussian kernel");
  const double half_sigma = 0.5 * model.kernel().constants().sigma_k2;
  const double d = model.dim();
  return design_matrix(model, grid,
                       [=](double k, double r2) { return k * (1.0 - half_sigma * (r2 - d)); });
}

BandResult band_debiased_bootstrap(const Sample& sample, const KernelSpec& kernel, double h,
                                   const PointMatrix& grid, double alpha, const BootstrapPlan& plan) {
  check_alpha(alpha);
  plan.validate(20);
  (void)quantile_rank(plan.replicates, alpha);
  const DensityModel model(sample, kernel, h);
  const Matrix design = debiased_design(model, grid);
  const auto center = row_means(design);
  return band_from_replicates(grid, center, bootstrap_curves(design, plan), alpha,
                              IntervalMethod::DebiasedBootstrapBand, InferenceTarget::True);
}

}  // namespace kdeforge
