#include "kdeforge/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kdeforge/error.hpp"
#include "parallel.hpp"

namespace kdeforge {

int MultiIndex::order() const noexcept { return std::accumulate(orders.begin(), orders.end(), 0); }

MultiIndex MultiIndex::first(int dim, int l) {
  MultiIndex m = zero(dim);
  m.orders.at(l) = 1;
  return m;
}

MultiIndex MultiIndex::second(int dim, int l, int k) {
  MultiIndex m = zero(dim);
  m.orders.at(l) += 1;
  m.orders.at(k) += 1;
  return m;
}

// ---------------------------------------------------------------------------
// EvalGrid

EvalGrid::EvalGrid(std::vector<std::vector<double>> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty()) throw InvalidArgument("grid needs at least one axis");
  std::size_t total = 1;
  for (const auto& axis : axes_) {
    if (axis.empty()) throw InvalidArgument("grid axis is empty");
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (!(axis[i] > axis[i - 1])) throw InvalidArgument("grid axis must be strictly increasing");
    total *= axis.size();
  }
  if (values_.size() != total)
    throw InvalidArgument("grid value count does not match the product of axis lengths");
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size() - 1; a-- > 0;) strides_[a] = strides_[a + 1] * axes_[a + 1].size();
}

std::vector<std::size_t> EvalGrid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& axis : axes_) s.push_back(axis.size());
  return s;
}

std::vector<std::size_t> EvalGrid::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = flat / strides_[a];
    flat %= strides_[a];
  }
  return idx;
}

std::size_t EvalGrid::flatten(const std::vector<std::size_t>& index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) flat += index[a] * strides_[a];
  return flat;
}

Point EvalGrid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point p(dim());
  for (std::size_t a = 0; a < axes_.size(); ++a) p[static_cast<Eigen::Index>(a)] = axes_[a][idx[a]];
  return p;
}

PointMatrix EvalGrid::points() const { return tensor_points(axes_); }

void EvalGrid::for_each_neighbor(std::size_t flat,
                                 const std::function<void(std::size_t)>& visit) const {
  std::size_t rest = flat;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const std::size_t i = rest / strides_[a];
    rest %= strides_[a];
    if (i > 0) visit(flat - strides_[a]);
    if (i + 1 < axes_[a].size()) visit(flat + strides_[a]);
  }
}

EvalGrid EvalGrid::with_values(std::vector<double> values) const {
  return EvalGrid(axes_, std::move(values));
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw InvalidArgument("linspace needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<std::vector<double>> make_axes(const Sample& sample, double bandwidth,
                                           std::size_t resolution, double padding) {
  if (resolution < 2) throw InvalidArgument("grid resolution must be at least 2");
  std::vector<std::vector<double>> axes;
  for (int c = 0; c < sample.dim(); ++c) {
    axes.push_back(linspace(sample.min(c) - padding * bandwidth, sample.max(c) + padding * bandwidth,
                            resolution));
  }
  return axes;
}

PointMatrix tensor_points(const std::vector<std::vector<double>>& axes) {
  std::size_t total = 1;
  for (const auto& axis : axes) {
    if (axis.empty()) throw InvalidArgument("grid axis is empty");
    total *= axis.size();
  }
  const auto d = static_cast<Eigen::Index>(axes.size());
  PointMatrix pts(static_cast<Eigen::Index>(total), d);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (Eigen::Index a = 0; a < d; ++a) pts(static_cast<Eigen::Index>(flat), a) = axes[a][idx[a]];
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < axes[a].size()) break;
      idx[a] = 0;
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// DensityModel

DensityModel::DensityModel(Sample sample, KernelSpec kernel, double bandwidth)
    : sample_(std::move(sample)), kernel_(kernel), bandwidth_(bandwidth) {
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    throw InvalidArgument("bandwidth must be positive and finite");
  if (kernel_.dim() != sample_.dim())
    throw DimensionMismatch(static_cast<std::size_t>(sample_.dim()),
                            static_cast<std::size_t>(kernel_.dim()));
  scale_ = 1.0 / (static_cast<double>(sample_.size()) * std::pow(bandwidth_, sample_.dim()));

  order_.resize(sample_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  const auto& data = sample_.data();
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return data(a, 0) < data(b, 0); });
  sorted_first_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) sorted_first_[i] = data(order_[i], 0);
}

void DensityModel::check_point(const PointRef& x) const {
  if (x.size() != dim()) throw DimensionMismatch(dim(), x.size());
}

void DensityModel::require_derivatives() const {
  if (!kernel_.differentiable())
    throw Unsupported("density derivatives require the gaussian kernel");
}

template <class Visit>
void DensityModel::for_each_near(const PointRef& x, Visit&& visit) const {
  const double radius = kernel_.support_radius() * bandwidth_;
  const auto lo = std::lower_bound(sorted_first_.begin(), sorted_first_.end(), x[0] - radius);
  const auto hi = std::upper_bound(lo, sorted_first_.end(), x[0] + radius);
  for (auto it = lo; it != hi; ++it)
    visit(order_[static_cast<std::size_t>(it - sorted_first_.begin())]);
}

double DensityModel::density_at(const PointRef& x, EvalPath path) const {
  check_point(x);
  const auto& data = sample_.data();
  const double inv_h = 1.0 / bandwidth_;
  const Eigen::Index d = dim();
  auto term = [&](std::size_t i) {
    double r2 = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double u = (x[c] - data(static_cast<Eigen::Index>(i), c)) * inv_h;
      r2 += u * u;
    }
    return kernel_.profile(r2);
  };
  double sum = 0.0;
  if (path == EvalPath::Exact) {
    for (std::size_t i = 0; i < size(); ++i) sum += term(i);
  } else {
    const double r2max = kernel_.support_radius() * kernel_.support_radius();
    for_each_near(x, [&](std::size_t i) {
      double r2 = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double u = (x[c] - data(static_cast<Eigen::Index>(i), c)) * inv_h;
        r2 += u * u;
      }
      if (r2 <= r2max) sum += kernel_.profile(r2);
    });
  }
  return scale_ * sum;
}

double DensityModel::derivative_at(const PointRef& x, const MultiIndex& beta) const {
  check_point(x);
  if (beta.dim() != static_cast<std::size_t>(dim()))
    throw DimensionMismatch(static_cast<std::size_t>(dim()), beta.dim());
  for (int o : beta.orders)
    if (o < 0) throw InvalidArgument("multi-index orders must be non-negative");
  const int order = beta.order();
  if (order == 0) return density_at(x);
  if (order > 2) throw Unsupported("derivatives above order 2 are not supported");
  require_derivatives();

  int l = -1;
  int k = -1;
  for (int c = 0; c < dim(); ++c) {
    for (int rep = 0; rep < beta.orders[c]; ++rep) (l < 0 ? l : k) = c;
  }

  const auto& data = sample_.data();
  const double inv_h = 1.0 / bandwidth_;
  double sum = 0.0;
  Point u(dim());
  for (std::size_t i = 0; i < size(); ++i) {
    u = (x - data.row(static_cast<Eigen::Index>(i)).transpose()) * inv_h;
    const double kval = kernel_.profile(u.squaredNorm());
    if (order == 1) {
      sum += -u[l] * kval;
    } else {
      sum += (u[l] * u[k] - (l == k ? 1.0 : 0.0)) * kval;
    }
  }
  return scale_ * sum * std::pow(inv_h, order);
}

DensityModel::LocalFit DensityModel::local_fit(const PointRef& x) const {
  check_point(x);
  require_derivatives();
  const auto& data = sample_.data();
  const double inv_h = 1.0 / bandwidth_;
  const Eigen::Index d = dim();
  double dens = 0.0;
  Point grad = Point::Zero(d);
  Matrix outer = Matrix::Zero(d, d);
  Point u(d);
  for (std::size_t i = 0; i < size(); ++i) {
    u = (x - data.row(static_cast<Eigen::Index>(i)).transpose()) * inv_h;
    const double kval = kernel_.profile(u.squaredNorm());
    dens += kval;
    grad.noalias() -= kval * u;
    outer.noalias() += kval * u * u.transpose();
  }
  LocalFit fit;
  fit.density = scale_ * dens;
  fit.gradient = (scale_ * inv_h) * grad;
  // Σ (u uᵀ − I) K(u), symmetric by construction.
  outer.diagonal().array() -= dens;
  fit.hessian = (scale_ * inv_h * inv_h) * outer;
  fit.hessian = 0.5 * (fit.hessian + fit.hessian.transpose()).eval();
  return fit;
}

Point DensityModel::gradient_at(const PointRef& x) const { return local_fit(x).gradient; }

Matrix DensityModel::hessian_at(const PointRef& x) const { return local_fit(x).hessian; }

double DensityModel::laplacian_at(const PointRef& x) const { return hessian_at(x).trace(); }

std::vector<double> DensityModel::density_at_points(const PointMatrix& points, EvalPath path) const {
  if (points.cols() != dim()) throw DimensionMismatch(dim(), points.cols());
  std::vector<double> out(static_cast<std::size_t>(points.rows()));
  detail::parallel_for(
      out.size(),
      [&](std::size_t g) {
        out[g] = density_at(points.row(static_cast<Eigen::Index>(g)).transpose(), path);
      },
      64);
  return out;
}

EvalGrid DensityModel::evaluate_grid(const std::vector<std::vector<double>>& axes,
                                     EvalPath path) const {
  if (axes.size() != static_cast<std::size_t>(dim())) throw DimensionMismatch(dim(), axes.size());
  const PointMatrix pts = tensor_points(axes);
  return EvalGrid(axes, density_at_points(pts, path));
}

}  // namespace kdeforge
