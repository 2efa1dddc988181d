#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kdeforge/kernels.hpp"
#include "kdeforge/sample.hpp"
#include "kdeforge/types.hpp"

namespace kdeforge {

/// Partial-derivative orders (β_1, …, β_d). Only |β| ≤ 2 is supported.
struct MultiIndex {
  std::vector<int> orders;

  int order() const noexcept;
  std::size_t dim() const noexcept { return orders.size(); }

  static MultiIndex zero(int dim) { return {std::vector<int>(dim, 0)}; }
  /// e_l + e_k (l == k gives the pure second derivative).
  static MultiIndex second(int dim, int l, int k);
  static MultiIndex first(int dim, int l);
};

enum class EvalPath {
  Exact,      ///< naive sum over all n observations
  Truncated,  ///< skips observations beyond the kernel support radius
};

/// Tensor grid with values. Flat index is row-major over the axes: the last
/// axis varies fastest.
class EvalGrid {
 public:
  EvalGrid(std::vector<std::vector<double>> axes, std::vector<double> values);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
  std::vector<std::size_t> shape() const;

  const std::vector<double>& values() const noexcept { return values_; }
  double value(std::size_t flat) const { return values_[flat]; }

  Point point(std::size_t flat) const;
  PointMatrix points() const;

  std::vector<std::size_t> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<std::size_t>& index) const;

  /// Calls visit(neighbor_flat) for every face-adjacent grid point.
  void for_each_neighbor(std::size_t flat, const std::function<void(std::size_t)>& visit) const;

  /// Same axes, new values (used for perturbation and shifted grids).
  EvalGrid with_values(std::vector<double> values) const;

  bool same_geometry(const EvalGrid& other) const noexcept { return axes_ == other.axes_; }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Per-axis breakpoints spanning [min − padding·h, max + padding·h] with
/// `resolution` points each.
std::vector<std::vector<double>> make_axes(const Sample& sample, double bandwidth,
                                           std::size_t resolution, double padding = 3.0);

/// Every point of the tensor product of `axes`, row-major.
PointMatrix tensor_points(const std::vector<std::vector<double>>& axes);

/// Kernel density estimate p̂(x) = (1 / n h^d) Σ K((x − X_i)/h).
///
/// The model is immutable; every evaluation is const and safe to call
/// concurrently.
class DensityModel {
 public:
  DensityModel(Sample sample, KernelSpec kernel, double bandwidth);

  const Sample& sample() const noexcept { return sample_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double bandwidth() const noexcept { return bandwidth_; }
  int dim() const noexcept { return sample_.dim(); }
  std::size_t size() const noexcept { return sample_.size(); }

  double density_at(const PointRef& x, EvalPath path = EvalPath::Exact) const;

  /// D^β p̂(x) for |β| ≤ 2 (gaussian kernel unless β = 0).
  double derivative_at(const PointRef& x, const MultiIndex& beta) const;

  Point gradient_at(const PointRef& x) const;
  Matrix hessian_at(const PointRef& x) const;
  double laplacian_at(const PointRef& x) const;

  struct LocalFit {
    double density;
    Point gradient;
    Matrix hessian;
  };
  /// Density, gradient and Hessian from a single pass over the sample.
  LocalFit local_fit(const PointRef& x) const;

  /// Density at each row of `points`, in row order.
  std::vector<double> density_at_points(const PointMatrix& points,
                                        EvalPath path = EvalPath::Exact) const;

  EvalGrid evaluate_grid(const std::vector<std::vector<double>>& axes,
                         EvalPath path = EvalPath::Exact) const;

 private:
  void check_point(const PointRef& x) const;
  void require_derivatives() const;
  template <class Visit>
  void for_each_near(const PointRef& x, Visit&& visit) const;

  Sample sample_;
  KernelSpec kernel_;
  double bandwidth_;
  double scale_;  // 1 / (n h^d)
  // Observation indices sorted by first coordinate, for the truncated path.
  std::vector<std::size_t> order_;
  std::vector<double> sorted_first_;
};

}  // namespace kdeforge
