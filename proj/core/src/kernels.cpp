#include "kdeforge/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kdeforge/error.hpp"

namespace kdeforge {

namespace {

// exp(-r²/2) at r = 8 is 1.3e-14, well under the fast path's 1e-8 budget
// even when summed over many omitted points.
constexpr double kGaussianTruncation = 8.0;

// V_d = 2π/d · V_{d−2}; exact for d = 1 and 2, unlike pow/tgamma.
double unit_ball_volume(int d) {
  double v = d % 2 == 0 ? 1.0 : 2.0;
  for (int k = d % 2 == 0 ? 2 : 3; k <= d; k += 2) v *= 2.0 * std::numbers::pi / k;
  return v;
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::Spherical:
      return "spherical";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "spherical") return KernelFamily::Spherical;
  throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, int dim) : family_(family), dim_(dim) {
  if (dim < 1) throw InvalidArgument("kernel dimension must be positive");
  normalizer_ = family == KernelFamily::Gaussian
                    ? std::pow(2.0 * std::numbers::pi, 0.5 * dim)
                    : unit_ball_volume(dim);
  inv_normalizer_ = 1.0 / normalizer_;
}

void KernelSpec::check_dim(const PointRef& u) const {
  if (u.size() != dim_) throw DimensionMismatch(dim_, u.size());
}

void KernelSpec::require_differentiable() const {
  if (!differentiable())
    throw Unsupported("kernel derivatives are only defined for the gaussian kernel");
}

double KernelSpec::evaluate(const PointRef& u) const {
  check_dim(u);
  return profile(u.squaredNorm());
}

Point KernelSpec::gradient(const PointRef& u) const {
  check_dim(u);
  require_differentiable();
  return -profile(u.squaredNorm()) * u;
}

Matrix KernelSpec::hessian(const PointRef& u) const {
  check_dim(u);
  require_differentiable();
  const double k = profile(u.squaredNorm());
  Matrix h = u * u.transpose();
  h.diagonal().array() -= 1.0;
  return k * h;
}

KernelConstants KernelSpec::constants() const noexcept {
  const double d = dim_;
  if (family_ == KernelFamily::Gaussian) {
    // ∫K² = (2π)^{-d} ∫exp(-‖x‖²) = (2π)^{-d} π^{d/2}
    return {d, 1.0 / (std::pow(2.0, d) * std::pow(std::numbers::pi, 0.5 * d))};
  }
  // Uniform on the unit ball: E‖X‖² = d/(d+2).
  return {d / (d + 2.0), inv_normalizer_};
}

double KernelSpec::support_radius() const noexcept {
  return family_ == KernelFamily::Gaussian ? kGaussianTruncation : 1.0;
}

}  // namespace kdeforge
