#pragma once

#include <cmath>
#include <string_view>

#include "kdeforge/types.hpp"

namespace kdeforge {

enum class KernelFamily { Gaussian, Spherical };

std::string_view to_string(KernelFamily family) noexcept;

/// Parses "gaussian" / "spherical"; throws InvalidArgument otherwise.
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel moments entering the bias and variance expansions.
///   sigma_k2 = ∫ ‖x‖² K(x) dx  (total second moment, summed over coordinates)
///   mu_k     = ∫ K(x)² dx
struct KernelConstants {
  double sigma_k2;
  double mu_k;
};

/// A radially symmetric kernel on ℝ^d with its exact normalizer.
///
/// Gaussian:  K(u) = exp(-‖u‖²/2) / (2π)^{d/2}
/// Spherical: K(u) = 1{‖u‖ ≤ 1} / vol(unit d-ball), closed at the boundary.
///
/// Only the Gaussian family is differentiable; gradient() and hessian()
/// throw Unsupported for the spherical kernel.
class KernelSpec {
 public:
  KernelSpec(KernelFamily family, int dim);

  static KernelSpec gaussian(int dim) { return {KernelFamily::Gaussian, dim}; }
  static KernelSpec spherical(int dim) { return {KernelFamily::Spherical, dim}; }

  KernelFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  bool differentiable() const noexcept { return family_ == KernelFamily::Gaussian; }

  /// v_{1,d} = (2π)^{d/2} or v_{2,d} = π^{d/2} / Γ(d/2 + 1).
  double normalizer() const noexcept { return normalizer_; }

  double evaluate(const PointRef& u) const;

  /// Radial profile: K as a function of r² = ‖u‖². No dimension check.
  double profile(double r2) const noexcept {
    if (family_ == KernelFamily::Gaussian) return inv_normalizer_ * std::exp(-0.5 * r2);
    return r2 <= 1.0 ? inv_normalizer_ : 0.0;
  }

  Point gradient(const PointRef& u) const;
  Matrix hessian(const PointRef& u) const;

  KernelConstants constants() const noexcept;

  /// Radius beyond which the kernel is treated as zero on the truncated
  /// evaluation path (1 for spherical, where it is exact).
  double support_radius() const noexcept;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  void check_dim(const PointRef& u) const;
  void require_differentiable() const;

  KernelFamily family_;
  int dim_;
  double normalizer_;
  double inv_normalizer_;
};

}  // namespace kdeforge
