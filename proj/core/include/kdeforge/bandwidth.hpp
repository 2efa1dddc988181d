#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kdeforge/estimator.hpp"
#include "kdeforge/kernels.hpp"
#include "kdeforge/sample.hpp"

namespace kdeforge {

enum class BandwidthMethod { RuleOfThumb, Lscv, AmisePlugin, Fixed };

std::string_view to_string(BandwidthMethod method) noexcept;
/// Accepts the CLI spellings rot | lscv | plugin | fixed.
BandwidthMethod parse_bandwidth_method(std::string_view name);

/// Log-spaced candidate grid of absolute bandwidths.
struct LscvGrid {
  double lo;
  double hi;
  std::size_t count;

  std::vector<double> candidates() const;
};

/// Parses "lo:hi:count".
LscvGrid parse_lscv_grid(std::string_view text);

struct BandwidthSelector {
  BandwidthMethod method = BandwidthMethod::RuleOfThumb;
  double fixed = 0.0;                 ///< used when method == Fixed
  std::optional<LscvGrid> lscv_grid;  ///< default: 30 points over [0.1, 3] × rule of thumb
  std::optional<double> pilot;        ///< plug-in pilot; default 1.2 × rule of thumb

  void validate() const;
};

/// Silverman's rule 1.06 · min(sd, iqr / 1.34) · n^{-1/5}. When iqr is 0 the
/// standard deviation alone is used.
double silverman_bandwidth(double sd, double iqr, std::size_t n);

/// d = 1: Silverman's rule of thumb.
/// d > 1: Scott's rule σ̂_ℓ · n^{-1/(d+4)} averaged over the coordinates,
/// since the estimator uses one scalar bandwidth.
/// Throws NumericalError if any coordinate has zero spread.
double rule_of_thumb(const Sample& sample);

struct LscvResult {
  double bandwidth;
  std::vector<double> candidates;  ///< sorted ascending
  std::vector<double> criterion;   ///< CV(h) per candidate
};

/// CV(h) = ∫p̂² − (2/n) Σ p̂_{−i}(X_i).
double lscv_criterion(const Sample& sample, const KernelSpec& kernel, double h);

/// Minimizes CV over the candidate grid; ties go to the smaller bandwidth.
LscvResult lscv(const Sample& sample, const KernelSpec& kernel, std::span<const double> candidates);

std::vector<double> default_lscv_candidates(const Sample& sample);

/// h = (d μ_K / (σ_K⁴ R n))^{1/(d+4)}, the minimizer of
/// AMISE(h) = h⁴ σ_K⁴ R / 4 + μ_K / (n h^d), with R = ∫(∇²p)².
double amise_optimal_bandwidth(const KernelSpec& kernel, double curvature, std::size_t n);

/// Plug-in estimate of R = ∫(∇²p)² from a gaussian pilot KDE, integrated
/// over a grid spanning the data ± 4 pilot bandwidths.
double curvature_functional(const Sample& sample, double pilot);

/// AMISE plug-in selector. The pilot always uses the gaussian kernel; the
/// kernel constants come from `kernel`.
double amise_plugin(const Sample& sample, const KernelSpec& kernel,
                    std::optional<double> pilot = std::nullopt);

double select_bandwidth(const Sample& sample, const KernelSpec& kernel,
                        const BandwidthSelector& selector);

}  // namespace kdeforge
