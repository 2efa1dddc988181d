#include "kdeforge/bandwidth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "kdeforge/error.hpp"
#include "parallel.hpp"

namespace kdeforge {

namespace {

double sample_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

// Linear interpolation between order statistics (Hyndman–Fan type 7).
double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double parse_double(std::string_view s) {
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("cannot parse number '" + std::string(s) + "'");
  return value;
}

}  // namespace

std::string_view to_string(BandwidthMethod method) noexcept {
  switch (method) {
    case BandwidthMethod::RuleOfThumb:
      return "rot";
    case BandwidthMethod::Lscv:
      return "lscv";
    case BandwidthMethod::AmisePlugin:
      return "plugin";
    case BandwidthMethod::Fixed:
      return "fixed";
  }
  return "unknown";
}

BandwidthMethod parse_bandwidth_method(std::string_view name) {
  if (name == "rot") return BandwidthMethod::RuleOfThumb;
  if (name == "lscv") return BandwidthMethod::Lscv;
  if (name == "plugin") return BandwidthMethod::AmisePlugin;
  if (name == "fixed") return BandwidthMethod::Fixed;
  throw InvalidArgument("unknown bandwidth method '" + std::string(name) + "'");
}

std::vector<double> LscvGrid::candidates() const {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw InvalidArgument("lscv grid needs 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

LscvGrid parse_lscv_grid(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) throw InvalidArgument("lscv grid must look like lo:hi:count");
  LscvGrid g{parse_double(text.substr(0, a)), parse_double(text.substr(a + 1, b - a - 1)), 0};
  const double count = parse_double(text.substr(b + 1));
  if (count < 2 || count != std::floor(count)) throw InvalidArgument("lscv grid count must be an integer >= 2");
  g.count = static_cast<std::size_t>(count);
  (void)g.candidates();
  return g;
}

void BandwidthSelector::validate() const {
  if (method == BandwidthMethod::Fixed && !(fixed > 0.0 && std::isfinite(fixed)))
    throw InvalidArgument("fixed bandwidth must be positive");
  if (lscv_grid) (void)lscv_grid->candidates();
  if (pilot && !(*pilot > 0.0)) throw InvalidArgument("pilot bandwidth must be positive");
}

double silverman_bandwidth(double sd, double iqr, std::size_t n) {
  if (n < 1) throw InvalidArgument("rule of thumb needs n >= 1");
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) throw NumericalError("rule of thumb: sample has zero spread");
  return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

double rule_of_thumb(const Sample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw InvalidArgument("rule of thumb needs at least two observations");
  const int d = sample.dim();
  if (d == 1) {
    const auto x = sample.column(0);
    return silverman_bandwidth(sample_sd(x), quantile_type7(x, 0.75) - quantile_type7(x, 0.25), n);
  }
  double mean_sd = 0.0;
  for (int c = 0; c < d; ++c) {
    const double sd = sample_sd(sample.column(c));
    if (!(sd > 0.0)) throw NumericalError("rule of thumb: coordinate " + std::to_string(c) + " has zero spread");
    mean_sd += sd;
  }
  mean_sd /= d;
  return mean_sd * std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
}

std::vector<double> default_lscv_candidates(const Sample& sample) {
  const double h0 = rule_of_thumb(sample);
  return LscvGrid{0.1 * h0, 3.0 * h0, 30}.candidates();
}

namespace {

// CV(h) for every candidate at once, sharing the pairwise distances.
std::vector<double> lscv_curve(const Sample& sample, const KernelSpec& kernel,
                               const std::vector<double>& hs) {
  const std::size_t n = sample.size();
  const int d = sample.dim();
  const auto& data = sample.data();
  const std::size_t m = hs.size();
  const double dn = static_cast<double>(n);

  // Per-candidate sums over unordered pairs i < j.
  std::vector<double> conv_sum(m, 0.0);
  std::vector<double> loo_sum(m, 0.0);
  Eigen::ArrayXd dist2(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Eigen::Index len = static_cast<Eigen::Index>(n - i - 1);
    auto di = dist2.head(len);
    di = (data.bottomRows(len).rowwise() - data.row(static_cast<Eigen::Index>(i)))
             .rowwise()
             .squaredNorm()
             .array();
    for (std::size_t c = 0; c < m; ++c) {
      const double h2 = hs[c] * hs[c];
      if (kernel.family() == KernelFamily::Gaussian) {
        conv_sum[c] += (-di / (4.0 * h2)).exp().sum();
        loo_sum[c] += (-di / (2.0 * h2)).exp().sum();
      } else {
        const double two_h2 = 4.0 * h2;
        for (Eigen::Index j = 0; j < len; ++j) {
          const double r2 = di[j];
          if (r2 <= h2) loo_sum[c] += 1.0;
          if (r2 < two_h2) {
            // lens volume of two radius-h balls, in units of v_d h^d
            const double x = 1.0 - r2 / two_h2;
            conv_sum[c] += boost::math::ibeta(0.5 * (d + 1), 0.5, x);
          }
        }
      }
    }
  }

  std::vector<double> cv(m);
  for (std::size_t c = 0; c < m; ++c) {
    const double h = hs[c];
    const double hd = std::pow(h, d);
    double integral_sq = 0.0;
    double loo = 0.0;
    if (kernel.family() == KernelFamily::Gaussian) {
      const double conv_norm = std::pow(4.0 * std::numbers::pi * h * h, -0.5 * d);
      integral_sq = conv_norm * (dn + 2.0 * conv_sum[c]) / (dn * dn);
      loo = 2.0 * loo_sum[c] / (kernel.normalizer() * hd);
    } else {
      // ∫(1/v h^d)² vol(B_i ∩ B_j) = vol_fraction / (v h^d)
      integral_sq = (dn + 2.0 * conv_sum[c]) / (dn * dn * kernel.normalizer() * hd);
      loo = 2.0 * loo_sum[c] / (kernel.normalizer() * hd);
    }
    // (2/n) Σ_i p̂_{-i}(X_i) = 2 / (n (n−1) h^d) Σ_{i≠j} K
    cv[c] = integral_sq - 2.0 * loo / (dn * (dn - 1.0));
  }
  return cv;
}

}  // namespace

double lscv_criterion(const Sample& sample, const KernelSpec& kernel, double h) {
  if (!(h > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (sample.size() < 3) throw InvalidArgument("lscv needs at least three observations");
  if (kernel.dim() != sample.dim()) throw DimensionMismatch(sample.dim(), kernel.dim());
  return lscv_curve(sample, kernel, {h}).front();
}

LscvResult lscv(const Sample& sample, const KernelSpec& kernel, std::span<const double> candidates) {
  if (candidates.empty()) throw InvalidArgument("lscv candidate grid is empty");
  if (kernel.dim() != sample.dim()) throw DimensionMismatch(sample.dim(), kernel.dim());
  std::vector<double> hs(candidates.begin(), candidates.end());
  for (double h : hs)
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("lscv candidates must be positive");
  std::sort(hs.begin(), hs.end());
  if (hs.size() == 1) return {hs.front(), hs, {lscv_criterion(sample, kernel, hs.front())}};
  if (sample.size() < 3) throw InvalidArgument("lscv needs at least three observations");

  LscvResult result{0.0, hs, lscv_curve(sample, kernel, hs)};
  std::size_t best = 0;
  for (std::size_t c = 1; c < hs.size(); ++c)
    if (result.criterion[c] < result.criterion[best]) best = c;
  result.bandwidth = hs[best];
  return result;
}

double amise_optimal_bandwidth(const KernelSpec& kernel, double curvature, std::size_t n) {
  if (!(curvature > 1e-12)) throw NumericalError("curvature functional is too small (flat pilot)");
  if (n < 1) throw InvalidArgument("sample size must be positive");
  const auto [sigma_k2, mu_k] = kernel.constants();
  const double d = kernel.dim();
  return std::pow(d * mu_k / (sigma_k2 * sigma_k2 * curvature * static_cast<double>(n)),
                  1.0 / (d + 4.0));
}

double curvature_functional(const Sample& sample, double pilot) {
  if (!(pilot > 0.0)) throw InvalidArgument("pilot bandwidth must be positive");
  const int d = sample.dim();
  const std::size_t resolution = d == 1 ? 1024 : d == 2 ? 128 : d == 3 ? 32 : 12;
  const DensityModel model(sample, KernelSpec::gaussian(d), pilot);
  const auto axes = make_axes(sample, pilot, resolution, 4.0);
  const PointMatrix pts = tensor_points(axes);
  std::vector<double> lap(static_cast<std::size_t>(pts.rows()));
  detail::parallel_for(
      lap.size(),
      [&](std::size_t g) {
        lap[g] = model.laplacian_at(pts.row(static_cast<Eigen::Index>(g)).transpose());
      },
      16);
  double cell = 1.0;
  for (const auto& axis : axes) cell *= axis[1] - axis[0];
  double sum = 0.0;
  for (double v : lap) sum += v * v;
  return sum * cell;
}

double amise_plugin(const Sample& sample, const KernelSpec& kernel, std::optional<double> pilot) {
  if (kernel.dim() != sample.dim()) throw DimensionMismatch(sample.dim(), kernel.dim());
  const double b = pilot ? *pilot : 1.2 * rule_of_thumb(sample);
  return amise_optimal_bandwidth(kernel, curvature_functional(sample, b), sample.size());
}

double select_bandwidth(const Sample& sample, const KernelSpec& kernel,
                        const BandwidthSelector& selector) {
  selector.validate();
  switch (selector.method) {
    case BandwidthMethod::RuleOfThumb:
      return rule_of_thumb(sample);
    case BandwidthMethod::Fixed:
      return selector.fixed;
    case BandwidthMethod::Lscv: {
      const auto hs = selector.lscv_grid ? selector.lscv_grid->candidates()
                                         : default_lscv_candidates(sample);
      return lscv(sample, kernel, hs).bandwidth;
    }
    case BandwidthMethod::AmisePlugin:
      return amise_plugin(sample, kernel, selector.pilot);
  }
  throw InvalidArgument("unknown bandwidth method");
}

}  // namespace kdeforge
