#include "kdeforge/coverage.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/bootstrap.hpp"
#include "kdeforge/error.hpp"
#include "kdeforge/estimator.hpp"
#include "parallel.hpp"

namespace kdeforge {

namespace {

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mu, double sd) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::numbers::sqrt2));
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("truth: bad number '" + item + "'");
    }
    if (used != item.size()) throw InvalidArgument("truth: bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Truth Truth::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidArgument("normal truth needs sd > 0");
  Truth t;
  t.mean1 = t.mean2 = mean;
  t.sd1 = t.sd2 = sd;
  return t;
}

Truth Truth::mixture(double weight, double mean1, double mean2, double sd1, double sd2) {
  if (!(weight > 0.0 && weight < 1.0)) throw InvalidArgument("mixture weight must lie in (0, 1)");
  if (!(sd1 > 0.0 && sd2 > 0.0)) throw InvalidArgument("mixture needs positive sds");
  return Truth{Kind::NormalMixture, weight, mean1, mean2, sd1, sd2};
}

double Truth::density(double x) const {
  if (kind == Kind::Normal) return normal_pdf(x, mean1, sd1);
  return weight * normal_pdf(x, mean1, sd1) + (1.0 - weight) * normal_pdf(x, mean2, sd2);
}

double Truth::smoothed_density(double x, double h) const {
  const double s1 = std::sqrt(sd1 * sd1 + h * h);
  if (kind == Kind::Normal) return normal_pdf(x, mean1, s1);
  const double s2 = std::sqrt(sd2 * sd2 + h * h);
  return weight * normal_pdf(x, mean1, s1) + (1.0 - weight) * normal_pdf(x, mean2, s2);
}

double Truth::cdf(double x) const {
  if (kind == Kind::Normal) return normal_cdf(x, mean1, sd1);
  return weight * normal_cdf(x, mean1, sd1) + (1.0 - weight) * normal_cdf(x, mean2, sd2);
}

double Truth::mean() const {
  if (kind == Kind::Normal) return mean1;
  return weight * mean1 + (1.0 - weight) * mean2;
}

double Truth::sd() const {
  if (kind == Kind::Normal) return sd1;
  const double m = mean();
  const double second = weight * (sd1 * sd1 + mean1 * mean1) + (1.0 - weight) * (sd2 * sd2 + mean2 * mean2);
  return std::sqrt(second - m * m);
}

std::pair<double, double> Truth::central_region() const {
  return {mean() - 3.0 * sd(), mean() + 3.0 * sd()};
}

Sample Truth::draw(std::size_t n, std::mt19937_64& rng) const {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  std::vector<double> values(n);
  for (auto& v : values) {
    const bool first = kind == Kind::Normal || u(rng) < weight;
    v = first ? mean1 + sd1 * z(rng) : mean2 + sd2 * z(rng);
  }
  return Sample::from_values(values);
}

std::string Truth::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind == Kind::Normal)
    os << "normal:" << mean1 << ',' << sd1;
  else
    os << "mixture:" << weight << ',' << mean1 << ',' << mean2 << ',' << sd1 << ',' << sd2;
  return os.str();
}

Truth parse_truth(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::vector<double>{}
                                                    : parse_numbers(text.substr(colon + 1));
  if (name == "normal") {
    if (args.empty()) return Truth::normal();
    if (args.size() == 2) return Truth::normal(args[0], args[1]);
    throw InvalidArgument("normal truth takes mu,sigma");
  }
  if (name == "mixture") {
    if (args.size() != 5) throw InvalidArgument("mixture truth takes w,mu1,mu2,sigma1,sigma2");
    return Truth::mixture(args[0], args[1], args[2], args[3], args[4]);
  }
  throw InvalidArgument("unknown truth '" + std::string(text) + "'");
}

InferenceTarget CoverageConfig::resolved_target() const {
  if (target) return *target;
  return method == IntervalMethod::DebiasedBootstrapBand ? InferenceTarget::True : InferenceTarget::Smoothed;
}

void CoverageConfig::validate() const {
  if (trials < 1) throw InvalidArgument("coverage needs trials >= 1");
  if (n < 2) throw InvalidArgument("coverage needs n >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (grid < 1) throw InvalidArgument("coverage grid needs at least one point");
  if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (method == IntervalMethod::RocBootstrapBand) throw InvalidArgument("ROC bands are not simulated here");
  if (resolved_target() == InferenceTarget::Smoothed && kernel != KernelFamily::Gaussian)
    throw Unsupported("closed-form smoothed target needs the gaussian kernel");
}

TrialOutcome run_coverage_trial(const CoverageConfig& config, std::size_t trial) {
  std::mt19937_64 rng(derive_seed(config.seed, trial, 0));
  const Sample sample = config.truth.draw(config.n, rng);
  const KernelSpec kernel(config.kernel, 1);
  const double h = config.bandwidth ? *config.bandwidth : rule_of_thumb(sample);
  const BootstrapPlan plan{config.replicates, derive_seed(config.seed, trial, 1)};

  PointMatrix grid;
  if (config.point) {
    grid.resize(1, 1);
    grid(0, 0) = *config.point;
  } else {
    const auto [lo, hi] = config.truth.central_region();
    const auto xs = linspace(lo, hi, config.grid);
    grid.resize(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) grid(static_cast<Eigen::Index>(i), 0) = xs[i];
  }

  const DensityModel model(sample, kernel, h);
  IntervalResult result;
  switch (config.method) {
    case IntervalMethod::Plugin: result = ci_plugin(model, grid, config.alpha); break;
    case IntervalMethod::BootstrapPlugin: result = ci_bootstrap_plugin(model, grid, config.alpha, plan); break;
    case IntervalMethod::Bootstrap: result = ci_bootstrap(model, grid, config.alpha, plan); break;
    case IntervalMethod::EvtPlugin: result = band_plugin_evt(model, grid, config.alpha); break;
    case IntervalMethod::BootstrapBand: result = band_bootstrap(model, grid, config.alpha, plan); break;
    case IntervalMethod::DebiasedBootstrapBand:
      result = band_debiased_bootstrap(sample, kernel, h, grid, config.alpha, plan);
      break;
    case IntervalMethod::RocBootstrapBand: throw InvalidArgument("ROC bands are not simulated here");
  }

  const bool smoothed = config.resolved_target() == InferenceTarget::Smoothed;
  TrialOutcome out;
  out.bandwidth = h;
  out.covered = true;
  double width = 0.0;
  for (std::size_t g = 0; g < result.size(); ++g) {
    const double x = grid(static_cast<Eigen::Index>(g), 0);
    const double truth = smoothed ? config.truth.smoothed_density(x, h) : config.truth.density(x);
    if (truth < result.lower[g] || truth > result.upper[g]) out.covered = false;
    width += result.upper[g] - result.lower[g];
  }
  out.mean_width = width / static_cast<double>(result.size());
  return out;
}

CoverageReport simulate_coverage(const CoverageConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  CoverageReport report;
  report.method = config.method;
  report.target = config.resolved_target();
  report.nominal = 1.0 - config.alpha;
  report.trials = config.trials;
  std::tie(report.region_lo, report.region_hi) = config.truth.central_region();
  report.outcomes.resize(config.trials);
  detail::parallel_for(config.trials, [&](std::size_t t) { report.outcomes[t] = run_coverage_trial(config, t); });
  double width = 0.0;
  for (const auto& o : report.outcomes) {
    report.covered += o.covered ? 1 : 0;
    width += o.mean_width;
  }
  report.coverage = static_cast<double>(report.covered) / static_cast<double>(config.trials);
  report.mean_width = width / static_cast<double>(config.trials);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace kdeforge
