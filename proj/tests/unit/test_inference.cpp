#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <boost/math/distributions/normal.hpp>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/error.hpp"
#include "kdeforge/inference.hpp"
#include "oracles.hpp"

using namespace kdeforge;

namespace {

PointMatrix grid_1d(double lo, double hi, std::size_t m) {
  PointMatrix g(static_cast<Eigen::Index>(m), 1);
  const auto xs = linspace(lo, hi, m);
  for (std::size_t i = 0; i < m; ++i) g(static_cast<Eigen::Index>(i), 0) = xs[i];
  return g;
}

PointMatrix single(double x) {
  PointMatrix g(1, 1);
  g(0, 0) = x;
  return g;
}

DensityModel normal_model(std::size_t n, std::uint64_t seed, std::optional<double> h = std::nullopt) {
  const auto s = Sample::from_values(oracle::normal_values(n, seed));
  return DensityModel(s, KernelSpec::gaussian(1), h ? *h : rule_of_thumb(s));
}

// A deterministic "sample" placed at the normal quantiles (i − 1/2)/n.
Sample normal_quantile_sample(std::size_t n) {
  boost::math::normal dist;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = boost::math::quantile(dist, (i + 0.5) / static_cast<double>(n));
  return Sample::from_values(v);
}

void check_ordered(const IntervalResult& r) {
  for (std::size_t g = 0; g < r.size(); ++g) {
    CHECK(r.lower[g] <= r.center[g]);
    CHECK(r.center[g] <= r.upper[g]);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("names") {
  CHECK(to_string(IntervalMethod::BootstrapBand) == "boot");
  CHECK(to_string(IntervalMethod::DebiasedBootstrapBand) == "debias");
  CHECK(to_string(IntervalMethod::EvtPlugin) == "evt");
  CHECK(to_string(InferenceTarget::True) == "true");
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("plug-in CI half-width by hand") {
  const double hw = plugin_half_width(0.4, KernelSpec::gaussian(1), 100, 0.5, 0.05);
  CHECK(hw == doctest::Approx(1.959964 * std::sqrt(0.2820948 * 0.4 / 50)).epsilon(1e-6));
  CHECK(hw == doctest::Approx(0.09311).epsilon(1e-4));
  CHECK(plugin_half_width(0.4, KernelSpec::gaussian(1), 100, 0.5, 1.0 - 1e-9) < 1e-9);
}

TEST_CASE("plug-in CI on a model, including a degenerate point") {
  const std::vector<double> one{0.0};
  const DensityModel m(Sample::from_values(one), KernelSpec::gaussian(1), 1.0);
  PointMatrix g(2, 1);
  g << 0.0, 100.0;
  const auto r = ci_plugin(m, g, 0.05);
  CHECK(r.method == IntervalMethod::Plugin);
  CHECK(r.target == InferenceTarget::Smoothed);
  CHECK(r.upper[0] - r.center[0] == doctest::Approx(plugin_half_width(r.center[0], m.kernel(), 1, 1.0, 0.05)));
  CHECK(r.center[1] == 0.0);
  CHECK(r.lower[1] == 0.0);
  CHECK(r.upper[1] == 0.0);
  CHECK(r.degenerate[1]);
  CHECK_FALSE(r.degenerate[0]);
  CHECK_FALSE(r.warnings.empty());
  CHECK_THROWS_AS(ci_plugin(m, g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ci_plugin(m, PointMatrix(1, 2), 0.05), DimensionMismatch);
}

TEST_CASE("bootstrap standard deviation path") {
  const std::vector<double> v{0.3, 0.5};
  CHECK(bootstrap_sd(v) == doctest::Approx(0.1414214).epsilon(1e-7));
  CHECK(normal_quantile(0.975) * bootstrap_sd(v) == doctest::Approx(0.27718).epsilon(1e-4));
}

TEST_CASE("identical observations give zero-width bootstrap intervals and bands") {
  const std::vector<double> same(6, 1.0);
  const DensityModel m(Sample::from_values(same), KernelSpec::gaussian(1), 0.5);
  const auto g = grid_1d(-1.0, 3.0, 9);
  const BootstrapPlan plan{50, 1};
  for (const IntervalResult& r :
       {ci_bootstrap_plugin(m, g, 0.05, plan), ci_bootstrap(m, g, 0.05, plan),
        static_cast<IntervalResult>(band_bootstrap(m, g, 0.05, plan))})
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r.upper[i] - r.lower[i] <= 1e-12 * (1.0 + r.center[i]));
  const auto d = band_debiased_bootstrap(m.sample(), m.kernel(), 0.5, g, 0.05, plan);
  CHECK(d.critical_value == doctest::Approx(0.0).scale(1.0));
  const auto dd = debias(m);
  for (std::size_t i = 0; i < d.size(); ++i) {
    Point p(1);
    p[0] = g(static_cast<Eigen::Index>(i), 0);
    CHECK(d.center[i] == doctest::Approx(dd.value_at(p)).epsilon(1e-12));
  }
}

TEST_CASE("replicate count checks") {
  const auto m = normal_model(50, 3);
  const auto g = single(0.0);
  CHECK_THROWS_AS(ci_bootstrap_plugin(m, g, 0.05, {1, 0}), InvalidArgument);
  CHECK_THROWS_AS(ci_bootstrap(m, g, 0.05, {19, 0}), InvalidArgument);
  CHECK_THROWS_AS(band_bootstrap(m, g, 0.05, {10, 0}), InvalidArgument);
  CHECK_THROWS_AS(ci_bootstrap(m, g, 1.0, {100, 0}), InvalidArgument);
  CHECK(quantile_rank(100, 0.0001) == 100);
}

TEST_CASE("bootstrap-plugin half-widths agree with plug-in ones") {
  int close = 0;
  for (int r = 0; r < 50; ++r) {
    const auto m = normal_model(500, 100 + r);
    auto x = m.sample().column(0);
    std::nth_element(x.begin(), x.begin() + 250, x.end());
    const auto g = single(x[250]);
    const double a = ci_plugin(m, g, 0.05).upper[0] - ci_plugin(m, g, 0.05).center[0];
    const auto b = ci_bootstrap_plugin(m, g, 0.05, {500, static_cast<std::uint64_t>(r)});
    const double hb = b.upper[0] - b.center[0];
    if (std::abs(hb - a) <= 0.3 * a) ++close;
  }
  CHECK(close >= 40);
}

TEST_CASE("bootstrap quantile intervals agree with bootstrap-plugin ones at the mode") {
  int close = 0;
  for (int r = 0; r < 50; ++r) {
    const auto m = normal_model(500, 200 + r);
    const auto g = single(0.0);
    const BootstrapPlan plan{1000, static_cast<std::uint64_t>(r)};
    const auto a = ci_bootstrap_plugin(m, g, 0.05, plan);
    const auto b = ci_bootstrap(m, g, 0.05, plan);
    const bool lo = std::abs(b.lower[0] - a.lower[0]) <= 0.15 * std::abs(a.lower[0]);
    const bool hi = std::abs(b.upper[0] - a.upper[0]) <= 0.15 * std::abs(a.upper[0]);
    if (lo && hi) ++close;
  }
  CHECK(close > 25);
}

TEST_CASE("extreme-value quantile conventions") {
  // −log(0.05)/2 = 1.4978661; −log(1.4978661) = −0.4040415.
  CHECK(-std::log(0.05) / 2.0 == doctest::Approx(1.4978661).epsilon(1e-7));
  CHECK(evt_quantile(0.05, EvtQuantile::AsPrinted) == doctest::Approx(-0.4040415).epsilon(1e-6));
  CHECK(evt_quantile(0.05) == doctest::Approx(-std::log(-std::log(0.95) / 2.0)));
  // The limit-distribution quantile inverts exp(−2 e^{−t}).
  const double t = evt_quantile(0.1);
  CHECK(std::exp(-2.0 * std::exp(-t)) == doctest::Approx(0.9));
}

TEST_CASE("extreme-value band") {
  const auto m = normal_model(1000, 5, 0.2);
  const auto g = grid_1d(-2.5, 2.5, 101);
  const auto band = band_plugin_evt(m, g, 0.05);
  const auto ci = ci_plugin(m, g, 0.05);
  check_ordered(band);
  CHECK_FALSE(band.constant_width);
  CHECK_FALSE(band.warnings.empty());
  CHECK(band.warnings.front().rfind("slow-convergence", 0) == 0);
  for (std::size_t i = 0; i < band.size(); ++i) {
    CHECK(band.upper[i] - band.center[i] > ci.upper[i] - ci.center[i]);
    const double ratio = (band.upper[i] - band.center[i]) / std::sqrt(band.center[i]);
    CHECK(ratio == doctest::Approx((band.upper[0] - band.center[0]) / std::sqrt(band.center[0])).epsilon(1e-10));
  }
  CHECK_THROWS_AS(band_plugin_evt(normal_model(100, 1, 1.0), g, 0.05), InvalidArgument);
  const DensityModel sph(m.sample(), KernelSpec::spherical(1), 0.2);
  CHECK_THROWS_AS(band_plugin_evt(sph, g, 0.05), Unsupported);
}

TEST_CASE("bootstrap band dominates pointwise bootstrap intervals") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = normal_model(300, 300 + seed);
    const auto g = grid_1d(-3, 3, 64);
    const BootstrapPlan plan{400, seed};
    const auto band = band_bootstrap(m, g, 0.05, plan);
    const auto ci = ci_bootstrap(m, g, 0.05, plan);
    check_ordered(band);
    check_ordered(ci);
    CHECK(band.constant_width);
    double widest = 0.0;
    for (std::size_t i = 0; i < ci.size(); ++i) widest = std::max(widest, ci.upper[i] - ci.center[i]);
    CHECK(band.critical_value >= widest);
    for (std::size_t i = 0; i < band.size(); ++i) {
      CHECK(band.upper[i] - band.center[i] == doctest::Approx(band.critical_value));
      CHECK(band.center[i] - band.lower[i] == doctest::Approx(band.critical_value));
    }
  }
}

TEST_CASE("band_from_replicates with forced replicates") {
  PointMatrix pts(3, 1);
  pts << 0, 1, 2;
  const std::vector<double> center{1.0, 2.0, 3.0};
  Matrix reps(3, 4);
  reps.col(0) << 1.1, 2.0, 3.0;
  reps.col(1) << 1.0, 2.2, 3.0;
  reps.col(2) << 1.0, 2.0, 2.7;
  reps.col(3) << 1.4, 2.0, 3.0;
  const auto band = band_from_replicates(pts, center, reps, 0.25, IntervalMethod::BootstrapBand,
                                         InferenceTarget::Smoothed);
  CHECK(band.critical_value == doctest::Approx(0.3));
  Matrix same(3, 4);
  for (int j = 0; j < 4; ++j) same.col(j) = Eigen::Map<const Eigen::VectorXd>(center.data(), 3);
  CHECK(band_from_replicates(pts, center, same, 0.25, IntervalMethod::BootstrapBand, InferenceTarget::Smoothed)
            .critical_value == 0.0);
}

TEST_CASE("debias arithmetic") {
  CHECK(debiased_value(0.4, -0.8, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(debiased_value(0.4, 0.0, 0.5, 1.0) == 0.4);
  const std::vector<double> one{0.0};
  const DensityModel s(Sample::from_values(one), KernelSpec::spherical(1), 1.0);
  CHECK_THROWS_AS(debias(s), Unsupported);
}

TEST_CASE("debiased estimate approaches the KDE like h^2") {
  const Sample s = normal_quantile_sample(20000);
  Point x(1);
  x[0] = 0.3;
  std::vector<double> lh, ld;
  for (double h : {0.4, 0.2, 0.1}) {
    const DensityModel m(s, KernelSpec::gaussian(1), h);
    lh.push_back(std::log(h));
    ld.push_back(std::log(std::abs(debias(m).value_at(x) - m.density_at(x))));
  }
  const double slope = (ld[2] - ld[0]) / (lh[2] - lh[0]);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("debiased design reproduces the debiased estimator") {
  const auto m = normal_model(120, 7, 0.4);
  const auto g = grid_1d(-3, 3, 25);
  const Matrix D = debiased_design(m, g);
  const Eigen::VectorXd mean = D.rowwise().mean();
  const Matrix K = kde_design(m, g);
  const Eigen::VectorXd kmean = K.rowwise().mean();
  const auto dd = debias(m);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    Point p(1);
    p[0] = g(i, 0);
    CHECK(mean[i] == doctest::Approx(dd.value_at(p)).epsilon(1e-12));
    CHECK(kmean[i] == doctest::Approx(m.density_at(p)).epsilon(1e-12));
    CHECK(dd.display_value_at(p) == std::max(dd.value_at(p), 0.0));
  }
}

TEST_CASE("debiased band keeps a negative center and clips only the display curve") {
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(i < 15 ? -2.0 + 0.01 * i : 2.0 + 0.01 * i);
  const DensityModel m(Sample::from_values(x), KernelSpec::gaussian(1), 0.25);
  const auto g = grid_1d(-4, 4, 161);
  const auto band = band_debiased_bootstrap(m.sample(), m.kernel(), 0.25, g, 0.05, {100, 3});
  CHECK(band.target == InferenceTarget::True);
  CHECK(*std::min_element(band.center.begin(), band.center.end()) < 0.0);
  for (std::size_t i = 0; i < band.size(); ++i) CHECK(band.display_center[i] == std::max(band.center[i], 0.0));
}

TEST_CASE("debiased band is usually wider than the plain band") {
  int wider = 0;
  for (int r = 0; r < 50; ++r) {
    const auto m = normal_model(500, 400 + r);
    const auto g = grid_1d(-3, 3, 128);
    const BootstrapPlan plan{500, static_cast<std::uint64_t>(r)};
    const auto plain = band_bootstrap(m, g, 0.05, plan);
    const auto deb = band_debiased_bootstrap(m.sample(), m.kernel(), m.bandwidth(), g, 0.05, plan);
    if (deb.critical_value >= plain.critical_value) ++wider;
  }
  CHECK(wider > 25);
}

TEST_CASE("property: widths shrink with n") {
  const auto g = grid_1d(-2, 2, 32);
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> widths;
  for (int r = 0; r < 20; ++r)
    for (std::size_t n : {500u, 4000u}) {
      const auto m = normal_model(n, 500 + r + n);
      const BootstrapPlan plan{200, static_cast<std::uint64_t>(r)};
      auto width = [](const IntervalResult& res) {
        double w = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) w += res.upper[i] - res.lower[i];
        return w / res.size();
      };
      const std::vector<std::pair<std::string, double>> all{
          {"plugin", width(ci_plugin(m, g, 0.05))},
          {"bootstrap-plugin", width(ci_bootstrap_plugin(m, g, 0.05, plan))},
          {"bootstrap", width(ci_bootstrap(m, g, 0.05, plan))},
          {"evt", width(band_plugin_evt(m, g, 0.05))},
          {"boot", width(band_bootstrap(m, g, 0.05, plan))},
          {"debias", width(band_debiased_bootstrap(m.sample(), m.kernel(), m.bandwidth(), g, 0.05, plan))}};
      for (const auto& [name, w] : all) (n == 500 ? widths[name].first : widths[name].second).push_back(w);
    }
  for (const auto& [name, w] : widths) {
    INFO(name);
    CHECK(median(w.second) < median(w.first));
  }
}

TEST_CASE("property: reproducible and nested across levels") {
  const auto m = normal_model(400, 9);
  const auto g = grid_1d(-3, 3, 50);
  const BootstrapPlan plan{300, 77};
  const auto a = band_bootstrap(m, g, 0.05, plan);
  const auto b = band_bootstrap(m, g, 0.05, plan);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  const auto d1 = band_debiased_bootstrap(m.sample(), m.kernel(), m.bandwidth(), g, 0.05, plan);
  const auto d2 = band_debiased_bootstrap(m.sample(), m.kernel(), m.bandwidth(), g, 0.05, plan);
  CHECK(d1.upper == d2.upper);
  const auto wide = band_bootstrap(m, g, 0.01, plan);
  const auto narrow = band_bootstrap(m, g, 0.10, plan);
  const auto pw = ci_bootstrap(m, g, 0.01, plan);
  const auto pn = ci_bootstrap(m, g, 0.10, plan);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    CHECK(wide.lower[i] <= narrow.lower[i]);
    CHECK(wide.upper[i] >= narrow.upper[i]);
    CHECK(pw.lower[i] <= pn.lower[i]);
    CHECK(pw.upper[i] >= pn.upper[i]);
  }
}
