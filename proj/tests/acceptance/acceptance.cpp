// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/bootstrap.hpp"
#include "kdeforge/coverage.hpp"
#include "kdeforge/distfunc.hpp"
#include "kdeforge/estimator.hpp"
#include "kdeforge/geometry.hpp"
#include "kdeforge/inference.hpp"
#include "kdeforge/io.hpp"
#include "kdeforge/threads.hpp"
#include "kdeforge/topology.hpp"
#include "oracles.hpp"

#ifdef KDEFORGE_HAVE_CLI
#include "kdeforge/cli.hpp"
#endif

using namespace kdeforge;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Sample values_sample(const std::vector<double>& v) { return Sample::from_values(v); }

// 1. MISE rate
Verdict mise_rate() {
  const double curvature = 3.0 / (8.0 * std::sqrt(std::numbers::pi));
  const KernelSpec k = KernelSpec::gaussian(1);
  const std::vector<std::size_t> ns{250, 1000, 4000};
  const auto xs = linspace(-7.0, 7.0, 2801);
  const double dx = xs[1] - xs[0];
  std::vector<double> log_n, log_mise;
  std::string detail;
  for (std::size_t n : ns) {
    const double h = amise_optimal_bandwidth(k, curvature, n);
    double total = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      const Sample s = values_sample(oracle::normal_values(n, derive_seed(101, trial, n)));
      const DensityModel m(s, k, h);
      const auto grid = m.evaluate_grid({xs}, EvalPath::Truncated);
      double ise = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = grid.value(i) - oracle::normal_pdf(xs[i]);
        ise += (i == 0 || i + 1 == xs.size() ? 0.5 : 1.0) * e * e;
      }
      total += ise * dx;
    }
    const double mise = total / 50.0;
    log_n.push_back(std::log(static_cast<double>(n)));
    log_mise.push_back(std::log(mise));
    detail += fmt("n=%zu h=%.4f mise=%.3g; ", n, h, mise);
  }
  const double mx = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
  const double my = (log_mise[0] + log_mise[1] + log_mise[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (log_n[i] - mx) * (log_mise[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope + 0.8) <= 0.15, detail + fmt("slope=%.4f (want -0.8 +/- 0.15)", slope)};
}

// 2. Derivatives vs central differences
Verdict derivatives() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> z(0.0, 1.0);
  PointMatrix data(300, 2);
  for (Eigen::Index i = 0; i < data.rows(); ++i) data.row(i) << z(rng), 0.5 * z(rng) + 0.3 * data(i, 0);
  const DensityModel m(Sample(data), KernelSpec::gaussian(2), 0.5);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(-1.5, 1.5);
  const double step_g = 1e-5, step_h = 1e-4;
  double worst_g = 0.0, worst_h = 0.0;
  for (int p = 0; p < 100; ++p) {
    Point x(2);
    x << ux(rng), uy(rng);
    const Point g = m.gradient_at(x);
    const Matrix H = m.hessian_at(x);
    Point gfd(2);
    Matrix hfd(2, 2);
    const auto f = [&](double a, double b) {
      Point q(2);
      q << x[0] + a, x[1] + b;
      return m.density_at(q);
    };
    gfd[0] = (f(step_g, 0) - f(-step_g, 0)) / (2 * step_g);
    gfd[1] = (f(0, step_g) - f(0, -step_g)) / (2 * step_g);
    const double f0 = f(0, 0);
    hfd(0, 0) = (f(step_h, 0) - 2 * f0 + f(-step_h, 0)) / (step_h * step_h);
    hfd(1, 1) = (f(0, step_h) - 2 * f0 + f(0, -step_h)) / (step_h * step_h);
    hfd(0, 1) = hfd(1, 0) =
        (f(step_h, step_h) - f(step_h, -step_h) - f(-step_h, step_h) + f(-step_h, -step_h)) / (4 * step_h * step_h);
    worst_g = std::max(worst_g, (g - gfd).norm() / g.norm());
    worst_h = std::max(worst_h, (H - hfd).norm() / H.norm());
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-6,
          fmt("max relative error gradient=%.2e hessian=%.2e (want <= 1e-6)", worst_g, worst_h)};
}

CoverageConfig normal_config(IntervalMethod method, std::size_t n, std::size_t trials, std::uint64_t seed) {
  CoverageConfig c;
  c.truth = Truth::normal();
  c.method = method;
  c.n = n;
  c.trials = trials;
  c.seed = seed;
  return c;
}

// 3. Pointwise coverage of p_h at 0
Verdict pointwise_coverage() {
  bool ok = true;
  std::string detail;
  for (auto method : {IntervalMethod::Plugin, IntervalMethod::BootstrapPlugin, IntervalMethod::Bootstrap}) {
    auto c = normal_config(method, 1000, 300, 303);
    c.point = 0.0;
    const auto r = simulate_coverage(c);
    ok = ok && r.coverage >= 0.92 && r.coverage <= 0.98;
    detail += fmt("%s=%.3f ", std::string(to_string(method)).c_str(), r.coverage);
    if (method == IntervalMethod::Plugin) {
      // Coverage implied by the exact variance of p̂(0) at the mean bandwidth.
      double h = 0.0;
      for (const auto& o : r.outcomes) h += o.bandwidth;
      h /= static_cast<double>(r.outcomes.size());
      const double mu_k = 0.5 / std::sqrt(std::numbers::pi);
      const double ph = oracle::normal_pdf(0.0, 0.0, std::sqrt(1.0 + h * h));
      const double exact = (mu_k / h * oracle::normal_pdf(0.0, 0.0, std::sqrt(1.0 + 0.5 * h * h)) - ph * ph) / 1000.0;
      const double z = 1.959964 * std::sqrt(mu_k * ph / (1000.0 * h) / exact);
      detail += fmt("(plugin predicted %.3f at h=%.3f) ", 2.0 * oracle::normal_cdf(z) - 1.0, h);
    }
  }
  return {ok, detail + "(want [0.92, 0.98])"};
}

// 4. Bootstrap band coverage of p_h
Verdict band_coverage() {
  const auto r = simulate_coverage(normal_config(IntervalMethod::BootstrapBand, 1000, 200, 404));
  return {r.coverage >= 0.92, fmt("coverage=%.3f over %zu trials (want >= 0.92)", r.coverage, r.trials)};
}

// 5 and 6 share paired runs at n=2000.
struct PairedRuns {
  CoverageReport debiased;
  CoverageReport plain;
};

const PairedRuns& paired_runs() {
  static const PairedRuns runs = [] {
    PairedRuns r;
    r.debiased = simulate_coverage(normal_config(IntervalMethod::DebiasedBootstrapBand, 2000, 200, 505));
    auto plain = normal_config(IntervalMethod::BootstrapBand, 2000, 200, 505);
    plain.target = InferenceTarget::True;
    r.plain = simulate_coverage(plain);
    return r;
  }();
  return runs;
}

Verdict debiased_coverage() {
  const auto& r = paired_runs();
  std::size_t wider = 0;
  for (std::size_t t = 0; t < r.debiased.trials; ++t)
    if (r.debiased.outcomes[t].mean_width > r.plain.outcomes[t].mean_width) ++wider;
  const double frac = static_cast<double>(wider) / static_cast<double>(r.debiased.trials);
  return {r.debiased.coverage >= 0.90 && frac >= 0.60,
          fmt("coverage of p=%.3f (want >= 0.90), wider on %.3f of seeds (want >= 0.60)", r.debiased.coverage, frac)};
}

Verdict undercoverage() {
  const auto& r = paired_runs();
  const double gap = r.debiased.coverage - r.plain.coverage;
  return {gap >= 0.05, fmt("plain=%.3f debiased=%.3f gap=%.3f (want >= 0.05)", r.plain.coverage,
                           r.debiased.coverage, gap)};
}

DensityModel bimodal_model(std::uint64_t seed) {
  return {values_sample(oracle::bimodal_values(400, seed, -5.0, 5.0)), KernelSpec::gaussian(1), 1.0};
}

// 7. Mode recovery
Verdict mode_recovery() {
  const auto m = bimodal_model(707);
  const auto xs = linspace(-9.0, 9.0, 18001);
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = m.density_at(Point::Constant(1, xs[i]));
  auto peaks = oracle::local_maxima(v);
  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  const auto modes = find_modes(m);
  if (modes.count() != 2 || peaks.size() < 2)
    return {false, fmt("found %zu modes, oracle %zu peaks", modes.count(), peaks.size())};
  std::vector<double> oracle_modes{xs[peaks[0]], xs[peaks[1]]};
  std::sort(oracle_modes.begin(), oracle_modes.end());
  const double err =
      std::max(std::abs(modes.modes(0, 0) - oracle_modes[0]), std::abs(modes.modes(1, 0) - oracle_modes[1]));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = m.sample().data()(static_cast<Eigen::Index>(i), 0);
    const long a = modes.assignment[i];
    if (a == ModeSet::kUnassigned) continue;
    const bool mode_left = modes.modes(a, 0) < 0.0;
    if (mode_left == (std::abs(x + 5.0) < std::abs(x - 5.0))) ++correct;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(m.size());
  return {err <= 0.1 && acc >= 0.99,
          fmt("modes=2 max location error=%.2e (want <= 0.1) accuracy=%.4f (want >= 0.99)", err, acc)};
}

// 8. Cluster tree and persistence
Verdict tree_persistence() {
  const auto m = bimodal_model(808);
  const auto grid = m.evaluate_grid({linspace(-9.0, 9.0, 1801)});
  const auto tree = cluster_tree(grid);
  const auto leaves = tree.leaf_count();

  // Flood fill at each distinct level, descending: the merge level is the
  // first level where two components become one.
  const auto& v = grid.values();
  std::vector<double> levels(v);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double oracle_merge = std::nan("");
  int previous = 0;
  for (double lv : levels) {
    std::vector<bool> mask(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mask[i] = v[i] >= lv;
    const int c = oracle::flood_fill_components(mask, v.size(), 1);
    if (previous == 2 && c == 1) {
      oracle_merge = lv;
      break;
    }
    previous = c;
  }
  double merge = std::nan("");
  for (const auto& node : tree.nodes)
    if (!node.children.empty()) merge = node.birth;
  double step = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) step = std::max(step, std::abs(v[i] - v[i - 1]));
  const bool merge_ok = std::abs(merge - oracle_merge) <= step;

  const auto base = persistence_diagram(tree);
  std::mt19937_64 rng(8080);
  bool stable = true;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> noise(-0.002 * (trial + 1), 0.002 * (trial + 1));
    std::vector<double> w(v);
    double sup = 0.0;
    for (double& x : w) {
      const double e = noise(rng);
      x += e;
      sup = std::max(sup, std::abs(e));
    }
    const double d = bottleneck_distance(base, persistence_diagram(cluster_tree(grid.with_values(w))));
    stable = stable && d <= sup + 1e-15;
    worst_ratio = std::max(worst_ratio, d / sup);
  }
  return {leaves == 2 && merge_ok && stable,
          fmt("leaves=%zu merge=%.6f oracle=%.6f step=%.2e; max bottleneck/sup=%.4f (want <= 1)", leaves, merge,
              oracle_merge, step, worst_ratio)};
}

// 9. Ridge on a circle
Verdict ridge_circle() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> z(0.0, 0.2);
  PointMatrix data(800, 2);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double t = u(rng), r = 3.0 + z(rng);
    data.row(i) << r * std::cos(t), r * std::sin(t);
  }
  const DensityModel m(Sample(data), KernelSpec::gaussian(2), 0.5);
  const auto ridge = scms(m);
  std::size_t converged = 0;
  for (auto st : ridge.status)
    if (st == RidgeStatus::Converged) ++converged;
  std::size_t near = 0;
  bool all_ok = true;
  for (std::size_t i = 0; i < ridge.size(); ++i) {
    const Point p = ridge.points.row(static_cast<Eigen::Index>(i)).transpose();
    if (std::abs(p.norm() - 3.0) <= 0.2) ++near;
    all_ok = all_ok && ridge.projected_gradient_norms[i] <= ridge.gradient_tol && ridge.lambda2[i] < 0.0;
  }
  const double frac = converged ? static_cast<double>(near) / static_cast<double>(converged) : 0.0;
  return {frac >= 0.85 && all_ok && ridge.size() > 0,
          fmt("converged=%zu accepted=%zu within 0.2: %.4f (want >= 0.85); conditions hold on all: %s", converged,
              ridge.size(), frac, all_ok ? "yes" : "no")};
}

// 10. Smoothed CDF
Verdict smoothed_cdf() {
  auto v = oracle::normal_values(5000, 1010);
  const double h = std::pow(5000.0, -1.0 / 3.0);
  const SmoothedCdf F(DensityModel(values_sample(v), KernelSpec::gaussian(1), h));
  std::sort(v.begin(), v.end());
  double sup_true = 0.0, sup_emp = 0.0;
  for (double x : linspace(-5.0, 5.0, 4001)) sup_true = std::max(sup_true, std::abs(F.cdf_at(x) - oracle::normal_cdf(x)));
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = F.cdf_at(v[i]);
    sup_true = std::max(sup_true, std::abs(f - oracle::normal_cdf(v[i])));
    // ECDF jumps at each order statistic; check both sides.
    sup_emp = std::max({sup_emp, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return {sup_true < 0.03 && sup_emp < 0.02,
          fmt("sup|F-Phi|=%.4f (want < 0.03) sup|F-ECDF|=%.4f (want < 0.02)", sup_true, sup_emp)};
}

// 11. ROC
Verdict roc() {
  const KernelSpec k = KernelSpec::gaussian(1);
  const auto t = roc_t_grid();
  const Sample a = values_sample(oracle::normal_values(2000, 1111));
  const Sample b = values_sample(oracle::normal_values(2000, 1112));
  const auto same = roc_curve(a, b, k, rule_of_thumb(a), rule_of_thumb(b), t);
  double sup = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) sup = std::max(sup, std::abs(same.roc[i] - t[i]));

  const Sample c = values_sample(oracle::normal_values(2000, 1113, 1.0));
  const std::vector<double> half{0.5};
  const double r05 = roc_curve(a, c, k, rule_of_thumb(a), rule_of_thumb(c), half).roc[0];
  const double pop = oracle::normal_cdf(1.0);

  const std::size_t trials = 100;
  std::vector<char> covered(trials, 0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Sample f = values_sample(oracle::normal_values(500, derive_seed(1114, trial, 0)));
    const Sample g = values_sample(oracle::normal_values(500, derive_seed(1114, trial, 1)));
    const auto band = roc_band(f, g, k, rule_of_thumb(f), rule_of_thumb(g), t, 0.05,
                               {1000, derive_seed(1114, trial, 2)});
    bool in = true;
    for (std::size_t i = 0; i < t.size(); ++i) in = in && band.lower[i] <= t[i] && t[i] <= band.upper[i];
    covered[trial] = in;
  }
  const double cov = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) / trials;
  return {sup < 0.03 && std::abs(r05 - pop) <= 0.05 && cov >= 0.90,
          fmt("identity sup=%.4f (want < 0.03) ROC(0.5)=%.4f vs %.4f (want +/- 0.05) band coverage=%.2f (want >= 0.90)",
              sup, r05, pop, cov)};
}

// 12. Determinism
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string band_bytes(const DensityModel& m, const PointMatrix& grid, std::uint64_t seed) {
  std::ostringstream out;
  io::write_band_json(out, band_bootstrap(m, grid, 0.05, {400, seed}));
  return out.str();
}

Verdict determinism() {
  std::vector<std::string> failures;
  const Sample s = values_sample(oracle::bimodal_values(600, 1212, -2.0, 2.0));
  const DensityModel m(s, KernelSpec::gaussian(1), 0.4);
  PointMatrix grid(200, 1);
  const auto xs = linspace(-5.0, 5.0, 200);
  for (Eigen::Index i = 0; i < 200; ++i) grid(i, 0) = xs[static_cast<std::size_t>(i)];

  set_max_threads(1);
  const std::string serial = band_bytes(m, grid, 7);
  CoverageConfig cc = normal_config(IntervalMethod::BootstrapBand, 300, 24, 12);
  cc.replicates = 200;
  const auto cov_serial = simulate_coverage(cc);
  set_max_threads(4);
  if (band_bytes(m, grid, 7) != serial) failures.push_back("band 1 vs 4 threads");
  const auto cov_parallel = simulate_coverage(cc);
  for (std::size_t t = 0; t < cc.trials; ++t)
    if (cov_serial.outcomes[t].covered != cov_parallel.outcomes[t].covered ||
        cov_serial.outcomes[t].mean_width != cov_parallel.outcomes[t].mean_width) {
      failures.push_back("coverage 1 vs 4 threads");
      break;
    }
  // Concurrent callers.
  std::vector<std::string> concurrent(3);
  {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < concurrent.size(); ++i)
      pool.emplace_back([&, i] { concurrent[i] = band_bytes(m, grid, 7); });
    for (auto& th : pool) th.join();
  }
  for (const auto& c : concurrent)
    if (c != serial) failures.push_back("concurrent band");
  set_max_threads(0);

  std::size_t commands = 0;
#ifdef KDEFORGE_HAVE_CLI
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / fs::path("kdeforge_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream d1(dir / "one.csv");
    for (std::size_t i = 0; i < s.size(); ++i) d1 << io::format_number(s.data()(static_cast<Eigen::Index>(i), 0)) << "\n";
    std::ofstream g(dir / "groups.csv");
    g << "group,value\n";
    const auto hv = oracle::normal_values(300, 1213);
    const auto dv = oracle::normal_values(300, 1214, 1.0);
    for (double x : hv) g << "healthy," << io::format_number(x) << "\n";
    for (double x : dv) g << "diseased," << io::format_number(x) << "\n";
  }
  const std::string one = (dir / "one.csv").string(), groups = (dir / "groups.csv").string();
  const std::vector<std::vector<std::string>> runs{
      {"density", "-i", one},
      {"bandwidth", "-i", one, "--bandwidth-method", "lscv"},
      {"ci", "-i", one, "--method", "bootstrap", "--seed", "3", "--grid", "64"},
      {"band", "-i", one, "--method", "boot", "--seed", "4", "--grid", "64"},
      {"band", "-i", one, "--method", "debias", "--seed", "5", "--grid", "64"},
      {"modes", "-i", one},
      {"tree", "-i", one},
      {"morse", "-i", one, "--grid", "64"},
      {"roc", "-i", groups, "--group-col", "group", "--band", "--seed", "6", "--boot", "200"},
      {"simulate", "--truth", "normal", "--n", "300", "--trials", "16", "--seed", "8", "--boot", "200"},
  };
  for (const auto& threads : {std::size_t{1}, std::size_t{4}}) {
    set_max_threads(threads);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (int rep = 0; rep < 2; ++rep) {
        std::vector<std::string> args{"kdeforge"};
        args.insert(args.end(), runs[r].begin(), runs[r].end());
        const auto out = dir / ("out_" + std::to_string(r) + "_" + std::to_string(threads) + "_" + std::to_string(rep));
        args.push_back("-o");
        args.push_back(out.string());
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream sout, serr;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), sout, serr);
        if (code != 0) failures.push_back(runs[r][0] + " exit " + std::to_string(code) + ": " + serr.str());
      }
      ++commands;
    }
  }
  set_max_threads(0);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto ref = slurp(dir / ("out_" + std::to_string(r) + "_1_0"));
    if (ref.empty()) failures.push_back(runs[r][0] + " empty output");
    for (const char* tag : {"_1_1", "_4_0", "_4_1"})
      if (slurp(dir / ("out_" + std::to_string(r) + tag)) != ref) failures.push_back(runs[r][0] + " differs " + tag);
  }
  fs::remove_all(dir);
#endif
  std::string detail = fmt("library band/coverage at 1 and 4 threads, 3 concurrent callers, %zu CLI commands x4 runs",
                           commands / 2);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"MISE rate", mise_rate},
      {"derivative correctness", derivatives},
      {"pointwise CI coverage", pointwise_coverage},
      {"bootstrap band coverage", band_coverage},
      {"debiased band coverage", debiased_coverage},
      {"plain band undercoverage", undercoverage},
      {"mode recovery", mode_recovery},
      {"cluster tree / persistence", tree_persistence},
      {"SCMS ridge", ridge_circle},
      {"smoothed CDF", smoothed_cdf},
      {"ROC", roc},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << v.detail
              << " [" << fmt("%.1fs", secs) << "]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
