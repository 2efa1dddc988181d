#include "kdeforge/cli.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/coverage.hpp"
#include "kdeforge/distfunc.hpp"
#include "kdeforge/error.hpp"
#include "kdeforge/geometry.hpp"
#include "kdeforge/inference.hpp"
#include "kdeforge/io.hpp"
#include "kdeforge/topology.hpp"

namespace kdeforge::cli {

namespace {

using io::format_number;

// Everything a subcommand may read. Only the options registered on the
// chosen subcommand are ever set.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string kernel = "gaussian";
  std::optional<std::string> bandwidth_method;
  std::optional<double> bandwidth;
  std::optional<std::string> lscv_grid;
  std::optional<double> pilot;
  std::size_t grid = 0;  // 0: 256, 64 or 16 points per axis for d = 1, 2, ≥3
  double padding = 3.0;
  std::string path = "exact";

  std::string method;
  double alpha = 0.05;
  std::size_t boot = 1000;
  std::optional<std::uint64_t> seed;

  double tol = 0.0;
  std::size_t max_iter = 0;
  std::optional<double> lambda;

  std::optional<std::string> group_col;
  std::optional<std::string> healthy;
  std::size_t t_points = 101;
  bool band = false;

  std::string truth = "normal";
  std::size_t n = 1000;
  std::string target;
  std::size_t trials = 200;
  std::optional<double> point;
};

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw InvalidArgument("--seed is required for bootstrap methods");
  return *cfg.seed;
}

BandwidthSelector make_selector(const RunConfig& cfg) {
  BandwidthSelector sel;
  if (cfg.bandwidth_method)
    sel.method = parse_bandwidth_method(*cfg.bandwidth_method);
  else if (cfg.bandwidth)
    sel.method = BandwidthMethod::Fixed;
  if (cfg.bandwidth) {
    if (sel.method != BandwidthMethod::Fixed)
      throw InvalidArgument("--bandwidth needs --bandwidth-method fixed");
    sel.fixed = *cfg.bandwidth;
  }
  if (cfg.lscv_grid) sel.lscv_grid = parse_lscv_grid(*cfg.lscv_grid);
  sel.pilot = cfg.pilot;
  sel.validate();
  return sel;
}

KernelSpec make_kernel(const RunConfig& cfg, int dim) { return KernelSpec(parse_kernel_family(cfg.kernel), dim); }

std::size_t resolution(const RunConfig& cfg, int dim) {
  if (cfg.grid > 0) return cfg.grid;
  return dim == 1 ? 256 : dim == 2 ? 64 : 16;
}

struct Fitted {
  DensityModel model;
  std::vector<std::vector<double>> axes;
};

Fitted fit(const RunConfig& cfg, const Sample& sample) {
  const KernelSpec kernel = make_kernel(cfg, sample.dim());
  const double h = select_bandwidth(sample, kernel, make_selector(cfg));
  auto axes = make_axes(sample, h, resolution(cfg, sample.dim()), cfg.padding);
  return {DensityModel(sample, kernel, h), std::move(axes)};
}

Sample load(const RunConfig& cfg) { return io::to_sample(io::read_csv(cfg.input)); }

EvalPath parse_path(const std::string& s) {
  if (s == "exact") return EvalPath::Exact;
  if (s == "truncated") return EvalPath::Truncated;
  throw InvalidArgument("unknown evaluation path '" + s + "'");
}

std::string head(const RunConfig& cfg, const DensityModel& m) {
  std::ostringstream os;
  os << cfg.command << ": n=" << m.size() << " d=" << m.dim() << " kernel=" << to_string(m.kernel().family())
     << " h=" << format_number(m.bandwidth());
  return os.str();
}

// --- subcommands ---------------------------------------------------------

std::string cmd_density(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  const auto grid = f.model.evaluate_grid(f.axes, parse_path(cfg.path));
  io::write_grid_csv(dst, grid);
  return head(cfg, f.model) + " grid=" + std::to_string(grid.size());
}

std::string cmd_bandwidth(const RunConfig& cfg, std::ostream& dst) {
  const Sample sample = load(cfg);
  const KernelSpec kernel = make_kernel(cfg, sample.dim());
  const BandwidthSelector sel = make_selector(cfg);
  std::optional<LscvResult> cv;
  double h = 0.0;
  if (sel.method == BandwidthMethod::Lscv) {
    const auto candidates = sel.lscv_grid ? sel.lscv_grid->candidates() : default_lscv_candidates(sample);
    cv = lscv(sample, kernel, candidates);
    h = cv->bandwidth;
  } else {
    h = select_bandwidth(sample, kernel, sel);
  }
  io::write_bandwidth_json(dst, sel.method, h, cv);
  return "bandwidth: n=" + std::to_string(sample.size()) + " method=" + std::string(to_string(sel.method)) +
         " h=" + format_number(h);
}

std::string cmd_ci(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  const PointMatrix points = tensor_points(f.axes);
  const std::string method = cfg.method.empty() ? "plugin" : cfg.method;
  IntervalResult r;
  if (method == "plugin")
    r = ci_plugin(f.model, points, cfg.alpha);
  else if (method == "bootstrap-plugin")
    r = ci_bootstrap_plugin(f.model, points, cfg.alpha, {cfg.boot, require_seed(cfg)});
  else if (method == "bootstrap")
    r = ci_bootstrap(f.model, points, cfg.alpha, {cfg.boot, require_seed(cfg)});
  else
    throw InvalidArgument("unknown interval method '" + method + "'");
  io::write_interval_json(dst, r);
  return head(cfg, f.model) + " method=" + std::string(to_string(r.method)) + " points=" +
         std::to_string(r.size()) + " alpha=" + format_number(cfg.alpha);
}

std::string cmd_band(const RunConfig& cfg, std::ostream& dst) {
  const Sample sample = load(cfg);
  const auto f = fit(cfg, sample);
  const PointMatrix points = tensor_points(f.axes);
  const std::string method = cfg.method.empty() ? "boot" : cfg.method;
  BandResult b;
  if (method == "evt")
    b = band_plugin_evt(f.model, points, cfg.alpha);
  else if (method == "boot")
    b = band_bootstrap(f.model, points, cfg.alpha, {cfg.boot, require_seed(cfg)});
  else if (method == "debias")
    b = band_debiased_bootstrap(sample, f.model.kernel(), f.model.bandwidth(), points, cfg.alpha,
                                {cfg.boot, require_seed(cfg)});
  else
    throw InvalidArgument("unknown band method '" + method + "'");
  io::write_band_json(dst, b);
  return head(cfg, f.model) + " method=" + std::string(to_string(b.method)) + " target=" +
         std::string(to_string(b.target)) + " critical=" + format_number(b.critical_value);
}

MeanShiftOptions shift_options(const RunConfig& cfg) {
  MeanShiftOptions o;
  o.tol = cfg.tol;
  if (cfg.max_iter) o.max_iter = cfg.max_iter;
  return o;
}

std::string cmd_modes(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  ModeOptions o;
  o.shift = shift_options(cfg);
  const ModeSet modes = find_modes(f.model, o);
  io::write_modes_csv(dst, modes);
  const auto unassigned = std::count(modes.assignment.begin(), modes.assignment.end(), ModeSet::kUnassigned);
  return head(cfg, f.model) + " modes=" + std::to_string(modes.count()) + " unassigned=" + std::to_string(unassigned);
}

std::string cmd_levelset(const RunConfig& cfg, std::ostream& dst) {
  if (!cfg.lambda) throw InvalidArgument("levelset needs --lambda");
  const auto f = fit(cfg, load(cfg));
  const auto grid = f.model.evaluate_grid(f.axes);
  const LevelSet set = level_set(grid, *cfg.lambda);
  io::write_level_set_csv(dst, grid, set);
  return head(cfg, f.model) + " lambda=" + format_number(*cfg.lambda) + " components=" + std::to_string(set.components);
}

std::string cmd_ridge(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  RidgeOptions o;
  o.tol = cfg.tol;
  if (cfg.max_iter) o.max_iter = cfg.max_iter;
  const RidgeSet ridge = scms(f.model, o);
  io::write_ridge_csv(dst, ridge);
  return head(cfg, f.model) + " starts=" + std::to_string(ridge.status.size()) + " ridge_points=" +
         std::to_string(ridge.size());
}

std::string cmd_morse(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  const auto grid = f.model.evaluate_grid(f.axes);
  MorseSmaleOptions o;
  o.ascent = shift_options(cfg);
  o.tol = cfg.tol;
  if (cfg.max_iter) o.max_steps = cfg.max_iter;
  const auto part = morse_smale(f.model, grid, o);
  io::write_partition_csv(dst, grid, part);
  return head(cfg, f.model) + " maxima=" + std::to_string(part.maxima.rows()) + " minima=" +
         std::to_string(part.minima.rows()) + " cells=" + std::to_string(part.cells);
}

std::string cmd_tree(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  const auto grid = f.model.evaluate_grid(f.axes);
  const ClusterTree tree = cluster_tree(grid);
  io::write_tree_json(dst, grid, tree);
  return head(cfg, f.model) + " nodes=" + std::to_string(tree.nodes.size()) + " leaves=" +
         std::to_string(tree.leaf_count());
}

std::string cmd_persist(const RunConfig& cfg, std::ostream& dst) {
  const auto f = fit(cfg, load(cfg));
  const auto grid = f.model.evaluate_grid(f.axes);
  const auto diagram = persistence_diagram(cluster_tree(grid));
  io::write_diagram_csv(dst, diagram);
  return head(cfg, f.model) + " pairs=" + std::to_string(diagram.pairs.size());
}

std::string cmd_cdf(const RunConfig& cfg, std::ostream& dst) {
  io::CsvOptions opts;
  opts.group_column = cfg.group_col;
  const auto data = io::read_csv(cfg.input, opts);
  if (!cfg.group_col) {
    const auto f = fit(cfg, io::to_sample(data));
    const SmoothedCdf cdf(f.model);
    std::vector<double> values;
    for (double x : f.axes[0]) values.push_back(cdf.cdf_at(x));
    io::write_cdf_csv(dst, f.axes[0], values);
    return head(cfg, f.model) + " points=" + std::to_string(values.size());
  }
  const auto groups = io::split_groups(data);
  dst << "group,x,cdf\n";
  std::string summary = cfg.command + ": groups=" + std::to_string(groups.labels.size());
  for (std::size_t g = 0; g < groups.labels.size(); ++g) {
    const auto f = fit(cfg, groups.samples[g]);
    const SmoothedCdf cdf(f.model);
    for (double x : f.axes[0])
      dst << groups.labels[g] << ',' << format_number(x) << ',' << format_number(cdf.cdf_at(x)) << '\n';
    summary += " " + groups.labels[g] + ":n=" + std::to_string(f.model.size()) + ",h=" + format_number(f.model.bandwidth());
  }
  return summary;
}

std::string cmd_roc(const RunConfig& cfg, std::ostream& dst) {
  if (!cfg.group_col) throw InvalidArgument("roc needs --group-col");
  io::CsvOptions opts;
  opts.group_column = cfg.group_col;
  const auto groups = io::split_groups(io::read_csv(cfg.input, opts));
  if (groups.labels.size() != 2)
    throw DataError("roc needs exactly two groups, found " + std::to_string(groups.labels.size()));
  std::size_t hi = 0;
  if (cfg.healthy) {
    const auto it = std::find(groups.labels.begin(), groups.labels.end(), *cfg.healthy);
    if (it == groups.labels.end()) throw InvalidArgument("no group labelled '" + *cfg.healthy + "'");
    hi = static_cast<std::size_t>(it - groups.labels.begin());
  }
  const Sample& healthy = groups.samples[hi];
  const Sample& diseased = groups.samples[1 - hi];
  const KernelSpec kernel = make_kernel(cfg, 1);
  const BandwidthSelector sel = make_selector(cfg);
  const double hf = select_bandwidth(healthy, kernel, sel);
  const double hg = select_bandwidth(diseased, kernel, sel);
  const auto t = roc_t_grid(cfg.t_points);
  const RocCurve curve = roc_curve(healthy, diseased, kernel, hf, hg, t);
  std::optional<BandResult> band;
  if (cfg.band) band = roc_band(healthy, diseased, kernel, hf, hg, t, cfg.alpha, {cfg.boot, require_seed(cfg)});
  io::write_roc_csv(dst, curve, band ? &*band : nullptr);
  std::string s = cfg.command + ": healthy=" + groups.labels[hi] + " n=" + std::to_string(healthy.size()) +
                  " h=" + format_number(hf) + " diseased=" + groups.labels[1 - hi] + " m=" +
                  std::to_string(diseased.size()) + " h=" + format_number(hg);
  if (band) s += " critical=" + format_number(band->critical_value);
  return s;
}

IntervalMethod parse_simulation_method(const std::string& s) {
  static const std::map<std::string, IntervalMethod> names = {
      {"plugin", IntervalMethod::Plugin},       {"bootstrap-plugin", IntervalMethod::BootstrapPlugin},
      {"bootstrap", IntervalMethod::Bootstrap}, {"evt", IntervalMethod::EvtPlugin},
      {"boot", IntervalMethod::BootstrapBand},  {"debias", IntervalMethod::DebiasedBootstrapBand},
  };
  const auto it = names.find(s.empty() ? "boot" : s);
  if (it == names.end()) throw InvalidArgument("unknown simulation method '" + s + "'");
  return it->second;
}

std::string cmd_simulate(const RunConfig& cfg, std::ostream& dst) {
  CoverageConfig c;
  c.truth = parse_truth(cfg.truth);
  c.n = cfg.n;
  c.method = parse_simulation_method(cfg.method);
  if (cfg.target == "smoothed")
    c.target = InferenceTarget::Smoothed;
  else if (cfg.target == "true")
    c.target = InferenceTarget::True;
  else if (!cfg.target.empty())
    throw InvalidArgument("unknown target '" + cfg.target + "'");
  c.alpha = cfg.alpha;
  c.trials = cfg.trials;
  c.seed = require_seed(cfg);
  c.replicates = cfg.boot;
  c.grid = cfg.grid ? cfg.grid : 256;
  c.point = cfg.point;
  c.bandwidth = cfg.bandwidth;
  c.kernel = parse_kernel_family(cfg.kernel);
  const CoverageReport r = simulate_coverage(c);

  std::ostringstream js;
  js << "{\n \"schema\": " << io::kSchemaVersion << ",\n \"truth\": \"" << c.truth.describe() << "\",\n \"n\": " << c.n
     << ",\n \"method\": \"" << to_string(r.method) << "\",\n \"target\": \"" << to_string(r.target)
     << "\",\n \"nominal\": " << format_number(r.nominal) << ",\n \"trials\": " << r.trials
     << ",\n \"covered\": " << r.covered << ",\n \"coverage\": " << format_number(r.coverage)
     << ",\n \"mean_width\": " << format_number(r.mean_width) << ",\n \"region\": ";
  if (c.point)
    js << "{\"point\": " << format_number(*c.point) << "}";
  else
    js << "{\"lo\": " << format_number(r.region_lo) << ", \"hi\": " << format_number(r.region_hi)
       << ", \"grid\": " << c.grid << ", \"rule\": \"mean +/- 3 sd of the truth\"}";
  js << "\n}\n";
  dst << js.str();
  // Runtime is reported here only, so output files stay byte-identical.
  return "simulate: method=" + std::string(to_string(r.method)) + " target=" + std::string(to_string(r.target)) +
         " coverage=" + format_number(r.coverage) + " trials=" + std::to_string(r.trials) +
         " mean_width=" + format_number(r.mean_width) + " runtime_s=" + format_number(r.runtime_seconds);
}

using Handler = std::function<std::string(const RunConfig&, std::ostream&)>;

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"kdeforge: kernel density estimation and inference"};
  app.require_subcommand(1);
  std::map<CLI::App*, Handler> handlers;

  auto add = [&](const std::string& name, const std::string& help, Handler h, bool input = true) {
    CLI::App* sub = app.add_subcommand(name, help);
    handlers[sub] = std::move(h);
    if (input) sub->add_option("-i,--input", cfg.input, "CSV input")->required();
    sub->add_option("-o,--output", cfg.output, "Output file (default: stdout)");
    sub->add_option("--kernel", cfg.kernel, "gaussian | spherical")->capture_default_str();
    return sub;
  };
  auto add_bandwidth = [&](CLI::App* sub) {
    sub->add_option("--bandwidth-method", cfg.bandwidth_method, "rot | lscv | plugin | fixed");
    sub->add_option("--bandwidth", cfg.bandwidth, "Fixed bandwidth h");
    sub->add_option("--lscv-grid", cfg.lscv_grid, "lo:hi:count");
    sub->add_option("--pilot", cfg.pilot, "Pilot bandwidth for the plug-in selector");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", cfg.grid, "Grid points per axis");
    sub->add_option("--padding", cfg.padding, "Grid padding in bandwidths")->capture_default_str();
  };
  auto add_boot = [&](CLI::App* sub) {
    sub->add_option("--alpha", cfg.alpha)->capture_default_str();
    sub->add_option("--boot", cfg.boot, "Bootstrap replicates")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Bootstrap seed");
  };
  auto add_iter = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Convergence tolerance (0: scale-aware default)");
    sub->add_option("--max-iter", cfg.max_iter, "Iteration cap (0: default)");
  };

  auto* density = add("density", "Evaluate the KDE on a grid", cmd_density);
  add_bandwidth(density);
  add_grid(density);
  density->add_option("--path", cfg.path, "exact | truncated")->capture_default_str();

  add_bandwidth(add("bandwidth", "Select a bandwidth", cmd_bandwidth));

  auto* ci = add("ci", "Pointwise confidence intervals", cmd_ci);
  add_bandwidth(ci);
  add_grid(ci);
  add_boot(ci);
  ci->add_option("--method", cfg.method, "plugin | bootstrap-plugin | bootstrap");

  auto* band = add("band", "Simultaneous confidence band", cmd_band);
  add_bandwidth(band);
  add_grid(band);
  add_boot(band);
  band->add_option("--method", cfg.method, "evt | boot | debias");

  for (auto [name, help, h] : std::vector<std::tuple<std::string, std::string, Handler>>{
           {"modes", "Mode clustering by mean shift", cmd_modes},
           {"levelset", "Superlevel set on the grid", cmd_levelset},
           {"ridge", "Density ridges by SCMS", cmd_ridge},
           {"morse", "Morse-Smale partition of the grid", cmd_morse},
           {"tree", "Cluster tree", cmd_tree},
           {"persist", "Persistence diagram", cmd_persist}}) {
    auto* sub = add(name, help, h);
    add_bandwidth(sub);
    add_grid(sub);
    add_iter(sub);
    if (name == "levelset") sub->add_option("--lambda", cfg.lambda, "Density level")->required();
  }

  auto* cdf = add("cdf", "Smoothed CDF", cmd_cdf);
  add_bandwidth(cdf);
  add_grid(cdf);
  cdf->add_option("--group-col", cfg.group_col, "Label column");

  auto* roc = add("roc", "Smoothed ROC curve", cmd_roc);
  add_bandwidth(roc);
  add_boot(roc);
  roc->add_option("--group-col", cfg.group_col, "Label column")->required();
  roc->add_option("--healthy", cfg.healthy, "Label of the healthy group (default: first seen)");
  roc->add_option("--t-points", cfg.t_points, "Points on the t grid")->capture_default_str();
  roc->add_flag("--band", cfg.band, "Add a bootstrap band (needs --seed)");

  auto* sim = add("simulate", "Monte Carlo coverage", cmd_simulate, false);
  add_boot(sim);
  sim->add_option("--truth", cfg.truth, "normal | normal:mu,sigma | mixture:w,mu1,mu2,s1,s2")->capture_default_str();
  sim->add_option("--n", cfg.n, "Sample size")->capture_default_str();
  sim->add_option("--method", cfg.method, "plugin | bootstrap-plugin | bootstrap | evt | boot | debias");
  sim->add_option("--target", cfg.target, "smoothed | true");
  sim->add_option("--trials", cfg.trials)->capture_default_str();
  sim->add_option("--grid", cfg.grid, "Grid points over the central region");
  sim->add_option("--point", cfg.point, "Single evaluation point");
  sim->add_option("--bandwidth", cfg.bandwidth, "Fixed bandwidth (default: rule of thumb per trial)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  try {
    std::string summary;
    if (cfg.output.empty()) {
      summary = handlers.at(chosen)(cfg, out);
    } else {
      std::ostringstream buffer;
      summary = handlers.at(chosen)(cfg, buffer);
      std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
      if (!file) throw InvalidArgument("cannot write '" + cfg.output + "'");
      file << buffer.str();
    }
    out << summary << '\n';
    return kSuccess;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionMismatch& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Unsupported& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace kdeforge::cli
