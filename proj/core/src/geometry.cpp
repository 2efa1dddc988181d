#include "kdeforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>

#include "kdeforge/error.hpp"
#include "parallel.hpp"

namespace kdeforge {

namespace {

void require_gaussian(const DensityModel& model, const char* what) {
  if (model.kernel().family() != KernelFamily::Gaussian)
    throw Unsupported(std::string(what) + " requires the gaussian kernel");
}

void check_starts(const DensityModel& model, const PointMatrix& starts) {
  if (starts.rows() == 0) throw InvalidArgument("no starting points");
  if (starts.cols() != model.dim()) throw DimensionMismatch(model.dim(), starts.cols());
}

// One mean-shift step. Weights are shifted by the nearest observation's
// exponent so that starts far from the data do not underflow.
Point shift_target(const DensityModel& model, const PointRef& x) {
  const auto& data = model.sample().data();
  const auto n = static_cast<Eigen::Index>(model.size());
  const double inv_h2 = 1.0 / (model.bandwidth() * model.bandwidth());
  Eigen::VectorXd r2 =
      (data.rowwise() - x.transpose()).rowwise().squaredNorm() * (0.5 * inv_h2);
  const double floor = r2.minCoeff();
  const Eigen::VectorXd w = (-(r2.array() - floor)).exp().matrix();
  Point target = Point::Zero(x.size());
  for (Eigen::Index i = 0; i < n; ++i) target.noalias() += w[i] * data.row(i).transpose();
  return target / w.sum();
}

struct Eigen2 {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

Eigen2 sorted_eigen(const Matrix& hessian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hessian);
  const Eigen::Index d = hessian.rows();
  Eigen2 out{Eigen::VectorXd(d), Eigen::MatrixXd(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values[i] = solver.eigenvalues()[d - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

bool lex_less(const PointRef& a, const PointRef& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Greedy clustering in input order; returns cluster id per point (−1 for
// points with keep[i] == false) and the number of clusters.
std::pair<std::vector<int>, int> cluster_points(const std::vector<Point>& pts,
                                                const std::vector<bool>& keep, double radius) {
  std::vector<int> id(pts.size(), -1);
  std::vector<Point> anchors;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!keep[i]) continue;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      if ((pts[i] - anchors[a]).norm() <= radius) {
        id[i] = static_cast<int>(a);
        break;
      }
    }
    if (id[i] < 0) {
      id[i] = static_cast<int>(anchors.size());
      anchors.push_back(pts[i]);
    }
  }
  return {id, static_cast<int>(anchors.size())};
}

}  // namespace

MeanShiftResult mean_shift(const DensityModel& model, const PointRef& start,
                           const MeanShiftOptions& options) {
  require_gaussian(model, "mean shift");
  if (start.size() != model.dim()) throw DimensionMismatch(model.dim(), start.size());
  const double tol = options.tol > 0.0 ? options.tol : 1e-7 * model.bandwidth();

  MeanShiftResult res;
  res.point = start;
  if (options.record_path) res.path_density.push_back(model.density_at(res.point));
  while (res.iterations < options.max_iter) {
    const Point next = shift_target(model, res.point);
    const double step = (next - res.point).norm();
    res.point = next;
    ++res.iterations;
    if (options.record_path) res.path_density.push_back(model.density_at(res.point));
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  const auto fit = model.local_fit(res.point);
  res.density = fit.density;
  res.gradient_norm = fit.gradient.norm();
  return res;
}

ModeSet find_modes(const DensityModel& model, const PointMatrix& starts, const ModeOptions& options) {
  require_gaussian(model, "mode finding");
  check_starts(model, starts);
  const auto m = static_cast<std::size_t>(starts.rows());
  std::vector<MeanShiftResult> runs(m);
  detail::parallel_for(m, [&](std::size_t s) {
    runs[s] = mean_shift(model, starts.row(static_cast<Eigen::Index>(s)).transpose(), options.shift);
  });

  const double h = model.bandwidth();
  const double radius = options.merge_radius > 0.0 ? options.merge_radius : 0.5 * h;
  double pmax = 0.0;
  for (const auto& r : runs)
    if (r.converged) pmax = std::max(pmax, r.density);
  const double grad_tol = options.gradient_tol > 0.0 ? options.gradient_tol : 1e-6 * pmax / h;

  std::vector<Point> dest(m);
  std::vector<bool> keep(m);
  for (std::size_t s = 0; s < m; ++s) {
    dest[s] = runs[s].point;
    keep[s] = runs[s].converged;
  }
  const auto [cluster, nclusters] = cluster_points(dest, keep, radius);

  // Representative of each cluster: its highest-density destination, with a
  // lexicographic tie-break so the choice does not depend on start order.
  std::vector<long> rep(static_cast<std::size_t>(nclusters), -1);
  for (std::size_t s = 0; s < m; ++s) {
    if (cluster[s] < 0) continue;
    long& r = rep[static_cast<std::size_t>(cluster[s])];
    if (r < 0 || runs[s].density > runs[static_cast<std::size_t>(r)].density ||
        (runs[s].density == runs[static_cast<std::size_t>(r)].density &&
         lex_less(dest[s], dest[static_cast<std::size_t>(r)])))
      r = static_cast<long>(s);
  }

  struct Candidate {
    Point point;
    double density;
    int cluster;
  };
  std::vector<Candidate> accepted;
  for (int c = 0; c < nclusters; ++c) {
    const auto s = static_cast<std::size_t>(rep[static_cast<std::size_t>(c)]);
    const auto fit = model.local_fit(dest[s]);
    if (fit.gradient.norm() > grad_tol) continue;
    if (!(sorted_eigen(fit.hessian).values[0] < 0.0)) continue;
    accepted.push_back({dest[s], fit.density, c});
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return lex_less(a.point, b.point); });

  ModeSet out;
  out.gradient_tol = grad_tol;
  out.modes.resize(static_cast<Eigen::Index>(accepted.size()), model.dim());
  std::vector<long> cluster_to_mode(static_cast<std::size_t>(nclusters), ModeSet::kUnassigned);
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    out.modes.row(static_cast<Eigen::Index>(k)) = accepted[k].point.transpose();
    out.densities.push_back(accepted[k].density);
    cluster_to_mode[static_cast<std::size_t>(accepted[k].cluster)] = static_cast<long>(k);
  }
  out.assignment.resize(m, ModeSet::kUnassigned);
  for (std::size_t s = 0; s < m; ++s)
    if (cluster[s] >= 0) out.assignment[s] = cluster_to_mode[static_cast<std::size_t>(cluster[s])];
  return out;
}

ModeSet find_modes(const DensityModel& model, const ModeOptions& options) {
  return find_modes(model, model.sample().data(), options);
}

LevelSet level_set(const EvalGrid& grid, double level) {
  LevelSet out;
  out.level = level;
  const std::size_t m = grid.size();
  out.mask.assign(m, 0);
  out.labels.assign(m, -1);
  for (std::size_t i = 0; i < m; ++i) out.mask[i] = grid.value(i) >= level ? 1 : 0;

  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < m; ++i) {
    if (!out.mask[i] || out.labels[i] >= 0) continue;
    const int label = out.components++;
    out.labels[i] = label;
    queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      grid.for_each_neighbor(cur, [&](std::size_t nb) {
        if (out.mask[nb] && out.labels[nb] < 0) {
          out.labels[nb] = label;
          queue.push_back(nb);
        }
      });
    }
  }
  return out;
}

PointMatrix thin_points(const Sample& sample, std::size_t max_starts) {
  if (max_starts == 0) throw InvalidArgument("max_starts must be positive");
  const std::size_t n = sample.size();
  const std::size_t stride = (n + max_starts - 1) / max_starts;
  const std::size_t count = (n + stride - 1) / stride;
  PointMatrix out(static_cast<Eigen::Index>(count), sample.dim());
  for (std::size_t k = 0; k < count; ++k)
    out.row(static_cast<Eigen::Index>(k)) = sample.data().row(static_cast<Eigen::Index>(k * stride));
  return out;
}

RidgeSet scms(const DensityModel& model, const PointMatrix& starts, const RidgeOptions& options) {
  require_gaussian(model, "SCMS");
  if (model.dim() < 2) throw InvalidArgument("ridge estimation needs d >= 2");
  check_starts(model, starts);
  const double h = model.bandwidth();
  const double h2 = h * h;
  const double tol = options.tol > 0.0 ? options.tol : 1e-6 * h;
  const auto m = static_cast<std::size_t>(starts.rows());
  const Eigen::Index d = model.dim();

  struct Trace {
    Point point;
    RidgeStatus status = RidgeStatus::Unconverged;
    double density = 0.0;
    double projected_grad = 0.0;
    double lambda2 = 0.0;
  };
  std::vector<Trace> traces(m);

  detail::parallel_for(m, [&](std::size_t s) {
    Trace& t = traces[s];
    t.point = starts.row(static_cast<Eigen::Index>(s)).transpose();
    for (std::size_t it = 0; it <= options.max_iter; ++it) {
      const auto fit = model.local_fit(t.point);
      if (!(fit.density > 0.0)) {
        t.status = RidgeStatus::Unconverged;
        return;
      }
      const auto eig = sorted_eigen(fit.hessian);
      if (std::abs(eig.values[0] - eig.values[1]) < options.eigen_gap) {
        t.status = RidgeStatus::Degenerate;
        return;
      }
      const Matrix v = eig.vectors.rightCols(d - 1);
      // Gaussian mean-shift vector m(x) − x = h² ĝ / p̂.
      const Point proj_grad = v * (v.transpose() * fit.gradient);
      const Point step = (h2 / fit.density) * proj_grad;
      if (step.norm() < tol) {
        t.density = fit.density;
        t.projected_grad = proj_grad.norm();
        t.lambda2 = eig.values[1];
        t.status = eig.values[1] < 0.0 ? RidgeStatus::Converged : RidgeStatus::NotRidge;
        return;
      }
      if (it == options.max_iter) break;
      t.point += step;
    }
    t.status = RidgeStatus::Unconverged;
  });

  RidgeSet out;
  double pmax = 0.0;
  for (const auto& t : traces)
    if (t.status == RidgeStatus::Converged) pmax = std::max(pmax, t.density);
  out.gradient_tol = options.gradient_tol > 0.0 ? options.gradient_tol : 1e-6 * pmax / h;

  std::vector<std::size_t> accepted;
  for (std::size_t s = 0; s < m; ++s) {
    auto& t = traces[s];
    if (t.status == RidgeStatus::Converged && t.projected_grad > out.gradient_tol)
      t.status = RidgeStatus::Unconverged;
    out.status.push_back(t.status);
    if (t.status == RidgeStatus::Converged) accepted.push_back(s);
  }
  out.points.resize(static_cast<Eigen::Index>(accepted.size()), d);
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    const auto& t = traces[accepted[k]];
    out.points.row(static_cast<Eigen::Index>(k)) = t.point.transpose();
    out.projected_gradient_norms.push_back(t.projected_grad);
    out.lambda2.push_back(t.lambda2);
    out.start_index.push_back(accepted[k]);
  }
  return out;
}

RidgeSet scms(const DensityModel& model, const RidgeOptions& options) {
  return scms(model, thin_points(model.sample(), options.max_starts), options);
}

namespace {

struct DescentResult {
  Point point;
  int status;  // 0 settled, kExterior, kUnresolved
};

DescentResult descend(const DensityModel& model, const PointRef& start, const EvalGrid& grid,
                      double step0, double tol, std::size_t max_steps) {
  Point x = start;
  double step = step0;
  double dens = model.density_at(x);
  const auto& axes = grid.axes();
  auto outside = [&](const Point& p) {
    for (Eigen::Index c = 0; c < p.size(); ++c)
      if (p[c] < axes[c].front() || p[c] > axes[c].back()) return true;
    return false;
  };
  for (std::size_t it = 0; it < max_steps; ++it) {
    const Point g = model.gradient_at(x);
    const double gn = g.norm();
    if (!(gn > 0.0)) return {x, 0};
    const Point next = x - (step / gn) * g;
    if (outside(next)) return {next, MorseSmalePartition::kExterior};
    const double next_dens = model.density_at(next);
    if (next_dens < dens) {
      x = next;
      dens = next_dens;
    } else {
      step *= 0.5;
      if (step < tol) return {x, 0};
    }
  }
  return {x, MorseSmalePartition::kUnresolved};
}

}  // namespace

MorseSmalePartition morse_smale(const DensityModel& model, const EvalGrid& grid,
                                const MorseSmaleOptions& options) {
  require_gaussian(model, "Morse-Smale partition");
  if (model.dim() > 2) throw InvalidArgument("Morse-Smale partition is grid based and needs d <= 2");
  if (grid.dim() != model.dim()) throw DimensionMismatch(model.dim(), grid.dim());
  const double h = model.bandwidth();
  const double step0 = options.descent_step > 0.0 ? options.descent_step : 0.1 * h;
  const double tol = options.tol > 0.0 ? options.tol : 1e-6 * h;
  const double radius = options.merge_radius > 0.0 ? options.merge_radius : 0.5 * h;
  const std::size_t m = grid.size();

  std::vector<MeanShiftResult> up(m);
  std::vector<DescentResult> down(m);
  detail::parallel_for(m, [&](std::size_t g) {
    const Point p = grid.point(g);
    up[g] = mean_shift(model, p, options.ascent);
    down[g] = descend(model, p, grid, step0, tol, options.max_steps);
  });

  std::vector<Point> up_pts(m), down_pts(m);
  std::vector<bool> up_keep(m), down_keep(m);
  for (std::size_t g = 0; g < m; ++g) {
    up_pts[g] = up[g].point;
    up_keep[g] = up[g].converged;
    down_pts[g] = down[g].point;
    down_keep[g] = down[g].status == 0;
  }
  const auto [up_id, nmax] = cluster_points(up_pts, up_keep, radius);
  const auto [down_id, nmin] = cluster_points(down_pts, down_keep, radius);

  MorseSmalePartition out;
  out.maxima.resize(nmax, model.dim());
  out.minima.resize(nmin, model.dim());
  std::vector<bool> seen_max(static_cast<std::size_t>(nmax), false);
  std::vector<bool> seen_min(static_cast<std::size_t>(nmin), false);
  out.ascent.resize(m);
  out.descent.resize(m);
  for (std::size_t g = 0; g < m; ++g) {
    out.ascent[g] = up_keep[g] ? up_id[g] : MorseSmalePartition::kUnresolved;
    if (up_keep[g] && !seen_max[static_cast<std::size_t>(up_id[g])]) {
      seen_max[static_cast<std::size_t>(up_id[g])] = true;
      out.maxima.row(up_id[g]) = up_pts[g].transpose();
    }
    out.descent[g] = down_keep[g] ? down_id[g] : down[g].status;
    if (down_keep[g] && !seen_min[static_cast<std::size_t>(down_id[g])]) {
      seen_min[static_cast<std::size_t>(down_id[g])] = true;
      out.minima.row(down_id[g]) = down_pts[g].transpose();
    }
  }

  std::map<std::pair<int, int>, int> cells;
  out.cell.resize(m);
  for (std::size_t g = 0; g < m; ++g) {
    const auto key = std::make_pair(out.ascent[g], out.descent[g]);
    const auto it = cells.try_emplace(key, static_cast<int>(cells.size())).first;
    out.cell[g] = it->second;
  }
  out.cells = static_cast<int>(cells.size());
  return out;
}

}  // namespace kdeforge
