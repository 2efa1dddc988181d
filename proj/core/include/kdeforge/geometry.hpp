#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kdeforge/estimator.hpp"
#include "kdeforge/types.hpp"

namespace kdeforge {

// Zero-valued tolerances below are replaced by scale-aware defaults derived
// from the bandwidth h.

struct MeanShiftOptions {
  double tol = 0.0;  ///< step-length tolerance; default 1e-7 h
  std::size_t max_iter = 5000;
  bool record_path = false;
};

struct MeanShiftResult {
  Point point;
  bool converged = false;
  std::size_t iterations = 0;
  double density = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> path_density;  ///< p̂ at each iterate, when recorded
};

/// Gaussian mean-shift iteration x ← Σ K_i X_i / Σ K_i from `start`.
/// Non-convergence is reported through the flag.
MeanShiftResult mean_shift(const DensityModel& model, const PointRef& start,
                           const MeanShiftOptions& options = {});

struct ModeOptions {
  MeanShiftOptions shift;
  double merge_radius = 0.0;   ///< default h / 2
  double gradient_tol = 0.0;   ///< default 1e-6 · max destination density / h
};

struct ModeSet {
  static constexpr long kUnassigned = -1;

  PointMatrix modes;  ///< sorted lexicographically
  std::vector<double> densities;
  std::vector<long> assignment;  ///< mode index per start, or kUnassigned
  double gradient_tol = 0.0;

  std::size_t count() const noexcept { return densities.size(); }
};

/// Mode clustering: mean shift from every start, destinations merged within
/// the merge radius, candidates kept only where ‖ĝ‖ ≤ tol and λ̂_1 < 0.
ModeSet find_modes(const DensityModel& model, const PointMatrix& starts, const ModeOptions& options = {});
/// Starts at the observations themselves.
ModeSet find_modes(const DensityModel& model, const ModeOptions& options = {});

struct LevelSet {
  double level = 0.0;
  std::vector<std::uint8_t> mask;  ///< 1 where value ≥ level
  std::vector<int> labels;         ///< component id in [0, components), −1 outside
  int components = 0;
};

/// Superlevel set on the grid, components under face adjacency. Labels are
/// numbered in order of first appearance in flat index order.
LevelSet level_set(const EvalGrid& grid, double level);

struct RidgeOptions {
  double tol = 0.0;            ///< projected step tolerance; default 1e-6 h
  std::size_t max_iter = 3000;
  double eigen_gap = 1e-10;    ///< |λ_1 − λ_2| below this is degenerate
  double gradient_tol = 0.0;   ///< default 1e-6 · max output density / h
  std::size_t max_starts = 2000;
};

enum class RidgeStatus { Converged, Unconverged, Degenerate, NotRidge };

struct RidgeSet {
  PointMatrix points;  ///< accepted ridge points
  std::vector<double> projected_gradient_norms;  ///< ‖V̂V̂ᵀĝ‖ per accepted point
  std::vector<double> lambda2;                   ///< λ̂_2 per accepted point
  std::vector<std::size_t> start_index;          ///< start that produced each point
  std::vector<RidgeStatus> status;               ///< one per start
  double gradient_tol = 0.0;

  std::size_t size() const noexcept { return lambda2.size(); }
};

/// Every k-th observation so that at most max_starts remain.
PointMatrix thin_points(const Sample& sample, std::size_t max_starts);

/// Subspace-constrained mean shift: the mean-shift step projected onto the
/// span of the Hessian eigenvectors v̂_2 … v̂_d (eigenvalues descending).
RidgeSet scms(const DensityModel& model, const PointMatrix& starts, const RidgeOptions& options = {});
RidgeSet scms(const DensityModel& model, const RidgeOptions& options = {});

struct MorseSmaleOptions {
  MeanShiftOptions ascent;
  double descent_step = 0.0;  ///< default h / 10
  double tol = 0.0;           ///< descent step floor; default 1e-6 h
  std::size_t max_steps = 20000;
  double merge_radius = 0.0;  ///< default h / 2
};

struct MorseSmalePartition {
  static constexpr int kExterior = -1;    ///< descent flow left the grid domain
  static constexpr int kUnresolved = -2;  ///< flow did not settle within max_steps

  std::vector<int> ascent;   ///< index into maxima, or kUnresolved
  std::vector<int> descent;  ///< index into minima, kExterior or kUnresolved
  std::vector<int> cell;     ///< class of the (ascent, descent) pair
  PointMatrix maxima;
  PointMatrix minima;
  int cells = 0;
};

/// Gradient-flow partition of the grid: ascent by mean shift, descent by
/// fixed-step normalized gradient descent with step halving. d ≤ 2.
MorseSmalePartition morse_smale(const DensityModel& model, const EvalGrid& grid,
                                const MorseSmaleOptions& options = {});

}  // namespace kdeforge
