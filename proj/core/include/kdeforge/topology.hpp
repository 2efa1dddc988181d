#pragma once

#include <cstddef>
#include <vector>

#include "kdeforge/estimator.hpp"

namespace kdeforge {

/// Merge tree of superlevel-set components.
///
/// A node is born at the level where its component appears (a local
/// maximum for leaves, a merge level for internal nodes) and dies where it
/// merges into its parent. The root dies at 0.
struct ClusterTreeNode {
  int id = 0;
  double birth = 0.0;
  double death = 0.0;
  int parent = -1;
  std::vector<int> children;
  std::size_t representative = 0;  ///< flat grid index (peak or merge point)
};

struct ClusterTree {
  std::vector<ClusterTreeNode> nodes;
  int root = -1;

  std::vector<int> leaves() const;
  std::size_t leaf_count() const { return leaves().size(); }
};

/// Sweeps the grid values from high to low (ties broken by flat index) with
/// a union-find over face-adjacent points. Zero-length components that only
/// exist because of tied values are dropped. Requires d ≤ 2.
ClusterTree cluster_tree(const EvalGrid& grid);

struct PersistencePair {
  double birth;
  double death;

  double persistence() const noexcept { return birth - death; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// 0-dimensional diagram, pairs sorted by (birth desc, death desc).
struct PersistenceDiagram {
  int dimension = 0;
  std::vector<PersistencePair> pairs;
};

/// One pair per leaf under the elder rule: at a merge the component with
/// the higher birth survives. The oldest component dies at 0.
PersistenceDiagram persistence_diagram(const ClusterTree& tree);

/// Bottleneck distance under the L∞ ground metric, points allowed to match
/// the diagonal. Exact: binary search over candidate distances, each tested
/// by a perfect bipartite matching.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b);

/// Bottleneck distance between the diagrams of two grids of identical
/// geometry. Throws InvalidArgument on geometry mismatch.
double bottleneck_stability_check(const EvalGrid& first, const EvalGrid& second);

}  // namespace kdeforge
