#include "kdeforge/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "kdeforge/error.hpp"

namespace kdeforge {

std::vector<int> ClusterTree::leaves() const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.children.empty()) out.push_back(n.id);
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Attaches b's set under a's root and returns that root.
  std::size_t attach(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[b] = a;
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct WorkNode {
  double birth;
  double death = 0.0;
  int parent = -1;
  std::vector<int> children;
  std::size_t representative;
  bool alive = true;
};

}  // namespace

ClusterTree cluster_tree(const EvalGrid& grid) {
  if (grid.dim() > 2) throw InvalidArgument("cluster tree is grid based and needs d <= 2");
  const std::size_t m = grid.size();
  const auto& values = grid.values();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });

  DisjointSets sets(m);
  std::vector<bool> entered(m, false);
  std::vector<int> node_of(m, -1);  // valid at set roots
  std::vector<std::size_t> born_at(m, 0);  // sweep position where the root's component appeared
  std::vector<WorkNode> nodes;

  std::vector<std::size_t> roots;
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t idx = order[pos];
    const double level = values[idx];
    roots.clear();
    grid.for_each_neighbor(idx, [&](std::size_t nb) {
      if (!entered[nb]) return;
      const std::size_t r = sets.find(nb);
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    });
    entered[idx] = true;

    if (roots.empty()) {
      node_of[idx] = static_cast<int>(nodes.size());
      born_at[idx] = pos;
      nodes.push_back({level, 0.0, -1, {}, idx, true});
      continue;
    }
    if (roots.size() == 1) {
      sets.attach(roots.front(), idx);
      continue;
    }

    // Merge: the component that appeared first in the sweep survives.
    const std::size_t elder = *std::min_element(
        roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) { return born_at[a] < born_at[b]; });
    std::vector<int> branches;
    for (std::size_t r : roots) {
      const int nd = node_of[r];
      WorkNode& node = nodes[static_cast<std::size_t>(nd)];
      if (node.birth > level) {
        branches.push_back(nd);
      } else if (!node.children.empty()) {
        // born at this same level: splice its children into the new merge
        for (int c : node.children) branches.push_back(c);
        node.alive = false;
      } else {
        node.alive = false;
      }
    }
    const int elder_node = node_of[elder];
    for (std::size_t r : roots) sets.attach(elder, r);
    sets.attach(elder, idx);

    if (branches.size() >= 2) {
      const int merged = static_cast<int>(nodes.size());
      nodes.push_back({level, 0.0, -1, branches, idx, true});
      for (int c : branches) {
        nodes[static_cast<std::size_t>(c)].death = level;
        nodes[static_cast<std::size_t>(c)].parent = merged;
      }
      node_of[elder] = merged;
    } else if (branches.size() == 1) {
      node_of[elder] = branches.front();
    } else {
      nodes[static_cast<std::size_t>(elder_node)].alive = true;
      nodes[static_cast<std::size_t>(elder_node)].children.clear();
      node_of[elder] = elder_node;
    }
  }

  // Compact the surviving nodes.
  std::vector<int> remap(nodes.size(), -1);
  ClusterTree tree;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].alive) continue;
    remap[i] = static_cast<int>(tree.nodes.size());
    ClusterTreeNode out;
    out.id = remap[i];
    out.birth = nodes[i].birth;
    out.representative = nodes[i].representative;
    tree.nodes.push_back(out);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].alive) continue;
    auto& out = tree.nodes[static_cast<std::size_t>(remap[i])];
    if (nodes[i].parent >= 0 && nodes[static_cast<std::size_t>(nodes[i].parent)].alive) {
      out.parent = remap[static_cast<std::size_t>(nodes[i].parent)];
      out.death = nodes[i].death;
    } else {
      out.parent = -1;
      out.death = 0.0;
      if (tree.root < 0) tree.root = out.id;
    }
    for (int c : nodes[i].children)
      if (nodes[static_cast<std::size_t>(c)].alive) out.children.push_back(remap[static_cast<std::size_t>(c)]);
  }
  return tree;
}

PersistenceDiagram persistence_diagram(const ClusterTree& tree) {
  PersistenceDiagram diagram;
  if (tree.nodes.empty()) return diagram;
  const std::size_t count = tree.nodes.size();
  auto older = [&](int a, int b) {
    const auto& na = tree.nodes[static_cast<std::size_t>(a)];
    const auto& nb = tree.nodes[static_cast<std::size_t>(b)];
    return na.birth > nb.birth || (na.birth == nb.birth && na.representative < nb.representative);
  };
  // Elder leaf of every subtree, computed in post-order.
  std::vector<int> elder(count, -1);
  std::vector<int> stack;
  std::vector<int> post;
  for (const auto& n : tree.nodes)
    if (n.parent < 0) stack.push_back(n.id);
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    post.push_back(cur);
    for (int c : tree.nodes[static_cast<std::size_t>(cur)].children) stack.push_back(c);
  }
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const auto& node = tree.nodes[static_cast<std::size_t>(*it)];
    if (node.children.empty()) {
      elder[static_cast<std::size_t>(*it)] = *it;
      continue;
    }
    int best = -1;
    for (int c : node.children) {
      const int e = elder[static_cast<std::size_t>(c)];
      if (best < 0 || older(e, best)) best = e;
    }
    elder[static_cast<std::size_t>(*it)] = best;
  }
  for (const auto& node : tree.nodes) {
    if (!node.children.empty()) continue;
    double death = 0.0;
    int cur = node.id;
    while (true) {
      const int parent = tree.nodes[static_cast<std::size_t>(cur)].parent;
      if (parent < 0) break;
      if (elder[static_cast<std::size_t>(parent)] != node.id) {
        death = tree.nodes[static_cast<std::size_t>(parent)].birth;
        break;
      }
      cur = parent;
    }
    diagram.pairs.push_back({node.birth, death});
  }
  std::sort(diagram.pairs.begin(), diagram.pairs.end(), [](const auto& a, const auto& b) {
    return a.birth > b.birth || (a.birth == b.birth && a.death > b.death);
  });
  return diagram;
}

namespace {

// Hopcroft–Karp on a dense boolean adjacency (left × right, equal sizes).
class Matching {
 public:
  explicit Matching(std::vector<std::vector<int>> adj) : adj_(std::move(adj)) {}

  bool perfect() {
    const int n = static_cast<int>(adj_.size());
    match_left_.assign(n, -1);
    match_right_.assign(n, -1);
    dist_.assign(n, 0);
    int matched = 0;
    while (bfs()) {
      for (int u = 0; u < n; ++u)
        if (match_left_[u] < 0 && dfs(u)) ++matched;
    }
    return matched == n;
  }

 private:
  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (match_left_[u] < 0) {
        dist_[u] = 0;
        q.push(static_cast<int>(u));
      } else {
        dist_[u] = -1;
      }
    }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj_[static_cast<std::size_t>(u)]) {
        const int w = match_right_[static_cast<std::size_t>(v)];
        if (w < 0) {
          found = true;
        } else if (dist_[static_cast<std::size_t>(w)] < 0) {
          dist_[static_cast<std::size_t>(w)] = dist_[static_cast<std::size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (int v : adj_[static_cast<std::size_t>(u)]) {
      const int w = match_right_[static_cast<std::size_t>(v)];
      if (w < 0 || (dist_[static_cast<std::size_t>(w)] == dist_[static_cast<std::size_t>(u)] + 1 && dfs(w))) {
        match_left_[static_cast<std::size_t>(u)] = v;
        match_right_[static_cast<std::size_t>(v)] = u;
        return true;
      }
    }
    dist_[static_cast<std::size_t>(u)] = -1;
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> match_left_;
  std::vector<int> match_right_;
  std::vector<int> dist_;
};

double linf(const PersistencePair& a, const PersistencePair& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

bool feasible(const std::vector<PersistencePair>& a, const std::vector<PersistencePair>& b, double eps) {
  const std::size_t p = a.size();
  const std::size_t q = b.size();
  // left: a_0..a_{p-1}, diag(b_0)..diag(b_{q-1})
  // right: b_0..b_{q-1}, diag(a_0)..diag(a_{p-1})
  std::vector<std::vector<int>> adj(p + q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j)
      if (linf(a[i], b[j]) <= eps) adj[i].push_back(static_cast<int>(j));
    if (0.5 * a[i].persistence() <= eps) adj[i].push_back(static_cast<int>(q + i));
  }
  for (std::size_t j = 0; j < q; ++j) {
    auto& row = adj[p + j];
    if (0.5 * b[j].persistence() <= eps) row.push_back(static_cast<int>(j));
    for (std::size_t i = 0; i < p; ++i) row.push_back(static_cast<int>(q + i));
  }
  return Matching(std::move(adj)).perfect();
}

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  std::vector<double> candidates{0.0};
  for (const auto& x : a.pairs) {
    candidates.push_back(0.5 * x.persistence());
    for (const auto& y : b.pairs) candidates.push_back(linf(x, y));
  }
  for (const auto& y : b.pairs) candidates.push_back(0.5 * y.persistence());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;  // matching everything to the diagonal is always feasible
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(a.pairs, b.pairs, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

double bottleneck_stability_check(const EvalGrid& first, const EvalGrid& second) {
  if (!first.same_geometry(second)) throw InvalidArgument("grids have different geometry");
  return bottleneck_distance(persistence_diagram(cluster_tree(first)),
                             persistence_diagram(cluster_tree(second)));
}

}  // namespace kdeforge
