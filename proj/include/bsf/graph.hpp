#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsf/errors.hpp"

namespace bsf {

using Vertex = int;
using EdgeId = int;
using Weight = std::int64_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Disjoint-set forest with union by size and path halving.
class UnionFind {
 public:
  explicit UnionFind(int n = 0) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns false when a and b were already in the same set.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  bool same(int a, int b) { return find(a) == find(b); }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

/// Simple undirected graph with non-negative integer edge weights.
/// Edge ids are positions in the construction list.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n < 0) throw InvalidGraph("negative vertex count");
    incident_.assign(static_cast<std::size_t>(n), {});
    for (EdgeId e = 0; e < num_edges(); ++e) {
      const Edge& ed = edges_[e];
      if (ed.u < 0 || ed.u >= n || ed.v < 0 || ed.v >= n)
        throw InvalidGraph("edge " + std::to_string(e) + " has an endpoint outside [0, n)");
      if (ed.u == ed.v) throw InvalidGraph("edge " + std::to_string(e) + " is a self-loop");
      if (ed.w < 0) throw InvalidGraph("edge " + std::to_string(e) + " has a negative weight");
      incident_[ed.u].push_back(e);
      incident_[ed.v].push_back(e);
    }
    for (Vertex v = 0; v < n; ++v) {
      std::vector<Vertex> nb;
      for (EdgeId e : incident_[v]) nb.push_back(other(e, v));
      std::sort(nb.begin(), nb.end());
      if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
        throw InvalidGraph("parallel edges at vertex " + std::to_string(v));
    }
    by_weight_.resize(edges_.size());
    std::iota(by_weight_.begin(), by_weight_.end(), 0);
    std::stable_sort(by_weight_.begin(), by_weight_.end(),
                     [&](EdgeId a, EdgeId b) { return edges_[a].w < edges_[b].w; });
  }

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const EdgeId> incident(Vertex v) const { return incident_[v]; }
  int degree(Vertex v) const { return static_cast<int>(incident_[v].size()); }
  Vertex other(EdgeId e, Vertex v) const { return edges_[e].u == v ? edges_[e].v : edges_[e].u; }

  /// Edge ids sorted by weight ascending, ties by id.
  std::span<const EdgeId> edges_by_weight() const { return by_weight_; }

  std::optional<EdgeId> find_edge(Vertex a, Vertex b) const {
    for (EdgeId e : incident_[a])
      if (other(e, a) == b) return e;
    return std::nullopt;
  }

  Weight total_weight() const {
    Weight s = 0;
    for (const Edge& e : edges_) s += e.w;
    return s;
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> incident_;
  std::vector<EdgeId> by_weight_;
};

/// A tree of the host graph: sorted vertex ids, sorted edge ids, and weight.
struct Tree {
  std::vector<Vertex> vertices;
  std::vector<EdgeId> edges;
  Weight weight = 0;

  bool contains(Vertex v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }
  int size() const { return static_cast<int>(vertices.size()); }

  friend bool operator==(const Tree&, const Tree&) = default;
  friend auto operator<=>(const Tree& a, const Tree& b) {
    if (auto c = a.vertices <=> b.vertices; c != 0) return c;
    return a.edges <=> b.edges;
  }
};

/// Checks the tree invariants against the host graph.
inline bool is_valid_tree(const WeightedGraph& g, const Tree& t) {
  if (t.vertices.empty()) return false;
  if (!std::is_sorted(t.vertices.begin(), t.vertices.end()) ||
      std::adjacent_find(t.vertices.begin(), t.vertices.end()) != t.vertices.end())
    return false;
  if (t.edges.size() + 1 != t.vertices.size()) return false;
  if (!std::is_sorted(t.edges.begin(), t.edges.end()) ||
      std::adjacent_find(t.edges.begin(), t.edges.end()) != t.edges.end())
    return false;
  std::vector<int> local(static_cast<std::size_t>(g.num_vertices()), -1);
  for (std::size_t i = 0; i < t.vertices.size(); ++i) {
    if (t.vertices[i] < 0 || t.vertices[i] >= g.num_vertices()) return false;
    local[t.vertices[i]] = static_cast<int>(i);
  }
  UnionFind uf(t.size());
  Weight w = 0;
  for (EdgeId e : t.edges) {
    if (e < 0 || e >= g.num_edges()) return false;
    const Edge& ed = g.edge(e);
    if (local[ed.u] < 0 || local[ed.v] < 0) return false;
    if (!uf.unite(local[ed.u], local[ed.v])) return false;
    w += ed.w;
  }
  return w == t.weight;
}

/// Builds a Tree from unsorted vertex and edge lists; throws NotATree.
inline Tree make_tree(const WeightedGraph& g, std::vector<Vertex> vertices, std::vector<EdgeId> edges) {
  std::sort(vertices.begin(), vertices.end());
  std::sort(edges.begin(), edges.end());
  Tree t{std::move(vertices), std::move(edges), 0};
  for (EdgeId e : t.edges)
    if (e >= 0 && e < g.num_edges()) t.weight += g.edge(e).w;
  if (!is_valid_tree(g, t)) throw NotATree("vertex/edge sets do not form a tree of the host graph");
  return t;
}

/// A collection of vertex-disjoint trees covering every vertex.
struct SpanningKForest {
  std::vector<Tree> trees;
  Weight value_minmax = 0;
  Weight value_maxmin = 0;

  int k() const { return static_cast<int>(trees.size()); }
};

/// Validates and canonicalizes (trees ordered by smallest vertex).
inline SpanningKForest make_forest(const WeightedGraph& g, std::vector<Tree> trees) {
  if (trees.empty()) throw InconsistentSolution("a forest needs at least one tree");
  std::vector<char> seen(static_cast<std::size_t>(g.num_vertices()), 0);
  int covered = 0;
  for (const Tree& t : trees) {
    if (!is_valid_tree(g, t)) throw InconsistentSolution("forest member is not a valid tree");
    for (Vertex v : t.vertices) {
      if (seen[v]) throw InconsistentSolution("trees are not vertex-disjoint");
      seen[v] = 1;
      ++covered;
    }
  }
  if (covered != g.num_vertices()) throw InconsistentSolution("trees do not cover every vertex");
  std::sort(trees.begin(), trees.end(),
            [](const Tree& a, const Tree& b) { return a.vertices.front() < b.vertices.front(); });
  SpanningKForest f;
  f.value_minmax = 0;
  f.value_maxmin = trees.front().weight;
  for (const Tree& t : trees) {
    f.value_minmax = std::max(f.value_minmax, t.weight);
    f.value_maxmin = std::min(f.value_maxmin, t.weight);
  }
  f.trees = std::move(trees);
  return f;
}

/// Splits an edge set of g (a forest) into its connected components, with
/// every vertex of g accounted for (isolated vertices become singletons).
inline std::vector<Tree> components_of(const WeightedGraph& g, std::span<const EdgeId> forest_edges) {
  const int n = g.num_vertices();
  UnionFind uf(n);
  for (EdgeId e : forest_edges)
    if (!uf.unite(g.edge(e).u, g.edge(e).v)) throw NotATree("edge set contains a cycle");
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  std::vector<Tree> out;
  for (Vertex v = 0; v < n; ++v) {
    int r = uf.find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[r]].vertices.push_back(v);
  }
  for (EdgeId e : forest_edges) {
    Tree& t = out[slot[uf.find(g.edge(e).u)]];
    t.edges.push_back(e);
    t.weight += g.edge(e).w;
  }
  for (Tree& t : out) std::sort(t.edges.begin(), t.edges.end());
  return out;
}

namespace detail {

// Kruskal over the edges of g whose endpoints are both in `member` (all
// vertices when empty) and which are not in `forbidden` (ignored when empty).
// `order` fixes the scan order. Returns the chosen edge ids.
inline std::vector<EdgeId> kruskal_scan(const WeightedGraph& g, std::span<const EdgeId> order,
                                        std::span<const char> member, std::span<const char> forbidden) {
  UnionFind uf(g.num_vertices());
  std::vector<EdgeId> chosen;
  for (EdgeId e : order) {
    const Edge& ed = g.edge(e);
    if (!forbidden.empty() && forbidden[e]) continue;
    if (!member.empty() && (!member[ed.u] || !member[ed.v])) continue;
    if (uf.unite(ed.u, ed.v)) chosen.push_back(e);
  }
  return chosen;
}

inline Tree spanning_tree_from(const WeightedGraph& g, std::vector<EdgeId> chosen) {
  Tree t;
  t.vertices.resize(static_cast<std::size_t>(g.num_vertices()));
  std::iota(t.vertices.begin(), t.vertices.end(), 0);
  std::sort(chosen.begin(), chosen.end());
  for (EdgeId e : chosen) t.weight += g.edge(e).w;
  t.edges = std::move(chosen);
  return t;
}

}  // namespace detail

/// Minimum spanning tree; among equal weights the lower edge id is taken first.
inline Tree kruskal_mst(const WeightedGraph& g) {
  if (g.num_vertices() == 0) throw DisconnectedGraph("empty graph");
  auto chosen = detail::kruskal_scan(g, g.edges_by_weight(), {}, {});
  if (static_cast<int>(chosen.size()) != g.num_vertices() - 1) throw DisconnectedGraph("graph is not connected");
  return detail::spanning_tree_from(g, std::move(chosen));
}

/// MST of g minus the edges flagged in `forbidden`; nullopt when that
/// subgraph is disconnected.
inline std::optional<Tree> kruskal_mst_excluding(const WeightedGraph& g, std::span<const char> forbidden) {
  auto chosen = detail::kruskal_scan(g, g.edges_by_weight(), {}, forbidden);
  if (static_cast<int>(chosen.size()) != g.num_vertices() - 1) return std::nullopt;
  return detail::spanning_tree_from(g, std::move(chosen));
}

/// Maximum spanning tree (Kruskal on descending weight, ties by lower id).
inline Tree max_spanning_tree(const WeightedGraph& g) {
  if (g.num_vertices() == 0) throw DisconnectedGraph("empty graph");
  std::vector<EdgeId> order(g.edges_by_weight().begin(), g.edges_by_weight().end());
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return g.edge(a).w > g.edge(b).w; });
  auto chosen = detail::kruskal_scan(g, order, {}, {});
  if (static_cast<int>(chosen.size()) != g.num_vertices() - 1) throw DisconnectedGraph("graph is not connected");
  return detail::spanning_tree_from(g, std::move(chosen));
}

/// True iff the subgraph induced by `subset` is connected. Empty → false.
inline bool is_connected(const WeightedGraph& g, std::span<const Vertex> subset) {
  if (subset.empty()) return false;
  std::vector<char> member(static_cast<std::size_t>(g.num_vertices()), 0);
  for (Vertex v : subset) member[v] = 1;
  std::vector<Vertex> stack{subset.front()};
  std::vector<char> seen(member.size(), 0);
  seen[subset.front()] = 1;
  int reached = 1;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    for (EdgeId e : g.incident(v)) {
      Vertex u = g.other(e, v);
      if (member[u] && !seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  int distinct = 0;
  for (char c : member) distinct += c;
  return reached == distinct;
}

inline bool is_connected(const WeightedGraph& g) {
  std::vector<Vertex> all(static_cast<std::size_t>(g.num_vertices()));
  std::iota(all.begin(), all.end(), 0);
  return is_connected(g, all);
}

namespace detail {

inline std::optional<Tree> induced_spanning_tree(const WeightedGraph& g, std::span<const Vertex> subset,
                                                 std::span<const EdgeId> order) {
  if (subset.empty()) return std::nullopt;
  std::vector<char> member(static_cast<std::size_t>(g.num_vertices()), 0);
  for (Vertex v : subset) member[v] = 1;
  std::vector<Vertex> verts(subset.begin(), subset.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  auto chosen = kruskal_scan(g, order, member, {});
  if (chosen.size() + 1 != verts.size()) return std::nullopt;
  Tree t;
  t.vertices = std::move(verts);
  std::sort(chosen.begin(), chosen.end());
  for (EdgeId e : chosen) t.weight += g.edge(e).w;
  t.edges = std::move(chosen);
  return t;
}

}  // namespace detail

/// MST of g[subset], or nullopt when g[subset] is disconnected.
inline std::optional<Tree> induced_mst(const WeightedGraph& g, std::span<const Vertex> subset) {
  return detail::induced_spanning_tree(g, subset, g.edges_by_weight());
}

/// Maximum spanning tree of g[subset], or nullopt when disconnected.
inline std::optional<Tree> induced_max_spanning_tree(const WeightedGraph& g, std::span<const Vertex> subset) {
  std::vector<EdgeId> order(g.edges_by_weight().begin(), g.edges_by_weight().end());
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return g.edge(a).w > g.edge(b).w; });
  return detail::induced_spanning_tree(g, subset, order);
}

/// Removes heaviest edges (ties: higher id) from the heaviest trees until the
/// forest has exactly k trees. Weights are non-negative so the min-max value
/// never increases.
inline std::vector<Tree> split_to_k(const WeightedGraph& g, std::vector<Tree> trees, int k) {
  std::vector<EdgeId> edges;
  for (const Tree& t : trees) edges.insert(edges.end(), t.edges.begin(), t.edges.end());
  while (static_cast<int>(trees.size()) < k) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(trees.size()); ++i) {
      if (trees[i].edges.empty()) continue;
      if (best < 0 || trees[i].weight > trees[best].weight) best = i;
    }
    if (best < 0) throw InvalidArgument("cannot split a forest into more trees than vertices");
    EdgeId drop = trees[best].edges.front();
    for (EdgeId e : trees[best].edges)
      if (g.edge(e).w > g.edge(drop).w || (g.edge(e).w == g.edge(drop).w && e > drop)) drop = e;
    edges.erase(std::find(edges.begin(), edges.end(), drop));
    trees = components_of(g, edges);
  }
  return trees;
}

/// Vertex set as a bitmask (graphs with at most 64 vertices).
inline std::uint64_t vertex_mask(std::span<const Vertex> vs) {
  std::uint64_t m = 0;
  for (Vertex v : vs) m |= std::uint64_t{1} << v;
  return m;
}

}  // namespace bsf
