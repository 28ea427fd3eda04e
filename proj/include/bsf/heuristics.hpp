#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <span>
#include <vector>

#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/rng.hpp"

namespace bsf {

// ---------------------------------------------------------------------------
// Column pool

/// Trees deduplicated by (vertex set, edge set), in insertion order.
class ColumnPool {
 public:
  /// Stores t when it is new and t.weight <= ub. Returns whether it was added.
  bool add(const Tree& t, Weight ub) {
    if (t.weight > ub) return false;
    if (!index_.insert(t).second) return false;
    trees_.push_back(t);
    return true;
  }
  bool contains(const Tree& t) const { return index_.count(t) != 0; }
  int size() const { return static_cast<int>(trees_.size()); }
  bool empty() const { return trees_.empty(); }
  const Tree& operator[](int i) const { return trees_[i]; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
  std::set<Tree> index_;
};

// ---------------------------------------------------------------------------
// k-approximation

/// MST minus its k-1 heaviest edges; among equal weights the higher edge id
/// goes first.
inline SpanningKForest k_approx(const WeightedGraph& g, int k) {
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
  Tree t = kruskal_mst(g);
  std::vector<EdgeId> es = t.edges;
  std::sort(es.begin(), es.end(), [&](EdgeId a, EdgeId b) {
    if (g.edge(a).w != g.edge(b).w) return g.edge(a).w > g.edge(b).w;
    return a > b;
  });
  es.erase(es.begin(), es.begin() + (k - 1));
  return make_forest(g, components_of(g, es));
}

// ---------------------------------------------------------------------------
// Min-max k-partition of a tree

namespace detail {

struct RootedTree {
  std::vector<Vertex> order;  // pre-order
  std::vector<Vertex> parent;
  std::vector<EdgeId> parent_edge;
  std::vector<std::vector<Vertex>> children;
};

inline RootedTree root_tree(const WeightedGraph& g, const Tree& t) {
  const int n = g.num_vertices();
  std::vector<std::vector<std::pair<Vertex, EdgeId>>> adj(static_cast<std::size_t>(n));
  for (EdgeId e : t.edges) {
    adj[g.edge(e).u].push_back({g.edge(e).v, e});
    adj[g.edge(e).v].push_back({g.edge(e).u, e});
  }
  RootedTree r;
  r.parent.assign(static_cast<std::size_t>(n), -1);
  r.parent_edge.assign(static_cast<std::size_t>(n), -1);
  r.children.assign(static_cast<std::size_t>(n), {});
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Vertex> stack{t.vertices.front()};
  seen[t.vertices.front()] = 1;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    r.order.push_back(v);
    for (auto [u, e] : adj[v]) {
      if (seen[u]) continue;
      seen[u] = 1;
      r.parent[u] = v;
      r.parent_edge[u] = e;
      r.children[v].push_back(u);
      stack.push_back(u);
    }
  }
  return r;
}

// Minimum number of cuts so every component weighs at most lambda. At each
// vertex the lightest child contributions are kept while they fit; the
// rest are cut. Returns the cut edges.
inline std::vector<EdgeId> greedy_cuts(const WeightedGraph& g, const RootedTree& r, Weight lambda) {
  std::vector<Weight> residual(r.parent.size(), 0);
  std::vector<EdgeId> cuts;
  for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
    const Vertex v = *it;
    std::vector<std::pair<Weight, Vertex>> contrib;
    for (Vertex c : r.children[v]) contrib.push_back({residual[c] + g.edge(r.parent_edge[c]).w, c});
    std::sort(contrib.begin(), contrib.end());
    Weight sum = 0;
    for (auto [w, c] : contrib) {
      if (sum + w <= lambda) {
        sum += w;
      } else {
        cuts.push_back(r.parent_edge[c]);
      }
    }
    residual[v] = sum;
  }
  return cuts;
}

}  // namespace detail

/// Optimal min-max partition of tree t (a subgraph of g) into k trees by
/// removing exactly k-1 of its edges.
inline std::vector<Tree> tree_mskf_trees(const WeightedGraph& g, const Tree& t, int k) {
  if (!is_valid_tree(g, t)) throw NotATree("input is not a tree of the graph");
  if (k < 1 || k > t.size()) throw InvalidArgument("k must lie in [1, |V(T)|]");
  auto rooted = detail::root_tree(g, t);
  Weight lo = 0, hi = t.weight;
  while (lo < hi) {
    const Weight mid = lo + (hi - lo) / 2;
    if (static_cast<int>(detail::greedy_cuts(g, rooted, mid).size()) <= k - 1)
      hi = mid;
    else
      lo = mid + 1;
  }
  auto cuts = detail::greedy_cuts(g, rooted, lo);
  std::sort(cuts.begin(), cuts.end());
  std::vector<EdgeId> kept;
  std::set_difference(t.edges.begin(), t.edges.end(), cuts.begin(), cuts.end(), std::back_inserter(kept));
  // components restricted to t's vertices
  auto all = components_of(g, kept);
  std::vector<Tree> trees;
  for (Tree& c : all)
    if (t.contains(c.vertices.front())) trees.push_back(std::move(c));
  return split_to_k(g, std::move(trees), k);
}

inline SpanningKForest tree_mskf(const WeightedGraph& g, const Tree& spanning, int k) {
  if (spanning.size() != g.num_vertices()) throw NotATree("tree does not span the graph");
  return make_forest(g, tree_mskf_trees(g, spanning, k));
}

/// Same for a graph that is itself a tree.
inline SpanningKForest tree_mskf(const WeightedGraph& tree_graph, int k) {
  if (tree_graph.num_edges() != tree_graph.num_vertices() - 1 || !is_connected(tree_graph))
    throw NotATree("graph is not a tree");
  return tree_mskf(tree_graph, kruskal_mst(tree_graph), k);
}

// ---------------------------------------------------------------------------
// Best-first search over forbidden edge sets

enum class NodeBound {
  /// ceil(w(T)/k) as in the original search; not a valid bound in general.
  Average,
  /// ceil((w(T) - heaviest k-1 edges of T)/k), a valid bound for every
  /// forest of G - H.
  Valid,
};

struct HeuristicOptions {
  double time_limit = 60.0;  // seconds
  long node_limit = -1;      // expanded nodes; negative = unlimited
  NodeBound bound = NodeBound::Average;
};

struct HeuristicResult {
  Weight ub = 0;
  SpanningKForest forest;
  long nodes_expanded = 0;
  long nodes_created = 0;
  bool exhausted = false;  // queue emptied (no limit hit)
};

inline Weight ceil_div(Weight a, Weight b) { return (a + b - 1) / b; }

/// ceil((w(T) - sum of the k-1 heaviest edges of T) / k). Any spanning
/// k-forest of the graph plus k-1 edges of its MST T is a spanning tree, so
/// k * OPT + (k-1 heaviest of T) >= w(T).
inline Weight valid_forest_bound(const WeightedGraph& g, const Tree& t, int k) {
  std::vector<Weight> ws;
  for (EdgeId e : t.edges) ws.push_back(g.edge(e).w);
  std::sort(ws.begin(), ws.end(), std::greater<>());
  Weight w = t.weight;
  for (int i = 0; i < k - 1 && i < static_cast<int>(ws.size()); ++i) w -= ws[i];
  return ceil_div(w, k);
}

/// Nodes hold a forbidden edge set H and the MST of G - H with bound
/// ceil(w(T)/k). Each expanded node yields an optimal partition of its MST
/// and one child per MST edge. Forest trees of weight <= UB go to `pool`.
inline HeuristicResult heuristic_bnb(const WeightedGraph& g, int k, const HeuristicOptions& opt = {},
                                     ColumnPool* pool = nullptr) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
  const Tree root_mst = kruskal_mst(g);

  struct Node {
    Weight lb;
    long id;
    std::vector<EdgeId> forbidden;
    Tree mst;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.lb != b.lb) return a.lb > b.lb;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);
  std::set<std::vector<EdgeId>> seen;  // MST edge sets already queued

  auto node_bound = [&](const Tree& t) {
    return opt.bound == NodeBound::Average ? ceil_div(t.weight, k) : valid_forest_bound(g, t, k);
  };

  HeuristicResult res;
  res.ub = std::numeric_limits<Weight>::max();
  long next_id = 0;
  seen.insert(root_mst.edges);
  queue.push({node_bound(root_mst), next_id++, {}, root_mst});
  res.nodes_created = 1;

  std::vector<char> forbidden_mask(static_cast<std::size_t>(g.num_edges()), 0);
  bool limited = false;
  while (!queue.empty()) {
    if (std::chrono::duration<double>(Clock::now() - start).count() > opt.time_limit ||
        (opt.node_limit >= 0 && res.nodes_expanded >= opt.node_limit)) {
      limited = true;
      break;
    }
    Node u = queue.top();
    queue.pop();
    if (u.lb >= res.ub) continue;
    ++res.nodes_expanded;
    auto trees = tree_mskf_trees(g, u.mst, k);
    Weight value = 0;
    for (const Tree& t : trees) value = std::max(value, t.weight);
    if (value < res.ub) {
      res.ub = value;
      res.forest = make_forest(g, trees);
    }
    if (pool)
      for (const Tree& t : trees) pool->add(t, res.ub);

    std::vector<EdgeId> order = u.mst.edges;
    std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return g.edge(a).w > g.edge(b).w; });
    for (EdgeId e : u.forbidden) forbidden_mask[e] = 1;
    for (EdgeId e : order) {
      forbidden_mask[e] = 1;
      auto child = kruskal_mst_excluding(g, forbidden_mask);
      forbidden_mask[e] = 0;
      if (!child) continue;
      const Weight lb = node_bound(*child);
      if (lb >= res.ub) continue;
      if (!seen.insert(child->edges).second) continue;
      std::vector<EdgeId> h = u.forbidden;
      h.push_back(e);
      queue.push({lb, next_id++, std::move(h), std::move(*child)});
      ++res.nodes_created;
    }
    for (EdgeId e : u.forbidden) forbidden_mask[e] = 0;
  }
  res.exhausted = !limited;
  return res;
}

// ---------------------------------------------------------------------------
// Column seeding by random local modification

/// B(n, k) = ceil(2^(0.1 n + 12 - k/2)).
inline long seed_threshold(int n, int k) {
  const double e = static_cast<double>(n + 120 - 5 * k) / 10.0;
  return static_cast<long>(std::ceil(std::pow(2.0, e)));
}

/// 3^((n - 20)/10) seconds.
inline double seeding_time_limit(int n) { return std::pow(3.0, static_cast<double>(n - 20) / 10.0); }

struct SeedOptions {
  long target = -1;  // pool size to reach; negative = seed_threshold(n, k)
  int stagnation_limit = 1000;
  double time_limit = -1.0;  // negative = seeding_time_limit(n)
};

/// Repeatedly picks a stored tree, removes or adds one random vertex, and
/// stores the induced MST of the result when it is connected, new, and no
/// heavier than ub. Stops at the target size, after `stagnation_limit`
/// consecutive failures, or at the time limit. Returns the number added.
inline long seed_columns(const WeightedGraph& g, int k, Weight ub, ColumnPool& pool, std::uint64_t seed,
                         const SeedOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int n = g.num_vertices();
  const long target = opt.target >= 0 ? opt.target : seed_threshold(n, k);
  const double limit = opt.time_limit >= 0 ? opt.time_limit : seeding_time_limit(n);
  if (pool.empty())
    for (Vertex v = 0; v < n; ++v) pool.add({{v}, {}, 0}, ub);
  SplitMix64 rng(seed);
  long added = 0;
  int failures = 0;
  long iterations = 0;
  std::vector<char> member(static_cast<std::size_t>(n));
  while (pool.size() < target && failures < opt.stagnation_limit) {
    if (iterations++ % 64 == 0 && std::chrono::duration<double>(Clock::now() - start).count() > limit) break;
    const Tree& base = pool[static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size())))];
    std::vector<Vertex> vs = base.vertices;
    const bool remove = rng.coin();
    if (remove) {
      if (vs.size() <= 1) {
        ++failures;
        continue;
      }
      vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(rng.below(vs.size())));
    } else {
      if (static_cast<int>(vs.size()) == n) {
        ++failures;
        continue;
      }
      std::fill(member.begin(), member.end(), 0);
      for (Vertex v : vs) member[v] = 1;
      std::vector<Vertex> outside;
      for (Vertex v = 0; v < n; ++v)
        if (!member[v]) outside.push_back(v);
      vs.push_back(outside[rng.below(outside.size())]);
      std::sort(vs.begin(), vs.end());
    }
    auto t = induced_mst(g, vs);
    if (t && pool.add(*t, ub)) {
      ++added;
      failures = 0;
    } else {
      ++failures;
    }
  }
  return added;
}

}  // namespace bsf
