#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bsf/duals.hpp"
#include "bsf/errors.hpp"
#include "bsf/graph.hpp"

namespace bsf {

struct OracleOptions {
  int max_vertices = 14;
};

struct OracleResult {
  Weight value = 0;
  SpanningKForest forest;
};

namespace detail {

inline std::vector<std::uint64_t> neighbor_masks(const WeightedGraph& g) {
  std::vector<std::uint64_t> nb(static_cast<std::size_t>(g.num_vertices()), 0);
  for (const Edge& e : g.edges()) {
    nb[e.u] |= std::uint64_t{1} << e.v;
    nb[e.v] |= std::uint64_t{1} << e.u;
  }
  return nb;
}

inline std::vector<Vertex> mask_vertices(std::uint64_t mask) {
  std::vector<Vertex> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

// Calls f(S) for every connected vertex set S with min(S) == v inside
// `allowed` (which must contain v). Each set is produced exactly once.
template <class F>
void for_each_connected_set(const std::vector<std::uint64_t>& nb, int v, std::uint64_t allowed, F&& f) {
  auto grow = [&](auto&& self, std::uint64_t s, std::uint64_t frontier, std::uint64_t banned) -> bool {
    if (!f(s)) return false;
    while (frontier) {
      const int u = std::countr_zero(frontier);
      const std::uint64_t bit = std::uint64_t{1} << u;
      frontier &= ~bit;
      const std::uint64_t s2 = s | bit;
      const std::uint64_t f2 = (frontier | nb[u]) & allowed & ~s2 & ~banned;
      if (!self(self, s2, f2, banned)) return false;
      banned |= bit;
    }
    return true;
  };
  const std::uint64_t start = std::uint64_t{1} << v;
  grow(grow, start, nb[v] & allowed & ~start, 0);
}

// Spanning-tree weight of the block (min or max spanning tree), cached.
class BlockWeights {
 public:
  BlockWeights(const WeightedGraph& g, bool maximize) : g_(g) {
    order_.assign(g.edges_by_weight().begin(), g.edges_by_weight().end());
    if (maximize)
      std::stable_sort(order_.begin(), order_.end(), [&](EdgeId a, EdgeId b) { return g.edge(a).w > g.edge(b).w; });
  }

  // Caller guarantees the block is connected.
  Weight operator()(std::uint64_t mask) {
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    UnionFind uf(g_.num_vertices());
    Weight w = 0;
    for (EdgeId e : order_) {
      const Edge& ed = g_.edge(e);
      if (!(mask >> ed.u & 1) || !(mask >> ed.v & 1)) continue;
      if (uf.unite(ed.u, ed.v)) w += ed.w;
    }
    cache_.emplace(mask, w);
    return w;
  }

  Tree tree(std::uint64_t mask) {
    auto vs = mask_vertices(mask);
    auto t = induced_spanning_tree(g_, vs, order_);
    return *t;
  }

 private:
  const WeightedGraph& g_;
  std::vector<EdgeId> order_;
  std::unordered_map<std::uint64_t, Weight> cache_;
};

// Threshold test: can V be split into blocks (exactly `blocks` of them, or
// at most that many when !exact) whose spanning-tree weight satisfies
// ok(weight)? Blocks are chosen in order of their smallest vertex, smallest
// block mask first, so the first success is the lexicographically smallest.
template <class Ok>
bool partition_feasible(const std::vector<std::uint64_t>& nb, BlockWeights& bw, int n, int blocks, bool exact, Ok ok,
                        std::vector<std::uint64_t>& chosen) {
  std::unordered_set<std::uint64_t> failed;
  const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  auto rec = [&](auto&& self, std::uint64_t rest, int left) -> bool {
    if (rest == 0) return !exact || left == 0;
    if (left == 0) return false;
    if (exact && std::popcount(rest) < left) return false;
    const std::uint64_t key = (rest << 6) | static_cast<std::uint64_t>(left);
    if (failed.count(key)) return false;
    const int v = std::countr_zero(rest);
    std::vector<std::uint64_t> cands;
    for_each_connected_set(nb, v, rest, [&](std::uint64_t s) {
      if (ok(bw(s))) cands.push_back(s);
      return true;
    });
    std::sort(cands.begin(), cands.end());
    for (std::uint64_t s : cands) {
      chosen.push_back(s);
      if (self(self, rest & ~s, left - 1)) return true;
      chosen.pop_back();
    }
    failed.insert(key);
    return false;
  };
  chosen.clear();
  return rec(rec, full, blocks);
}

inline void check_oracle_input(const WeightedGraph& g, int k, const OracleOptions& opt) {
  if (g.num_vertices() > opt.max_vertices || g.num_vertices() > 60)
    throw TooLarge("oracle limited to " + std::to_string(opt.max_vertices) + " vertices, got " +
                   std::to_string(g.num_vertices()));
  if (g.num_vertices() == 0 || !is_connected(g)) throw DisconnectedGraph("oracle needs a connected graph");
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
}

inline SpanningKForest forest_from_masks(const WeightedGraph& g, BlockWeights& bw, const std::vector<std::uint64_t>& masks,
                                         int k) {
  std::vector<Tree> trees;
  for (std::uint64_t s : masks) trees.push_back(bw.tree(s));
  return make_forest(g, split_to_k(g, std::move(trees), k));
}

}  // namespace detail

/// Exact min-max value by binary search on the answer. Each threshold test
/// searches partitions into connected blocks; a block is represented by its
/// MST since a lighter tree on the same vertex set never hurts.
inline OracleResult exact_minmax(const WeightedGraph& g, int k, const OracleOptions& opt = {}) {
  detail::check_oracle_input(g, k, opt);
  const int n = g.num_vertices();
  auto nb = detail::neighbor_masks(g);
  detail::BlockWeights bw(g, false);
  std::vector<std::uint64_t> chosen, best;
  Weight lo = 0, hi = kruskal_mst(g).weight;
  while (lo < hi) {
    const Weight mid = lo + (hi - lo) / 2;
    if (detail::partition_feasible(nb, bw, n, k, false, [&](Weight w) { return w <= mid; }, chosen))
      hi = mid;
    else
      lo = mid + 1;
  }
  detail::partition_feasible(nb, bw, n, k, false, [&](Weight w) { return w <= lo; }, best);
  OracleResult r;
  r.forest = detail::forest_from_masks(g, bw, best, k);
  r.value = r.forest.value_minmax;
  return r;
}

/// Exact max-min value; blocks carry maximum spanning trees and the count is
/// exactly k.
inline OracleResult exact_maxmin(const WeightedGraph& g, int k, const OracleOptions& opt = {}) {
  detail::check_oracle_input(g, k, opt);
  const int n = g.num_vertices();
  auto nb = detail::neighbor_masks(g);
  detail::BlockWeights bw(g, true);
  std::vector<std::uint64_t> chosen, best;
  Weight lo = 0, hi = max_spanning_tree(g).weight;
  while (lo < hi) {
    const Weight mid = lo + (hi - lo + 1) / 2;
    if (detail::partition_feasible(nb, bw, n, k, true, [&](Weight w) { return w >= mid; }, chosen))
      lo = mid;
    else
      hi = mid - 1;
  }
  detail::partition_feasible(nb, bw, n, k, true, [&](Weight w) { return w >= lo; }, best);
  OracleResult r;
  std::vector<Tree> trees;
  for (std::uint64_t s : best) trees.push_back(bw.tree(s));
  r.forest = make_forest(g, std::move(trees));
  r.value = r.forest.value_maxmin;
  return r;
}

/// Induced MST of every connected vertex subset, keeping weight <= budget.
/// Ordered by vertex-set bitmask.
inline std::vector<Tree> enumerate_dominant_trees(const WeightedGraph& g, Weight budget, int max_vertices = 10) {
  const int n = g.num_vertices();
  if (n > max_vertices) throw TooLarge("tree enumeration limited to " + std::to_string(max_vertices) + " vertices");
  auto nb = detail::neighbor_masks(g);
  std::vector<std::uint64_t> masks;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (int v = 0; v < n; ++v)
    detail::for_each_connected_set(nb, v, full & ~((std::uint64_t{1} << v) - 1), [&](std::uint64_t s) {
      masks.push_back(s);
      return true;
    });
  std::sort(masks.begin(), masks.end());
  std::vector<Tree> out;
  for (std::uint64_t s : masks) {
    auto t = induced_mst(g, detail::mask_vertices(s));
    if (t->weight <= budget) out.push_back(std::move(*t));
  }
  return out;
}

/// Every tree of g (all vertex subsets, all spanning trees of each), by
/// edge-subset enumeration. Only for very small graphs.
inline std::vector<Tree> enumerate_all_trees(const WeightedGraph& g) {
  const int n = g.num_vertices(), m = g.num_edges();
  if (m > 22) throw TooLarge("full tree enumeration limited to 22 edges");
  std::vector<Tree> out;
  for (Vertex v = 0; v < n; ++v) out.push_back({{v}, {}, 0});
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    UnionFind uf(n);
    bool acyclic = true;
    std::vector<EdgeId> es;
    std::uint64_t vs = 0;
    Weight w = 0;
    for (int e = 0; e < m && acyclic; ++e) {
      if (!(mask >> e & 1)) continue;
      acyclic = uf.unite(g.edge(e).u, g.edge(e).v);
      es.push_back(e);
      vs |= (std::uint64_t{1} << g.edge(e).u) | (std::uint64_t{1} << g.edge(e).v);
      w += g.edge(e).w;
    }
    if (!acyclic || std::popcount(vs) != static_cast<int>(es.size()) + 1) continue;
    out.push_back({detail::mask_vertices(vs), es, w});
  }
  return out;
}

struct PricingOracleResult {
  double rho = 0.0;
  Tree tree;
};

/// Maximizes the reduced cost over trees with weight <= budget. With zeta >= 0
/// the MST of a vertex set is a best tree on that set. Ties go to the smaller
/// vertex set, then the lexicographically smaller one.
inline PricingOracleResult pricing_oracle(const WeightedGraph& g, const DualValues& d, Weight budget,
                                          int max_vertices = 10) {
  auto trees = enumerate_dominant_trees(g, budget, max_vertices);
  if (trees.empty()) throw InvalidArgument("no tree fits the budget");
  std::optional<PricingOracleResult> best;
  for (Tree& t : trees) {
    const double rho = reduced_cost(t, d);
    if (!best || rho > best->rho + 1e-12 ||
        (std::abs(rho - best->rho) <= 1e-12 &&
         (t.size() < best->tree.size() || (t.size() == best->tree.size() && t.vertices < best->tree.vertices))))
      best = PricingOracleResult{rho, t};
  }
  return *best;
}

}  // namespace bsf
