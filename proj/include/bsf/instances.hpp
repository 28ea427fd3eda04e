#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/rng.hpp"

namespace bsf {

struct Instance {
  WeightedGraph graph;
  int k = 1;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct InstanceSpec {
  int n = 10;
  double p = 0.5;
  int k = 2;
  std::uint64_t seed = 1;
  Weight min_weight = 1;
  Weight max_weight = 100;
  int max_attempts = 10000;
};

/// m = floor(p * n(n-1)/2). The small epsilon keeps products such as
/// 0.3 * 15 = 4.499999... from losing an edge to rounding.
inline int edge_count(int n, double p) {
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  return static_cast<int>(std::floor(p * pairs + 1e-9));
}

inline void validate(const InstanceSpec& s) {
  if (s.n < 2) throw InvalidArgument("n must be at least 2");
  if (s.k < 1 || s.k > s.n) throw InvalidArgument("k must lie in [1, n]");
  if (!(s.p > 0.0 && s.p <= 1.0)) throw InvalidArgument("p must lie in (0, 1]");
  if (s.min_weight < 0 || s.min_weight > s.max_weight) throw InvalidArgument("bad weight range");
  if (s.max_attempts < 1) throw InvalidArgument("max_attempts must be positive");
  if (edge_count(s.n, s.p) < s.n - 1)
    throw InfeasibleDensity("m = " + std::to_string(edge_count(s.n, s.p)) + " < n - 1 = " + std::to_string(s.n - 1));
}

/// Uniform G(n, m) with connectivity rejection, then i.i.d. uniform weights.
inline Instance generate(const InstanceSpec& s) {
  validate(s);
  const int n = s.n;
  const int m = edge_count(n, s.p);
  const std::int64_t pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
  // pair index -> (u, v) with u < v, row-major over u
  std::vector<std::pair<int, int>> universe;
  universe.reserve(static_cast<std::size_t>(pairs));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) universe.emplace_back(u, v);

  SplitMix64 rng(s.seed);
  std::vector<int> idx(static_cast<std::size_t>(pairs));
  for (int attempt = 0; attempt < s.max_attempts; ++attempt) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pairs - i)));
      std::swap(idx[i], idx[j]);
    }
    std::vector<int> chosen(idx.begin(), idx.begin() + m);
    std::sort(chosen.begin(), chosen.end());
    UnionFind uf(n);
    int merged = 0;
    for (int c : chosen) merged += uf.unite(universe[c].first, universe[c].second);
    if (merged != n - 1) continue;
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    for (int c : chosen)
      edges.push_back({universe[c].first, universe[c].second, rng.uniform_int(s.min_weight, s.max_weight)});
    return {WeightedGraph(n, std::move(edges)), s.k};
  }
  throw GenerationTimeout("no connected graph after " + std::to_string(s.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Text format:  '#' comments, header "n m k", then m lines "u v w".

inline void write_instance(std::ostream& os, const Instance& inst) {
  const WeightedGraph& g = inst.graph;
  os << g.num_vertices() << ' ' << g.num_edges() << ' ' << inst.k << '\n';
  for (const Edge& e : g.edges()) os << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

namespace detail {

// Next non-comment, non-blank line; false at EOF.
inline bool next_data_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

template <class... Ts>
bool parse_exact(const std::string& line, Ts&... out) {
  std::istringstream ss(line);
  ((ss >> out), ...);
  if (ss.fail()) return false;
  std::string rest;
  return !(ss >> rest);
}

}  // namespace detail

inline Instance read_instance(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!detail::next_data_line(is, line, lineno)) throw ParseError(lineno, "missing header 'n m k'");
  long long n = 0, m = 0, k = 0;
  if (!detail::parse_exact(line, n, m, k)) throw ParseError(lineno, "header must be 'n m k'");
  if (n < 1 || n > 1'000'000) throw ParseError(lineno, "vertex count out of range");
  if (m < 0) throw ParseError(lineno, "negative edge count");
  if (k < 1 || k > n) throw ParseError(lineno, "k must lie in [1, n]");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> seen(static_cast<std::size_t>(n));
  for (long long i = 0; i < m; ++i) {
    if (!detail::next_data_line(is, line, lineno)) throw ParseError(lineno, "expected " + std::to_string(m) + " edges");
    long long u = 0, v = 0;
    long long w = 0;
    if (!detail::parse_exact(line, u, v, w)) throw ParseError(lineno, "edge line must be 'u v w'");
    if (u < 0 || u >= n || v < 0 || v >= n) throw ParseError(lineno, "vertex id outside [0, n)");
    if (u == v) throw ParseError(lineno, "self-loop");
    if (w < 0) throw ParseError(lineno, "negative weight");
    auto& su = seen[static_cast<std::size_t>(std::min(u, v))];
    if (std::find(su.begin(), su.end(), static_cast<int>(std::max(u, v))) != su.end())
      throw ParseError(lineno, "parallel edge");
    su.push_back(static_cast<int>(std::max(u, v)));
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), w});
  }
  if (detail::next_data_line(is, line, lineno)) throw ParseError(lineno, "trailing data after the edge list");
  return {WeightedGraph(static_cast<int>(n), std::move(edges)), static_cast<int>(k)};
}

inline void write_instance(const std::string& path, const Instance& inst) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_instance(os, inst);
  if (!os) throw IoError("write failed: " + path);
}

inline Instance read_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_instance(is);
}

// Solution file: the min-max value, then one line per tree with its edge ids.
// A singleton tree is an empty line.

inline void write_solution(std::ostream& os, const SpanningKForest& f) {
  os << f.value_minmax << '\n';
  for (const Tree& t : f.trees) {
    for (std::size_t i = 0; i < t.edges.size(); ++i) os << (i ? " " : "") << t.edges[i];
    os << '\n';
  }
}

inline SpanningKForest read_solution(std::istream& is, const WeightedGraph& g) {
  std::string line;
  int lineno = 0;
  if (!detail::next_data_line(is, line, lineno)) throw ParseError(lineno, "missing value line");
  long long value = 0;
  if (!detail::parse_exact(line, value)) throw ParseError(lineno, "value line must hold one integer");
  std::vector<EdgeId> all;
  int lines = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos && line[line.find_first_not_of(" \t\r")] == '#')
      continue;
    ++lines;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      long long e = -1;
      try {
        e = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || e < 0 || e >= g.num_edges()) throw ParseError(lineno, "bad edge id '" + tok + "'");
      all.push_back(static_cast<EdgeId>(e));
    }
  }
  std::vector<Tree> trees;
  try {
    trees = components_of(g, all);
  } catch (const NotATree&) {
    throw InconsistentSolution("solution edges contain a cycle");
  }
  if (static_cast<int>(trees.size()) != lines)
    throw InconsistentSolution("tree lines do not match the components of the edge set");
  auto f = make_forest(g, std::move(trees));
  if (f.value_minmax != value) throw InconsistentSolution("stated value differs from the recomputed value");
  return f;
}

// ---------------------------------------------------------------------------
// Named instances.

/// The 8-vertex example: unit edges v1v2, v2v5, v5v3, v3v4, v5v6, v6v7, v6v8
/// and v2v3 of weight 3 (v_i is vertex i-1).
inline WeightedGraph figure1_graph() {
  return WeightedGraph(8, {{0, 1, 1}, {1, 4, 1}, {4, 2, 1}, {2, 3, 1}, {1, 2, 3}, {4, 5, 1}, {5, 6, 1}, {7, 5, 1}});
}

/// k paths u_i - a_i - b_i of unit weight plus edges u_k u_i. Edge ids put
/// the leaf edges a_i b_i last, so removing the highest ids among equal
/// weights strips leaves.
inline WeightedGraph spider_graph(int k) {
  if (k < 2) throw InvalidArgument("spider family needs k >= 2");
  auto u = [](int i) { return 3 * i; };
  auto a = [](int i) { return 3 * i + 1; };
  auto b = [](int i) { return 3 * i + 2; };
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) edges.push_back({u(i), a(i), 1});
  for (int i = 0; i < k - 1; ++i) edges.push_back({u(k - 1), u(i), 1});
  for (int i = 0; i < k; ++i) edges.push_back({a(i), b(i), 1});
  return WeightedGraph(3 * k, std::move(edges));
}

/// k paths u_i - x_i - y_i - v_i with unit end edges and middle edge tau,
/// plus spokes u_k u_i and v_k v_i of weight tau. Ids order the middle
/// edges of P_1..P_{k-1} last, so Kruskal drops exactly those.
inline WeightedGraph bad_family_graph(int k, Weight tau) {
  if (k < 2 || k % 2 != 0) throw InvalidArgument("bad family needs an even k >= 2");
  if (tau < 1) throw InvalidArgument("tau must be positive");
  auto u = [](int i) { return 4 * i; };
  auto x = [](int i) { return 4 * i + 1; };
  auto y = [](int i) { return 4 * i + 2; };
  auto v = [](int i) { return 4 * i + 3; };
  const int last = k - 1;
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) {
    edges.push_back({u(i), x(i), 1});
    edges.push_back({y(i), v(i), 1});
  }
  edges.push_back({x(last), y(last), tau});
  for (int i = 0; i < last; ++i) {
    edges.push_back({u(last), u(i), tau});
    edges.push_back({v(last), v(i), tau});
  }
  for (int i = 0; i < last; ++i) edges.push_back({x(i), y(i), tau});
  return WeightedGraph(4 * k, std::move(edges));
}

/// Path 0-1-...-(n-1) with the given weights.
inline WeightedGraph path_graph(const std::vector<Weight>& weights) {
  std::vector<Edge> edges;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) edges.push_back({i, i + 1, weights[i]});
  return WeightedGraph(static_cast<int>(weights.size()) + 1, std::move(edges));
}

/// Star with centre 0.
inline WeightedGraph star_graph(const std::vector<Weight>& weights) {
  std::vector<Edge> edges;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) edges.push_back({0, i + 1, weights[i]});
  return WeightedGraph(static_cast<int>(weights.size()) + 1, std::move(edges));
}

/// Subgraph consisting of the edges of t (vertex ids unchanged, edge ids
/// renumbered in t.edges order).
inline WeightedGraph tree_as_graph(const WeightedGraph& g, const Tree& t) {
  std::vector<Edge> edges;
  for (EdgeId e : t.edges) edges.push_back(g.edge(e));
  return WeightedGraph(g.num_vertices(), std::move(edges));
}

}  // namespace bsf
