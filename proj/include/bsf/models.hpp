#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bsf/duals.hpp"
#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/heuristics.hpp"
#include "bsf/lp.hpp"
#include "bsf/max_flow.hpp"
#include "bsf/mip.hpp"
#include "bsf/rules.hpp"

namespace bsf {

// ---------------------------------------------------------------------------
// Flow formulation

/// How the max-min objective is tied to the root weights.
enum class MaxMinMode {
  BigM,   // omega <= g_v + U (1 - y_v)
  Theta,  // theta_v <= g_v, theta_v <= omega, sum_v theta_v = k omega
};

/// Arborescence flow model. Arc 2e is u->v and arc 2e+1 is v->u for edge
/// e = {u, v}.
struct FlowModel {
  MipSpec spec;
  int n = 0;
  int k = 0;
  Weight U = 0;
  bool maximize = false;
  std::vector<int> y, g, z, f, theta;  // theta only in MaxMinMode::Theta
  int omega = -1;

  static int arc(EdgeId e, bool reversed) { return 2 * e + (reversed ? 1 : 0); }
  static EdgeId edge_of(int a) { return a / 2; }
};

namespace detail {

inline Vertex arc_tail(const WeightedGraph& g, int a) {
  const Edge& e = g.edge(a / 2);
  return a % 2 == 0 ? e.u : e.v;
}
inline Vertex arc_head(const WeightedGraph& g, int a) {
  const Edge& e = g.edge(a / 2);
  return a % 2 == 0 ? e.v : e.u;
}

/// Variables, rows (2)-(10) and the valid inequalities shared by both senses.
inline FlowModel flow_skeleton(const WeightedGraph& g, int k, Weight U, bool maximize) {
  const int n = g.num_vertices(), m = g.num_edges();
  if (k < 1 || k > n) throw InvalidArgument("k must lie in [1, n]");
  if (!is_connected(g)) throw DisconnectedGraph("flow model needs a connected graph");
  FlowModel fm;
  fm.n = n;
  fm.k = k;
  fm.U = U;
  fm.maximize = maximize;
  LinearProgram& lp = fm.spec.lp;
  lp.sense = maximize ? ObjectiveSense::Maximize : ObjectiveSense::Minimize;
  const double u = static_cast<double>(U);
  auto av = [](const char* p, int a, int b) { return std::string(p) + "_" + std::to_string(a) + "_" + std::to_string(b); };

  for (Vertex v = 0; v < n; ++v) fm.y.push_back(lp.add_variable(0, 1, 0, "y_" + std::to_string(v)));
  for (Vertex v = 0; v < n; ++v) fm.g.push_back(lp.add_variable(0, u, 0, "g_" + std::to_string(v)));
  for (int a = 0; a < 2 * m; ++a)
    fm.z.push_back(lp.add_variable(0, 1, 0, av("z", arc_tail(g, a), arc_head(g, a))));
  for (int a = 0; a < 2 * m; ++a)
    fm.f.push_back(lp.add_variable(0, u, 0, av("f", arc_tail(g, a), arc_head(g, a))));
  fm.omega = lp.add_variable(0, kInf, 1, "omega");
  for (int v : fm.y) fm.spec.set_integer(v);
  for (int a : fm.z) fm.spec.set_integer(a);
  fm.spec.set_integer(fm.omega, false);

  std::vector<std::vector<int>> in(n), out(n);
  for (int a = 0; a < 2 * m; ++a) {
    out[arc_tail(g, a)].push_back(a);
    in[arc_head(g, a)].push_back(a);
  }

  std::vector<Term> roots;
  for (Vertex v = 0; v < n; ++v) roots.push_back({fm.y[v], 1});
  lp.add_row(roots, RowSense::Equal, k, "roots");
  for (Vertex v = 0; v < n; ++v) {
    std::vector<Term> t{{fm.y[v], 1}};
    for (int a : in[v]) t.push_back({fm.z[a], 1});
    lp.add_row(t, RowSense::Equal, 1, "indeg_" + std::to_string(v));
  }
  for (Vertex v = 0; v < n; ++v) {
    std::vector<Term> t{{fm.g[v], 1}};
    for (int a : in[v]) {
      t.push_back({fm.f[a], 1});
      t.push_back({fm.z[a], -static_cast<double>(g.edge(a / 2).w)});
    }
    for (int a : out[v]) t.push_back({fm.f[a], -1});
    lp.add_row(t, RowSense::Equal, 0, "bal_" + std::to_string(v));
  }
  for (int a = 0; a < 2 * m; ++a) {
    const Vertex s = arc_tail(g, a), h = arc_head(g, a);
    lp.add_row({{fm.f[a], 1}, {fm.z[a], -static_cast<double>(g.edge(a / 2).w)}}, RowSense::GreaterEqual, 0,
               av("flo", s, h));
    lp.add_row({{fm.f[a], 1}, {fm.z[a], -u}}, RowSense::LessEqual, 0, av("fup", s, h));
  }
  for (Vertex v = 0; v < n; ++v)
    lp.add_row({{fm.g[v], 1}, {fm.y[v], -u}}, RowSense::LessEqual, 0, "gup_" + std::to_string(v));
  for (EdgeId e = 0; e < m; ++e)
    lp.add_row({{fm.z[2 * e], 1}, {fm.z[2 * e + 1], 1}}, RowSense::LessEqual, 1,
               av("anti", g.edge(e).u, g.edge(e).v));
  // a root never points to a lower vertex
  for (int a = 0; a < 2 * m; ++a) {
    const Vertex s = arc_tail(g, a), h = arc_head(g, a);
    if (h < s) lp.add_row({{fm.y[s], 1}, {fm.z[a], 1}}, RowSense::LessEqual, 1, av("sym", s, h));
  }
  fm.spec.integral_objective = true;
  return fm;
}

}  // namespace detail

/// Min-max flow model. U must not be below a certified lower bound on the
/// optimum (BadBound), and every tree of some optimal forest must fit U.
inline FlowModel build_flow_minmax(const WeightedGraph& g, int k, Weight U) {
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
  if (!is_connected(g)) throw DisconnectedGraph("flow model needs a connected graph");
  const Weight lb = valid_forest_bound(g, kruskal_mst(g), k);
  if (U < lb) throw BadBound("U = " + std::to_string(U) + " is below the lower bound " + std::to_string(lb));
  FlowModel fm = detail::flow_skeleton(g, k, U, false);
  LinearProgram& lp = fm.spec.lp;
  for (Vertex v = 0; v < fm.n; ++v)
    lp.add_row({{fm.omega, 1}, {fm.g[v], -1}}, RowSense::GreaterEqual, 0, "wmax_" + std::to_string(v));
  std::vector<Term> avg{{fm.omega, static_cast<double>(k)}};
  for (int gv : fm.g) avg.push_back({gv, -1});
  lp.add_row(avg, RowSense::GreaterEqual, 0, "wavg");
  return fm;
}

/// Lightest tree of the max spanning tree cut at its k-1 lightest edges: the
/// value of a feasible forest, hence a lower bound for max-min.
inline Weight maxmin_lower_bound(const WeightedGraph& g, int k) {
  const Tree t = max_spanning_tree(g);
  std::vector<EdgeId> es = t.edges;
  std::sort(es.begin(), es.end(), [&](EdgeId a, EdgeId b) {
    if (g.edge(a).w != g.edge(b).w) return g.edge(a).w < g.edge(b).w;
    return a < b;
  });
  es.erase(es.begin(), es.begin() + (k - 1));
  return make_forest(g, components_of(g, es)).value_maxmin;
}

/// Max-min flow model. Trees are capped by U through g_v <= U y_v, so U
/// should dominate every tree of some optimal forest; the weight of a
/// maximum spanning tree always does.
inline FlowModel build_flow_maxmin(const WeightedGraph& g, int k, Weight U, MaxMinMode mode = MaxMinMode::BigM) {
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
  if (!is_connected(g)) throw DisconnectedGraph("flow model needs a connected graph");
  const Weight lb = maxmin_lower_bound(g, k);
  if (U < lb) throw BadBound("U = " + std::to_string(U) + " is below the lower bound " + std::to_string(lb));
  FlowModel fm = detail::flow_skeleton(g, k, U, true);
  LinearProgram& lp = fm.spec.lp;
  lp.variables[fm.omega].upper = static_cast<double>(U);
  std::vector<Term> avg{{fm.omega, static_cast<double>(k)}};
  for (int gv : fm.g) avg.push_back({gv, -1});
  lp.add_row(avg, RowSense::LessEqual, 0, "wavg");
  if (mode == MaxMinMode::BigM) {
    for (Vertex v = 0; v < fm.n; ++v)
      lp.add_row({{fm.omega, 1}, {fm.g[v], -1}, {fm.y[v], static_cast<double>(U)}}, RowSense::LessEqual,
                 static_cast<double>(U), "wmin_" + std::to_string(v));
    return fm;
  }
  // theta_v vanishes off the roots (theta_v <= g_v <= U y_v); k roots each
  // carrying at most omega must sum to k omega, so all equal omega.
  std::vector<Term> sum{{fm.omega, -static_cast<double>(k)}};
  for (Vertex v = 0; v < fm.n; ++v) {
    const int t = lp.add_variable(0, kInf, 0, "theta_" + std::to_string(v));
    fm.theta.push_back(t);
    lp.add_row({{t, 1}, {fm.g[v], -1}}, RowSense::LessEqual, 0, "thg_" + std::to_string(v));
    lp.add_row({{t, 1}, {fm.omega, -1}}, RowSense::LessEqual, 0, "thw_" + std::to_string(v));
    sum.push_back({t, 1});
  }
  lp.add_row(sum, RowSense::Equal, 0, "thsum");
  return fm;
}

/// Flow-model point encoding `forest`, each tree rooted at its smallest
/// vertex. Usable as a warm start.
inline std::vector<double> flow_point(const WeightedGraph& g, const FlowModel& fm, const SpanningKForest& forest) {
  std::vector<double> x(static_cast<std::size_t>(fm.spec.lp.num_variables()), 0.0);
  for (const Tree& t : forest.trees) {
    const Vertex root = t.vertices.front();
    x[fm.y[root]] = 1;
    x[fm.g[root]] = static_cast<double>(t.weight);
    if (!fm.theta.empty()) x[fm.theta[root]] = static_cast<double>(fm.maximize ? forest.value_maxmin : forest.value_minmax);
    // orient away from the root, then push subtree weights up
    std::map<Vertex, std::vector<EdgeId>> adj;
    for (EdgeId e : t.edges) {
      adj[g.edge(e).u].push_back(e);
      adj[g.edge(e).v].push_back(e);
    }
    std::vector<std::pair<Vertex, int>> order;  // (vertex, incoming arc)
    std::vector<Vertex> stack{root};
    std::set<Vertex> seen{root};
    order.push_back({root, -1});
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (EdgeId e : adj[v]) {
        const Vertex w = g.other(e, v);
        if (!seen.insert(w).second) continue;
        order.push_back({w, FlowModel::arc(e, g.edge(e).u != v)});
        stack.push_back(w);
      }
    }
    std::map<Vertex, double> below;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto [v, a] = *it;
      if (a < 0) continue;
      const double flow = below[v] + static_cast<double>(g.edge(a / 2).w);
      x[fm.z[a]] = 1;
      x[fm.f[a]] = flow;
      below[detail::arc_tail(g, a)] += flow;
    }
  }
  x[fm.omega] = static_cast<double>(fm.maximize ? forest.value_maxmin : forest.value_minmax);
  return x;
}

/// Trees read from z_a = 1, grouped by the roots y_v = 1.
inline SpanningKForest extract_forest_from_flow(const WeightedGraph& g, const FlowModel& fm,
                                                std::span<const double> x) {
  constexpr double tol = 1e-3;
  auto bit = [&](int var) {
    const double v = x[var];
    if (std::abs(v) <= tol) return false;
    if (std::abs(v - 1) <= tol) return true;
    throw InconsistentSolution("fractional value " + std::to_string(v) + " on " + fm.spec.lp.variables[var].name);
  };
  std::vector<EdgeId> edges;
  for (int a = 0; a < static_cast<int>(fm.z.size()); ++a)
    if (bit(fm.z[a])) edges.push_back(a / 2);
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw InconsistentSolution("both orientations of an edge are used");
  std::vector<Tree> trees;
  try {
    trees = components_of(g, edges);
  } catch (const NotATree&) {
    throw InconsistentSolution("selected arcs contain a cycle");
  }
  for (const Tree& t : trees) {
    int roots = 0;
    for (Vertex v : t.vertices) roots += bit(fm.y[v]);
    if (roots != 1) throw InconsistentSolution("a recovered tree has " + std::to_string(roots) + " roots");
  }
  if (static_cast<int>(trees.size()) != fm.k)
    throw InconsistentSolution("recovered " + std::to_string(trees.size()) + " trees, expected " + std::to_string(fm.k));
  return make_forest(g, std::move(trees));
}

// ---------------------------------------------------------------------------
// Cycle elimination formulation

/// Assignment model over x_{e,i} (index e*k + i) and omega (index m*k).
/// Subtour rows arrive only through separate_cycle.
struct CycleModel {
  MipSpec spec;
  int k = 0;
  int m = 0;
  int omega = -1;

  int x(EdgeId e, int i) const { return e * k + i; }
};

namespace detail {

inline double edge_mass(std::span<const double> xbar, int k, EdgeId e) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::max(0.0, xbar[static_cast<std::size_t>(e) * k + i]);
  return s;
}

/// D over V + {s = n, t = n+1}; arc capacities as halved x masses. `pinned`
/// gets an infinite source arc.
inline FlowDigraph<double> separation_digraph(const WeightedGraph& g, std::span<const double> xbar, int k,
                                              Vertex pinned) {
  const int n = g.num_vertices();
  FlowDigraph<double> d;
  d.num_nodes = n + 2;
  d.source = n;
  d.sink = n + 1;
  std::vector<double> star(static_cast<std::size_t>(n), 0.0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const double c = edge_mass(xbar, k, e) / 2;
    d.add_arc(g.edge(e).u, g.edge(e).v, c);
    d.add_arc(g.edge(e).v, g.edge(e).u, c);
    star[g.edge(e).u] += c;
    star[g.edge(e).v] += c;
  }
  for (Vertex u = 0; u < n; ++u) {
    if (u == pinned)
      d.add_arc(n, u, Capacity<double>::inf());
    else
      d.add_arc(n, u, star[u]);
    d.add_arc(u, n + 1, 1.0);
  }
  return d;
}

}  // namespace detail

/// Capacity of the s-t cut S + {s} in the separation digraph (no pin).
inline double cut_capacity(const WeightedGraph& g, std::span<const double> xbar, int k, std::span<const Vertex> S) {
  const auto d = detail::separation_digraph(g, xbar, k, -1);
  std::vector<char> in(static_cast<std::size_t>(d.num_nodes), 0);
  in[d.source] = 1;
  for (Vertex v : S) in[v] = 1;
  double c = 0.0;
  for (const auto& a : d.arcs)
    if (in[a.tail] && !in[a.head]) c += a.cap.value;
  return c;
}

/// Left-hand side of the subtour row for S: x mass on edges inside S.
inline double inside_mass(const WeightedGraph& g, std::span<const double> xbar, int k, std::span<const Vertex> S) {
  std::vector<char> in(static_cast<std::size_t>(g.num_vertices()), 0);
  for (Vertex v : S) in[v] = 1;
  double s = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (in[g.edge(e).u] && in[g.edge(e).v]) s += detail::edge_mass(xbar, k, e);
  return s;
}

struct SeparationOptions {
  int max_cuts = 50;
  double tolerance = 1e-9;
};

/// Vertex sets S with x(E(S)) > |S| - 1, found by one min cut per pinned
/// vertex. Empty iff no subtour inequality is violated (up to tolerance).
inline std::vector<std::vector<Vertex>> separate_cycle(std::span<const double> xbar, const WeightedGraph& g, int k,
                                                       const SeparationOptions& opt = {}) {
  const int n = g.num_vertices();
  if (xbar.size() < static_cast<std::size_t>(g.num_edges()) * k) throw InvalidArgument("x vector is too short");
  double total = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) total += detail::edge_mass(xbar, k, e);
  // cut(S) = |S| + total - x(E(S)), so a violation means cut < total + 1
  const double threshold = total + 1.0 - opt.tolerance;
  std::set<std::vector<Vertex>> seen;
  std::vector<std::vector<Vertex>> out;
  for (Vertex v = 0; v < n && static_cast<int>(out.size()) < opt.max_cuts; ++v) {
    const auto d = detail::separation_digraph(g, xbar, k, v);
    const auto r = max_flow_min_cut(d);
    if (r.value.infinite || r.value.value >= threshold) continue;
    std::vector<Vertex> S;
    for (int u : r.source_side)
      if (u < n) S.push_back(u);
    if (S.size() < 2 || !seen.insert(S).second) continue;
    out.push_back(std::move(S));
  }
  return out;
}

inline Row subtour_row(const WeightedGraph& g, int k, std::span<const Vertex> S) {
  std::vector<char> in(static_cast<std::size_t>(g.num_vertices()), 0);
  for (Vertex v : S) in[v] = 1;
  Row r;
  r.sense = RowSense::LessEqual;
  r.rhs = static_cast<double>(S.size()) - 1;
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (in[g.edge(e).u] && in[g.edge(e).v])
      for (int i = 0; i < k; ++i) r.terms.push_back({e * k + i, 1.0});
  r.name = "sub";
  for (Vertex v : S) r.name += "_" + std::to_string(v);
  return r;
}

inline CycleModel build_cycle_minmax(const WeightedGraph& g, int k, const SeparationOptions& sep = {}) {
  const int n = g.num_vertices(), m = g.num_edges();
  if (k < 1 || k > n) throw InvalidArgument("k must lie in [1, n]");
  CycleModel cm;
  cm.k = k;
  cm.m = m;
  LinearProgram& lp = cm.spec.lp;
  for (EdgeId e = 0; e < m; ++e)
    for (int i = 0; i < k; ++i) {
      lp.add_variable(0, 1, 0, "x_" + std::to_string(e) + "_" + std::to_string(i));
      cm.spec.set_integer(e * k + i);
    }
  cm.omega = lp.add_variable(0, kInf, 1, "omega");
  cm.spec.set_integer(cm.omega, false);

  for (int i = 0; i < k; ++i) {
    std::vector<Term> t{{cm.omega, 1}};
    for (EdgeId e = 0; e < m; ++e) t.push_back({cm.x(e, i), -static_cast<double>(g.edge(e).w)});
    lp.add_row(t, RowSense::GreaterEqual, 0, "ord_" + std::to_string(i));
  }
  for (EdgeId e = 0; e < m; ++e) {
    std::vector<Term> t;
    for (int i = 0; i < k; ++i) t.push_back({cm.x(e, i), 1});
    lp.add_row(t, RowSense::LessEqual, 1, "one_" + std::to_string(e));
  }
  if (k > 1)
    for (Vertex v = 0; v < n; ++v)
      for (EdgeId e : g.incident(v))
        for (EdgeId f : g.incident(v)) {
          if (e == f) continue;
          for (int i = 0; i < k; ++i) {
            std::vector<Term> t{{cm.x(e, i), 1}};
            for (int j = 0; j < k; ++j)
              if (j != i) t.push_back({cm.x(f, j), 1});
            lp.add_row(t, RowSense::LessEqual, 1,
                       "dis_" + std::to_string(v) + "_" + std::to_string(e) + "_" + std::to_string(f) + "_" +
                           std::to_string(i));
          }
        }
  std::vector<Term> all;
  for (int j = 0; j < m * k; ++j) all.push_back({j, 1});
  lp.add_row(all, RowSense::Equal, n - k, "edges");

  const WeightedGraph* gp = &g;  // caller keeps the graph alive
  cm.spec.lazy = [gp, k, m, sep](std::span<const double> x, bool) {
    std::vector<Row> rows;
    for (const auto& S : separate_cycle(x.first(static_cast<std::size_t>(m) * k), *gp, k, sep))
      rows.push_back(subtour_row(*gp, k, S));
    return rows;
  };
  cm.spec.separate_fractional = true;
  cm.spec.integral_objective = true;
  return cm;
}

/// Tree i of `forest` goes to class i.
inline std::vector<double> cycle_point(const WeightedGraph& g, const CycleModel& cm, const SpanningKForest& forest) {
  std::vector<double> x(static_cast<std::size_t>(cm.spec.lp.num_variables()), 0.0);
  for (int i = 0; i < static_cast<int>(forest.trees.size()); ++i)
    for (EdgeId e : forest.trees[i].edges) x[cm.x(e, i)] = 1;
  x[cm.omega] = static_cast<double>(forest.value_minmax);
  (void)g;
  return x;
}

inline SpanningKForest extract_forest_from_cycle(const WeightedGraph& g, const CycleModel& cm,
                                                 std::span<const double> x) {
  std::vector<EdgeId> edges;
  for (EdgeId e = 0; e < cm.m; ++e)
    for (int i = 0; i < cm.k; ++i)
      if (x[cm.x(e, i)] > 0.5) edges.push_back(e);
  try {
    auto trees = components_of(g, edges);
    if (static_cast<int>(trees.size()) != cm.k) throw InconsistentSolution("wrong number of trees");
    return make_forest(g, std::move(trees));
  } catch (const NotATree&) {
    throw InconsistentSolution("selected edges contain a cycle");
  }
}

// ---------------------------------------------------------------------------
// Partition formulation / restricted master

/// Restricted master over a column set. Rows: 0 is -sum x >= -k, then one
/// cover row per vertex, then one weight row per vertex. Variable 0 is
/// omega, variables 1..n are artificials (cover row only, cost P).
struct RmpModel {
  LinearProgram lp;
  int n = 0;
  int k = 0;
  double penalty = 0.0;
  int omega = 0;
  int k_row = 0;
  std::vector<int> cover_rows, weight_rows;
  std::vector<int> artificials;
  std::vector<Tree> columns;
  std::vector<int> column_vars;

  /// Column entries (row, coefficient) for tree t, as Terms.
  std::vector<Term> column_of(const Tree& t) const {
    std::vector<Term> c{{k_row, -1.0}};
    for (Vertex v : t.vertices) c.push_back({cover_rows[v], 1.0});
    for (Vertex v : t.vertices) c.push_back({weight_rows[v], -static_cast<double>(t.weight)});
    return c;
  }

  /// Registers t and appends its variable; returns the variable index.
  int add_column(const Tree& t) {
    const int var = lp.add_variable(0, kInf, 0, "xT_" + std::to_string(columns.size()));
    for (const Term& c : column_of(t)) lp.rows[c.var].terms.push_back({var, c.coef});
    columns.push_back(t);
    column_vars.push_back(var);
    return var;
  }

  bool artificial_active(std::span<const double> x, double tol = 1e-9) const {
    return std::any_of(artificials.begin(), artificials.end(), [&](int a) { return x[a] > tol; });
  }

  DualValues duals(std::span<const double> y) const {
    DualValues d;
    d.theta = std::max(0.0, y[k_row]);
    for (int r : cover_rows) d.eta.push_back(y[r]);
    for (int r : weight_rows) d.zeta.push_back(std::max(0.0, y[r]));
    return d;
  }
};

/// `penalty_base` should be an upper bound on the optimum; the artificial
/// cost is (n+1) times it.
inline RmpModel build_rmp(const WeightedGraph& g, std::span<const Tree> pool, int k,
                          std::span<const BranchRule> rules, Weight penalty_base) {
  const int n = g.num_vertices();
  if (k < 1 || k > n) throw InvalidArgument("k must lie in [1, n]");
  RmpModel r;
  r.n = n;
  r.k = k;
  r.penalty = static_cast<double>(n + 1) * static_cast<double>(std::max<Weight>(penalty_base, 1));
  r.omega = r.lp.add_variable(0, kInf, 1, "omega");
  for (Vertex v = 0; v < n; ++v) r.artificials.push_back(r.lp.add_variable(0, kInf, r.penalty, "art_" + std::to_string(v)));
  r.k_row = r.lp.add_row({}, RowSense::GreaterEqual, -k, "count");
  for (Vertex v = 0; v < n; ++v)
    r.cover_rows.push_back(r.lp.add_row({{r.artificials[v], 1}}, RowSense::Equal, 1, "cover_" + std::to_string(v)));
  for (Vertex v = 0; v < n; ++v)
    r.weight_rows.push_back(r.lp.add_row({{r.omega, 1}}, RowSense::GreaterEqual, 0, "wt_" + std::to_string(v)));
  for (const Tree& t : pool)
    if (respects(t, rules)) r.add_column(t);
  return r;
}

inline RmpModel build_rmp(const WeightedGraph& g, const ColumnPool& pool, int k, std::span<const BranchRule> rules,
                          Weight penalty_base) {
  return build_rmp(g, std::span<const Tree>(pool.trees()), k, rules, penalty_base);
}

/// Integer version over the registered columns, artificials fixed at zero.
inline MipSpec rmp_integer_spec(const RmpModel& model) {
  MipSpec spec;
  spec.lp = model.lp;
  for (int a : model.artificials) spec.lp.variables[a].upper = 0;
  for (int v : model.column_vars) {
    spec.lp.variables[v].upper = 1;
    spec.set_integer(v);
  }
  spec.set_integer(model.omega, false);
  spec.integral_objective = true;
  return spec;
}

inline MipResult solve_rmp_integer(const RmpModel& model, double time_limit) {
  MipOptions opt;
  opt.time_limit = time_limit;
  return solve_mip(rmp_integer_spec(model), opt);
}

/// Forest from an integral master point; fewer than k trees are split.
inline SpanningKForest forest_from_rmp(const WeightedGraph& g, const RmpModel& model, std::span<const double> x) {
  std::vector<Tree> trees;
  for (std::size_t c = 0; c < model.columns.size(); ++c)
    if (x[model.column_vars[c]] > 0.5) trees.push_back(model.columns[c]);
  return make_forest(g, split_to_k(g, std::move(trees), model.k));
}

}  // namespace bsf
