#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bsf/duals.hpp"
#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/max_flow.hpp"
#include "bsf/mip.hpp"
#include "bsf/rules.hpp"

namespace bsf {

// ---------------------------------------------------------------------------
// Budgeted prize-collecting Steiner tree, arborescence model

struct BpcstOptions {
  std::optional<Vertex> forced_root;  // the root arc must enter this vertex
  double root_cost = 0.0;             // subtracted from every root arc profit
  /// Lower limit on the total arc profit; disabled when absent.
  std::optional<double> profit_floor = 0.0;
};

/// Variables: one root arc per vertex, two arcs per edge (n + 2e is u->v,
/// n + 2e + 1 is v->u), one y per vertex.
struct BpcstModel {
  MipSpec spec;
  int n = 0;
  int m = 0;
  int budget_row = -1;

  int root_arc(Vertex v) const { return v; }
  int arc(EdgeId e, bool reversed) const { return n + 2 * e + (reversed ? 1 : 0); }
  int y(Vertex v) const { return n + 2 * m + v; }

  /// Tree selected by an integral point.
  Tree decode(const WeightedGraph& g, std::span<const double> x) const {
    std::vector<Vertex> vs;
    std::vector<EdgeId> es;
    for (Vertex v = 0; v < n; ++v)
      if (x[y(v)] > 0.5) vs.push_back(v);
    for (EdgeId e = 0; e < m; ++e)
      if (x[arc(e, false)] + x[arc(e, true)] > 0.5) es.push_back(e);
    try {
      return make_tree(g, std::move(vs), std::move(es));
    } catch (const NotATree&) {
      throw InconsistentSolution("arborescence point does not describe a tree");
    }
  }
};

namespace detail {

/// Violated connectivity rows of an integral arborescence point: for each v
/// with y_v = 1 whose min cut from the root is below 1, the arcs entering the
/// sink side must carry y_v.
inline std::vector<Row> arborescence_cuts(int n, std::span<const Edge> edges, std::span<const double> x) {
  const int m = static_cast<int>(edges.size());
  const int root = n;
  std::vector<Row> rows;
  std::set<std::vector<int>> seen;
  for (Vertex v = 0; v < n; ++v) {
    const double yv = x[n + 2 * m + v];
    if (yv < 1e-6) continue;
    FlowDigraph<double> d;
    d.num_nodes = n + 1;
    d.source = root;
    d.sink = v;
    for (Vertex u = 0; u < n; ++u)
      if (x[u] > 1e-9) d.add_arc(root, u, x[u]);
    for (EdgeId e = 0; e < m; ++e) {
      if (x[n + 2 * e] > 1e-9) d.add_arc(edges[e].u, edges[e].v, x[n + 2 * e]);
      if (x[n + 2 * e + 1] > 1e-9) d.add_arc(edges[e].v, edges[e].u, x[n + 2 * e + 1]);
    }
    auto res = max_flow_min_cut(d);
    if (res.value.value >= yv - 1e-6) continue;
    std::vector<char> src(static_cast<std::size_t>(n + 1), 0);
    for (int s : res.source_side) src[s] = 1;
    std::vector<int> S;
    for (Vertex u = 0; u < n; ++u)
      if (!src[u]) S.push_back(u);
    if (!seen.insert(S).second) continue;
    Row r;
    r.sense = RowSense::GreaterEqual;
    r.rhs = 0.0;
    r.name = "conn_" + std::to_string(v);
    for (int u : S) r.terms.push_back({u, 1.0});
    for (EdgeId e = 0; e < m; ++e) {
      const bool in_u = !src[edges[e].u], in_v = !src[edges[e].v];
      if (in_v && !in_u) r.terms.push_back({n + 2 * e, 1.0});
      if (in_u && !in_v) r.terms.push_back({n + 2 * e + 1, 1.0});
    }
    r.terms.push_back({n + 2 * m + v, -1.0});
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

/// Maximize sum_v p(v) - sum_e c(e) - root_cost over trees of weight <= budget.
inline BpcstModel build_bpcst(const WeightedGraph& g, std::span<const double> prizes, std::span<const double> costs,
                              Weight budget, const BpcstOptions& opt = {}) {
  const int n = g.num_vertices(), m = g.num_edges();
  if (static_cast<int>(prizes.size()) != n || static_cast<int>(costs.size()) != m)
    throw InvalidArgument("prize/cost vectors do not match the graph");
  if (budget < 0) throw InvalidArgument("budget must be non-negative");
  BpcstModel b;
  b.n = n;
  b.m = m;
  LinearProgram& lp = b.spec.lp;
  lp.sense = ObjectiveSense::Maximize;
  for (Vertex v = 0; v < n; ++v) lp.add_variable(0, 1, prizes[v] - opt.root_cost, "r_" + std::to_string(v));
  for (EdgeId e = 0; e < m; ++e) {
    const Edge& ed = g.edge(e);
    lp.add_variable(0, 1, prizes[ed.v] - costs[e], "a_" + std::to_string(ed.u) + "_" + std::to_string(ed.v));
    lp.add_variable(0, 1, prizes[ed.u] - costs[e], "a_" + std::to_string(ed.v) + "_" + std::to_string(ed.u));
  }
  for (Vertex v = 0; v < n; ++v) lp.add_variable(0, 1, 0, "y_" + std::to_string(v));
  for (int j = 0; j < lp.num_variables(); ++j) b.spec.set_integer(j);

  std::vector<Term> spend;
  for (EdgeId e = 0; e < m; ++e) {
    const double w = static_cast<double>(g.edge(e).w);
    if (w == 0) continue;
    spend.push_back({b.arc(e, false), w});
    spend.push_back({b.arc(e, true), w});
  }
  b.budget_row = lp.add_row(std::move(spend), RowSense::LessEqual, static_cast<double>(budget), "budget");

  std::vector<Term> root;
  for (Vertex v = 0; v < n; ++v) root.push_back({b.root_arc(v), 1});
  lp.add_row(std::move(root), RowSense::Equal, 1, "root");

  for (Vertex v = 0; v < n; ++v) {
    std::vector<Term> in{{b.root_arc(v), 1}, {b.y(v), -1}};
    for (EdgeId e : g.incident(v)) in.push_back({b.arc(e, g.edge(e).u == v), 1});
    lp.add_row(std::move(in), RowSense::Equal, 0, "indeg_" + std::to_string(v));
  }
  // an arc leaves only a chosen vertex
  for (EdgeId e = 0; e < m; ++e) {
    const Edge& ed = g.edge(e);
    lp.add_row({{b.arc(e, false), 1}, {b.y(ed.u), -1}}, RowSense::LessEqual, 0, "tail_" + std::to_string(2 * e));
    lp.add_row({{b.arc(e, true), 1}, {b.y(ed.v), -1}}, RowSense::LessEqual, 0, "tail_" + std::to_string(2 * e + 1));
  }
  if (opt.profit_floor) {
    std::vector<Term> prof;
    for (int j = 0; j < lp.num_variables(); ++j)
      if (lp.variables[j].objective != 0) prof.push_back({j, lp.variables[j].objective});
    lp.add_row(std::move(prof), RowSense::GreaterEqual, *opt.profit_floor, "profit");
  }
  if (opt.forced_root) {
    if (*opt.forced_root < 0 || *opt.forced_root >= n) throw InvalidArgument("forced root outside the graph");
    lp.variables[b.root_arc(*opt.forced_root)].lower = 1;
  }

  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  b.spec.lazy = [n, edges](std::span<const double> x, bool) { return detail::arborescence_cuts(n, edges, x); };
  b.spec.separate_fractional = true;
  return b;
}

/// Appends y_u - y_v = 0 (together) or y_u + y_v <= 1 (apart) per rule.
inline void inject_branch_rules(BpcstModel& model, std::span<const BranchRule> rules) {
  for (const BranchRule& r : rules) {
    if (r.kind == RuleKind::Together)
      model.spec.lp.add_row({{model.y(r.u), 1}, {model.y(r.v), -1}}, RowSense::Equal, 0,
                            "together_" + std::to_string(r.u) + "_" + std::to_string(r.v));
    else
      model.spec.lp.add_row({{model.y(r.u), 1}, {model.y(r.v), 1}}, RowSense::LessEqual, 1,
                            "apart_" + std::to_string(r.u) + "_" + std::to_string(r.v));
  }
}

struct BpcstSolution {
  MipStatus status = MipStatus::Infeasible;
  double objective = 0.0;
  std::optional<Tree> best;
  std::vector<Tree> incumbents;  // every incumbent tree, oldest first, best last
};

inline BpcstSolution solve_bpcst(const WeightedGraph& g, const BpcstModel& model, double time_limit = 60.0,
                                 std::optional<double> cutoff = std::nullopt) {
  MipOptions opt;
  opt.cutoff = cutoff;
  opt.time_limit = time_limit;
  opt.relative_gap = 1e-9;
  opt.keep_incumbents = true;
  auto r = solve_mip(model.spec, opt);
  BpcstSolution s;
  s.status = r.status;
  if (!r.has_solution()) return s;
  s.objective = r.objective;
  for (const auto& x : r.incumbents) s.incumbents.push_back(model.decode(g, x));
  s.best = model.decode(g, r.solution);
  return s;
}

// ---------------------------------------------------------------------------
// Pricing strategies

struct PricingOptions {
  double time_limit = 60.0;     // whole call, seconds
  double min_reduced_cost = 1e-6;
  double support_tol = 1e-9;    // zeta above this counts as positive
  bool early_return = true;     // fixed weight: stop after the first W with columns
  bool jump_on_success = true;  // fixed weight: next W is w(T) - 1 after a hit
};

struct PricingResult {
  std::vector<Tree> columns;  // rho > min_reduced_cost, best first, distinct
  int subproblems = 0;
  bool complete = true;       // false when a subproblem hit the time limit
};

namespace detail {

class ColumnCollector {
 public:
  ColumnCollector(const DualValues& d, double min_rho) : d_(d), min_rho_(min_rho) {}

  bool offer(const Tree& t) {
    const double rho = reduced_cost(t, d_);
    if (rho <= min_rho_ || !seen_.insert(t).second) return false;
    found_.push_back({rho, t});
    return true;
  }
  std::vector<Tree> take() {
    std::stable_sort(found_.begin(), found_.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Tree> out;
    for (auto& f : found_) out.push_back(std::move(f.second));
    return out;
  }
  bool empty() const { return found_.empty(); }

 private:
  const DualValues& d_;
  double min_rho_;
  std::set<Tree> seen_;
  std::vector<std::pair<double, Tree>> found_;
};

inline void check_duals(const WeightedGraph& g, const DualValues& d) {
  if (static_cast<int>(d.eta.size()) != g.num_vertices() || static_cast<int>(d.zeta.size()) != g.num_vertices())
    throw InvalidArgument("dual vectors do not match the graph");
}

}  // namespace detail

/// Vertices with positive zeta.
inline std::vector<Vertex> zeta_support(const DualValues& d, double tol = 1e-9) {
  std::vector<Vertex> b;
  for (Vertex v = 0; v < static_cast<Vertex>(d.zeta.size()); ++v)
    if (d.zeta[v] > tol) b.push_back(v);
  return b;
}

/// True when 2^|B| < 2 UB, i.e. enumerating subsets of the support is allowed.
inline bool fixed_vertices_allowed(std::size_t support, Weight ub) {
  if (support >= 62) return false;
  return (std::int64_t{1} << support) < 2 * static_cast<std::int64_t>(ub);
}

/// M = 1 + sum |eta| + UB sum zeta.
inline double fixed_vertices_penalty(const DualValues& d, Weight ub) {
  double M = 1.0;
  for (double e : d.eta) M += std::abs(e);
  double zsum = 0.0;
  for (double z : d.zeta) zsum += z;
  return M + static_cast<double>(ub) * zsum;
}

/// Subproblem for S inside the support B: prizes eta (+M on S), edge costs
/// w_e alpha_S (+M when touching B \ S), budget UB - 1, root arc into min(S),
/// and the arc profit (= rho + M|S| on trees meeting B exactly in S) kept >= M|S|.
inline BpcstModel build_fixed_vertices_subproblem(const WeightedGraph& g, const DualValues& d, Weight ub,
                                                  std::span<const Vertex> B, std::span<const Vertex> S,
                                                  std::span<const BranchRule> rules) {
  const int n = g.num_vertices(), m = g.num_edges();
  if (ub < 1) throw InvalidArgument("fixed-vertices subproblem needs UB >= 1");
  const double M = fixed_vertices_penalty(d, ub);
  std::vector<char> in_s(static_cast<std::size_t>(n), 0), out_s(static_cast<std::size_t>(n), 0);
  for (Vertex v : B) out_s[v] = 1;
  double alpha = 0.0;
  for (Vertex v : S) {
    in_s[v] = 1;
    out_s[v] = 0;
    alpha += d.zeta[v];
  }
  std::vector<double> p(d.eta.begin(), d.eta.end()), c(static_cast<std::size_t>(m));
  for (Vertex v = 0; v < n; ++v)
    if (in_s[v]) p[v] += M;
  for (EdgeId e = 0; e < m; ++e) {
    c[e] = static_cast<double>(g.edge(e).w) * alpha;
    if (out_s[g.edge(e).u] || out_s[g.edge(e).v]) c[e] += M;
  }
  BpcstOptions bo;
  bo.root_cost = d.theta;
  bo.profit_floor = M * static_cast<double>(S.size());
  if (!S.empty()) bo.forced_root = *std::min_element(S.begin(), S.end());
  auto model = build_bpcst(g, p, c, ub - 1, bo);
  for (Vertex v = 0; v < n; ++v)
    if (out_s[v]) model.spec.lp.variables[model.y(v)].upper = 0;
  inject_branch_rules(model, rules);
  return model;
}

/// One subproblem per S subset of the zeta support: S forced in, the rest of
/// the support kept out, edge costs w_e * alpha_S, budget UB - 1.
inline PricingResult price_fixed_vertices(const WeightedGraph& g, const DualValues& d, Weight ub,
                                          std::span<const BranchRule> rules, const PricingOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  detail::check_duals(g, d);
  const auto B = zeta_support(d, opt.support_tol);
  if (!fixed_vertices_allowed(B.size(), ub))
    throw GuardViolated("2^|B| = 2^" + std::to_string(B.size()) + " is not below 2*UB = " + std::to_string(2 * ub));
  PricingResult res;
  if (ub < 1) return res;

  detail::ColumnCollector collect(d, opt.min_reduced_cost);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << B.size()); ++mask) {
    std::vector<Vertex> S;
    for (std::size_t i = 0; i < B.size(); ++i)
      if (mask >> i & 1) S.push_back(B[i]);
    auto model = build_fixed_vertices_subproblem(g, d, ub, B, S, rules);
    const double left = opt.time_limit - std::chrono::duration<double>(Clock::now() - start).count();
    if (left <= 0) {
      res.complete = false;
      break;
    }
    ++res.subproblems;
    // objective is rho + M|S| on admissible trees
    const double cutoff = fixed_vertices_penalty(d, ub) * static_cast<double>(S.size()) + opt.min_reduced_cost;
    auto sol = solve_bpcst(g, model, left, cutoff);
    if (sol.status == MipStatus::Feasible || sol.status == MipStatus::TimeLimit) res.complete = false;
    for (const Tree& t : sol.incumbents) collect.offer(t);
  }
  res.columns = collect.take();
  return res;
}

/// gamma(W) = min(min_u (eta_u - W zeta_u), 0).
inline double fixed_weight_shift(const DualValues& d, Weight W) {
  double g = 0.0;
  for (std::size_t u = 0; u < d.eta.size(); ++u) g = std::min(g, d.eta[u] - static_cast<double>(W) * d.zeta[u]);
  return g;
}

/// Prizes p_W(v) = eta_v - W zeta_v - gamma(W).
inline std::vector<double> fixed_weight_prizes(const DualValues& d, Weight W) {
  const double gamma = fixed_weight_shift(d, W);
  std::vector<double> p(d.eta.size());
  for (std::size_t v = 0; v < p.size(); ++v) p[v] = d.eta[v] - static_cast<double>(W) * d.zeta[v] - gamma;
  return p;
}

/// rho'(W, T) = -theta + sum eta - W sum zeta.
inline double approximate_reduced_cost(const Tree& t, const DualValues& d, Weight W) {
  double eta = 0.0, zeta = 0.0;
  for (Vertex v : t.vertices) {
    eta += d.eta[v];
    zeta += d.zeta[v];
  }
  return -d.theta + eta - static_cast<double>(W) * zeta;
}

/// Sweeps W from UB - 1 down to 0 with budget W and the shifted prizes.
/// After a tree with rho > 0 the next W is w(T) - 1, otherwise W - 1.
inline PricingResult price_fixed_weight(const WeightedGraph& g, const DualValues& d, Weight ub,
                                        std::span<const BranchRule> rules, const PricingOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  detail::check_duals(g, d);
  PricingResult res;
  detail::ColumnCollector collect(d, opt.min_reduced_cost);
  for (Weight W = ub - 1; W >= 0;) {
    const double left = opt.time_limit - std::chrono::duration<double>(Clock::now() - start).count();
    if (left <= 0) {
      res.complete = false;
      break;
    }
    const double gamma = fixed_weight_shift(d, W);
    auto p = fixed_weight_prizes(d, W);
    std::vector<double> c(static_cast<std::size_t>(g.num_edges()), -gamma);
    BpcstOptions bo;
    bo.root_cost = d.theta;
    auto model = build_bpcst(g, p, c, W, bo);
    inject_branch_rules(model, rules);
    ++res.subproblems;
    // objective is rho'(W, T) - gamma, and rho >= rho' when w(T) <= W, so a
    // column with rho > min is still seen at W = w(T)
    auto sol = solve_bpcst(g, model, left, opt.min_reduced_cost - gamma);
    if (sol.status == MipStatus::Feasible || sol.status == MipStatus::TimeLimit) res.complete = false;
    bool found = false;
    for (const Tree& t : sol.incumbents) found = collect.offer(t) || found;
    if (opt.jump_on_success && sol.best && reduced_cost(*sol.best, d) > opt.min_reduced_cost) {
      W = std::min(W - 1, sol.best->weight - 1);
    } else {
      --W;
    }
    if (found && opt.early_return) break;
  }
  res.columns = collect.take();
  return res;
}

enum class PricingStrategy { FixedVertices, FixedWeight };

inline const char* to_string(PricingStrategy s) {
  return s == PricingStrategy::FixedVertices ? "fixed-vertices" : "fixed-weight";
}

/// Fixed vertices when 2^|B| < 2 UB, fixed weight otherwise.
inline PricingStrategy choose_strategy(const DualValues& d, Weight ub, double support_tol = 1e-9) {
  return fixed_vertices_allowed(zeta_support(d, support_tol).size(), ub) ? PricingStrategy::FixedVertices
                                                                         : PricingStrategy::FixedWeight;
}

}  // namespace bsf
