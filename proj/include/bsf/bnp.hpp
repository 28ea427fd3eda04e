#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "bsf/duals.hpp"
#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/heuristics.hpp"
#include "bsf/log.hpp"
#include "bsf/lp.hpp"
#include "bsf/models.hpp"
#include "bsf/pricing.hpp"
#include "bsf/rules.hpp"

namespace bsf {

/// Lower bound of a node shown to hold no improving forest.
inline constexpr Weight kInfeasibleBound = std::numeric_limits<Weight>::max();

struct BnPNode {
  long id = 0;
  std::vector<BranchRule> rules;
  Weight lb = 0;
  std::optional<std::pair<Vertex, Vertex>> branch_pair;
  int depth = 0;
  bool evaluated = false;
};

/// Best known forest. `ub` is its value.
struct Incumbent {
  Weight ub = kInfeasibleBound;
  std::optional<SpanningKForest> forest;

  bool offer(const SpanningKForest& f) {
    if (f.value_minmax >= ub) return false;
    ub = f.value_minmax;
    forest = f;
    return true;
  }
};

/// One line of the run log.
struct CgLogLine {
  long node = 0;
  int iteration = 0;
  double omega = 0.0;
  int support = 0;
  PricingStrategy strategy = PricingStrategy::FixedVertices;
  int columns = 0;
};

struct CgOptions {
  double time_limit = 60.0;
  bool root = false;  // allow the integer-master upper bound update
  int ub_trigger_columns = 50;
  int ub_trigger_iterations = 20;
  double ub_trigger_seconds = 30.0;
  double ub_time_cap = 5.0;
  int max_penalty_doublings = 20;
  PricingOptions pricing;
  std::function<void(const CgLogLine&)> on_iteration;
};

struct CgResult {
  Weight lb = 0;              // ceil(omega* - 1e-6), or kInfeasibleBound
  bool converged = false;     // pricing proved no improving column
  bool integral = false;      // every pair mass integral; forest offered
  std::optional<std::pair<Vertex, Vertex>> branch_pair;
  double lp_value = 0.0;
  int iterations = 0;
  std::vector<Tree> new_columns;
  std::vector<double> x;      // final master point, per RmpModel column
  std::vector<Tree> columns;  // master columns, aligned with x
  DualValues duals;           // of the last master solve
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

inline bool ruled(std::span<const BranchRule> rules, Vertex u, Vertex v) {
  return std::any_of(rules.begin(), rules.end(), [&](const BranchRule& r) { return r.u == u && r.v == v; });
}

}  // namespace detail

/// Sum of x_T over columns holding both u and v, for every u < v; `together`
/// marks pairs sharing at least one column.
struct PairMasses {
  int n = 0;
  std::vector<double> mass;
  std::vector<char> together;

  double at(Vertex u, Vertex v) const { return mass[static_cast<std::size_t>(u) * n + v]; }
};

inline PairMasses pair_masses(int n, std::span<const Tree> columns, std::span<const double> x) {
  PairMasses pm{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0),
                std::vector<char>(static_cast<std::size_t>(n) * n, 0)};
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& vs = columns[c].vertices;
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        const std::size_t idx = static_cast<std::size_t>(vs[i]) * n + vs[j];
        pm.together[idx] = 1;
        pm.mass[idx] += x[c];
      }
  }
  return pm;
}

/// Unruled co-occurring pair whose mass is closest to 1/2 (lexicographic on
/// ties). Absent when every such mass is within 1e-6 of an integer.
inline std::optional<std::pair<Vertex, Vertex>> most_fractional_pair(const PairMasses& pm,
                                                                     std::span<const BranchRule> rules,
                                                                     double tol = 1e-6) {
  std::optional<std::pair<Vertex, Vertex>> best;
  double best_dist = 1.0;
  for (Vertex u = 0; u < pm.n; ++u)
    for (Vertex v = u + 1; v < pm.n; ++v) {
      if (!pm.together[static_cast<std::size_t>(u) * pm.n + v] || detail::ruled(rules, u, v)) continue;
      const double m = pm.at(u, v);
      if (m <= tol || m >= 1.0 - tol) continue;
      const double dist = std::abs(m - 0.5);
      if (dist < best_dist) {
        best_dist = dist;
        best = std::pair{u, v};
      }
    }
  return best;
}

/// Lightest positive column per vertex set, split to k trees. Requires the
/// positive columns to partition V.
inline SpanningKForest forest_from_integral_master(const WeightedGraph& g, int k, std::span<const Tree> columns,
                                                   std::span<const double> x, double tol = 1e-6) {
  std::map<std::vector<Vertex>, const Tree*> lightest;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (x[c] <= tol) continue;
    auto [it, fresh] = lightest.try_emplace(columns[c].vertices, &columns[c]);
    if (!fresh && columns[c].weight < it->second->weight) it->second = &columns[c];
  }
  std::vector<Tree> trees;
  for (const auto& [vs, t] : lightest) trees.push_back(*t);
  if (static_cast<int>(trees.size()) > k) throw InconsistentSolution("integral master uses more than k trees");
  return make_forest(g, split_to_k(g, std::move(trees), k));
}

/// Column generation at one node. Columns respecting the node rules are
/// taken from `pool`; new ones are added to it. `inc` may improve.
inline CgResult column_generation(const WeightedGraph& g, int k, const BnPNode& node, ColumnPool& pool,
                                  Incumbent& inc, const CgOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int n = g.num_vertices();
  CgResult res;

  Weight penalty_base = std::max<Weight>(inc.ub == kInfeasibleBound ? 1 : inc.ub, 1);
  auto rmp = std::make_unique<RmpModel>(build_rmp(g, pool, k, node.rules, penalty_base));
  auto solver = std::make_unique<LpSolver>(rmp->lp);
  std::set<Tree> in_master(rmp->columns.begin(), rmp->columns.end());

  int doublings = 0;
  int cols_since = 0, iters_since = 0;
  auto last_update = start;
  std::vector<double> x;
  double omega = 0.0;
  while (true) {
    if (detail::seconds_since(start) > opt.time_limit) break;
    if (solver->solve() != LpStatus::Optimal) throw NumericalFailure("restricted master did not solve to optimality");
    ++res.iterations;
    ++iters_since;
    omega = solver->objective_value();
    x = solver->primal();
    const auto d = rmp->duals(solver->row_duals());
    res.duals = d;

    std::vector<Tree> fresh;
    int support = 0;
    PricingStrategy strategy = PricingStrategy::FixedWeight;
    bool pricing_complete = true;
    if (inc.ub >= 1) {
      support = static_cast<int>(zeta_support(d, opt.pricing.support_tol).size());
      strategy = choose_strategy(d, inc.ub, opt.pricing.support_tol);
      PricingOptions po = opt.pricing;
      po.time_limit = std::max(0.0, opt.time_limit - detail::seconds_since(start));
      auto pr = strategy == PricingStrategy::FixedVertices ? price_fixed_vertices(g, d, inc.ub, node.rules, po)
                                                           : price_fixed_weight(g, d, inc.ub, node.rules, po);
      pricing_complete = pr.complete;
      for (Tree& t : pr.columns)
        if (in_master.insert(t).second) fresh.push_back(std::move(t));
    }
    if (opt.on_iteration) opt.on_iteration({node.id, res.iterations, omega, support, strategy, static_cast<int>(fresh.size())});
    logger().info("node {} it {} omega {:.6f} |B| {} {} +{}", node.id, res.iterations, omega, support,
                  to_string(strategy), fresh.size());

    for (const Tree& t : fresh) {
      pool.add(t, kInfeasibleBound);
      solver->add_variable(rmp->lp.variables[rmp->add_column(t)], rmp->column_of(t));
      res.new_columns.push_back(t);
    }
    cols_since += static_cast<int>(fresh.size());

    if (opt.root && inc.ub >= 1 && omega <= static_cast<double>(inc.ub - 1) + 1e-9 &&
        (cols_since >= opt.ub_trigger_columns || iters_since >= opt.ub_trigger_iterations ||
         detail::seconds_since(last_update) >= opt.ub_trigger_seconds)) {
      const double cap = std::min(opt.ub_time_cap, std::max(0.0, opt.time_limit - detail::seconds_since(start)));
      auto ir = solve_rmp_integer(*rmp, cap);
      if (ir.has_solution() && inc.offer(forest_from_rmp(g, *rmp, ir.solution)))
        logger().info("node {} integer master improves UB to {}", node.id, inc.ub);
      cols_since = iters_since = 0;
      last_update = Clock::now();
    }

    if (!fresh.empty()) continue;
    if (!pricing_complete) break;
    if (rmp->artificial_active(x) && omega < static_cast<double>(inc.ub) - 1e-6 &&
        doublings < opt.max_penalty_doublings) {
      // penalized value is still below UB: raise the artificial cost until
      // they leave the basis or the bound reaches UB
      ++doublings;
      penalty_base *= 2;
      auto cols = rmp->columns;
      rmp = std::make_unique<RmpModel>(build_rmp(g, cols, k, {}, penalty_base));
      solver = std::make_unique<LpSolver>(rmp->lp);
      continue;
    }
    res.converged = true;
    break;
  }

  res.lp_value = omega;
  res.columns = rmp->columns;
  res.x.assign(rmp->columns.size(), 0.0);
  if (!x.empty())
    for (std::size_t c = 0; c < rmp->columns.size() && rmp->column_vars[c] < static_cast<int>(x.size()); ++c)
      res.x[c] = x[rmp->column_vars[c]];
  if (!res.converged) return res;

  const bool artificial = rmp->artificial_active(x);
  res.lb = static_cast<Weight>(std::ceil(omega - 1e-6));
  if (artificial && res.lb >= inc.ub) res.lb = kInfeasibleBound;
  if (res.lb > inc.ub - 1) return res;
  if (opt.root && !artificial) {
    // one last integer master over the converged column set
    const double cap = std::min(opt.ub_time_cap, std::max(0.0, opt.time_limit - detail::seconds_since(start)));
    auto ir = solve_rmp_integer(*rmp, cap);
    if (ir.has_solution() && inc.offer(forest_from_rmp(g, *rmp, ir.solution)))
      logger().info("node {} integer master improves UB to {}", node.id, inc.ub);
    if (res.lb > inc.ub - 1) return res;
  }
  auto pm = pair_masses(n, res.columns, res.x);
  res.branch_pair = most_fractional_pair(pm, node.rules);
  if (!res.branch_pair) {
    if (artificial) throw NumericalFailure("artificial columns stay in an integral master");
    res.integral = true;
    inc.offer(forest_from_integral_master(g, k, res.columns, res.x));
  }
  return res;
}

enum class BnPStatus { Optimal, TimeLimit };

inline const char* to_string(BnPStatus s) { return s == BnPStatus::Optimal ? "Optimal" : "TimeLimit"; }

struct BnPOptions {
  double time_limit = 60.0;
  std::uint64_t seed = 1;
  double heuristic_share = 0.1;  // of the time limit, at most heuristic_cap seconds
  double heuristic_cap = 10.0;
  SeedOptions seeding;
  CgOptions cg;  // time_limit and root are set per node
};

struct BnPResult {
  Weight value = 0;
  SpanningKForest forest;
  Weight lower_bound = 0;  // ceil of the smallest open LB (= value when optimal)
  Weight root_lb = 0;
  bool root_converged = false;
  double gap = 0.0;
  long nodes = 0;
  long columns = 0;
  long cg_iterations = 0;
  BnPStatus status = BnPStatus::Optimal;
  double elapsed = 0.0;
  std::vector<std::pair<Weight, Weight>> trace;  // (UB, node LB) at each branching
};

/// Ryan-Foster branch-and-price for min-max spanning k-forests.
inline BnPResult branch_and_price(const WeightedGraph& g, int k, const BnPOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int n = g.num_vertices();
  if (k < 1 || k > n) throw InvalidArgument("k must lie in [1, n]");
  if (!is_connected(g)) throw DisconnectedGraph("graph is not connected");
  auto remaining = [&] { return std::max(0.0, opt.time_limit - detail::seconds_since(start)); };

  BnPResult res;
  ColumnPool pool;
  Incumbent inc;
  HeuristicOptions ho;
  ho.time_limit = std::min(opt.heuristic_cap, opt.heuristic_share * opt.time_limit);
  inc.offer(k_approx(g, k));
  auto h = heuristic_bnb(g, k, ho, &pool);
  if (h.forest.k() == k) inc.offer(h.forest);
  for (Vertex v = 0; v < n; ++v) pool.add({{v}, {}, 0}, inc.ub);
  for (const Tree& t : h.forest.trees) pool.add(t, inc.ub);
  SeedOptions so = opt.seeding;
  if (so.time_limit < 0) so.time_limit = std::min(seeding_time_limit(n), remaining());
  if (inc.ub >= 1) seed_columns(g, k, inc.ub - 1, pool, opt.seed, so);
  logger().info("heuristic UB {} pool {}", inc.ub, pool.size());

  Weight global_lb = valid_forest_bound(g, kruskal_mst(g), k);
  auto finish = [&](std::optional<Weight> open_lb) {
    res.value = inc.ub;
    res.forest = *inc.forest;
    res.columns = pool.size();
    res.elapsed = detail::seconds_since(start);
    if (!open_lb) {
      res.status = BnPStatus::Optimal;
      res.lower_bound = res.value;
      res.gap = 0.0;
    } else {
      res.status = BnPStatus::TimeLimit;
      res.lower_bound = std::min(*open_lb, res.value);
      res.gap = res.value > 0 ? static_cast<double>(res.value - res.lower_bound) / static_cast<double>(res.value) : 0.0;
    }
    return res;
  };

  if (inc.ub == 0 || global_lb >= inc.ub) {
    res.nodes = 1;
    res.root_lb = inc.ub;
    res.root_converged = true;
    return finish(std::nullopt);
  }

  long next_id = 0;
  auto evaluate = [&](BnPNode& node) {
    CgOptions co = opt.cg;
    co.time_limit = remaining();
    co.root = node.id == 0;
    auto cg = column_generation(g, k, node, pool, inc, co);
    ++res.nodes;
    res.cg_iterations += cg.iterations;
    if (!cg.converged) return false;
    node.evaluated = true;
    node.lb = std::max(node.lb, cg.lb);
    node.branch_pair = cg.branch_pair;
    return true;
  };

  auto worse = [](const BnPNode& a, const BnPNode& b) {
    if (a.lb != b.lb) return a.lb > b.lb;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  };
  std::priority_queue<BnPNode, std::vector<BnPNode>, decltype(worse)> open(worse);

  BnPNode root;
  root.id = next_id++;
  root.lb = global_lb;
  const bool root_ok = evaluate(root);
  res.root_converged = root_ok;
  res.root_lb = root.lb;
  if (!root_ok || (root.lb <= inc.ub - 1 && root.branch_pair)) open.push(root);

  while (!open.empty()) {
    if (open.top().lb > inc.ub - 1) {
      open.pop();
      continue;
    }
    if (remaining() <= 0) break;
    BnPNode node = open.top();
    open.pop();
    if (!node.evaluated) {
      if (!evaluate(node)) {
        open.push(node);
        break;
      }
      if (node.lb <= inc.ub - 1 && node.branch_pair) open.push(node);
      continue;
    }
    res.trace.emplace_back(inc.ub, node.lb);
    const auto [u, v] = *node.branch_pair;
    for (RuleKind kind : {RuleKind::Together, RuleKind::Apart}) {
      BnPNode child;
      child.id = next_id++;
      child.rules = node.rules;
      child.rules.push_back(make_rule(u, v, kind));
      child.lb = node.lb;
      child.depth = node.depth + 1;
      if (remaining() > 0 && evaluate(child)) {
        if (child.lb <= inc.ub - 1 && child.branch_pair) open.push(child);
      } else {
        open.push(child);
      }
    }
  }

  std::optional<Weight> open_lb;
  while (!open.empty()) {
    if (open.top().lb <= inc.ub - 1) open_lb = open_lb ? std::min(*open_lb, open.top().lb) : open.top().lb;
    open.pop();
  }
  return finish(open_lb);
}

}  // namespace bsf
