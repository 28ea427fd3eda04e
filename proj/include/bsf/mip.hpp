#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "bsf/errors.hpp"
#include "bsf/lp.hpp"

namespace bsf {

/// Lazy constraint generator. Receives a candidate point and whether it is
/// integral on the integer variables; returns rows it violates (non-violated
/// rows are discarded by the engine).
using LazyCallback = std::function<std::vector<Row>(std::span<const double> x, bool integral)>;

struct MipSpec {
  LinearProgram lp;
  std::vector<char> is_integer;  // per variable; missing entries mean continuous
  LazyCallback lazy;
  /// Also call `lazy` on fractional node solutions (bounded rounds per node).
  bool separate_fractional = false;
  int max_fractional_rounds = 10;
  /// Objective takes integral values on every feasible point, so bounds may be
  /// rounded up (minimization) before pruning.
  bool integral_objective = false;
  std::optional<std::vector<double>> warm_start;
  /// Called for every new incumbent with the point and its objective.
  std::function<void(std::span<const double>, double)> on_incumbent;

  void set_integer(int var, bool flag = true) {
    if (static_cast<int>(is_integer.size()) < lp.num_variables()) is_integer.resize(lp.num_variables(), 0);
    is_integer[var] = flag;
  }
  bool integer(int var) const { return var < static_cast<int>(is_integer.size()) && is_integer[var]; }
};

struct MipOptions {
  double time_limit = 60.0;  // seconds
  double relative_gap = 1e-5;
  double integrality_tol = 1e-6;
  long node_limit = -1;
  bool keep_incumbents = false;
  /// Only points strictly better than this objective value are of interest;
  /// nodes whose bound cannot beat it are pruned. Without any such point the
  /// status is Infeasible.
  std::optional<double> cutoff;
};

enum class MipStatus { Optimal, Feasible, Infeasible, TimeLimit };

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "Optimal";
    case MipStatus::Feasible: return "Feasible";
    case MipStatus::Infeasible: return "Infeasible";
    case MipStatus::TimeLimit: return "TimeLimit";
  }
  return "?";
}

struct MipResult {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> solution;
  double objective = 0.0;
  double bound = 0.0;
  long nodes = 0;
  long lazy_rows = 0;
  double elapsed = 0.0;  // seconds
  std::vector<std::vector<double>> incumbents;  // every incumbent, oldest first

  bool has_solution() const { return status == MipStatus::Optimal || status == MipStatus::Feasible; }
  /// |best − bound| / max(1, |best|); infinite without a solution.
  double gap() const {
    if (!has_solution()) return kInf;
    return std::abs(objective - bound) / std::max(1.0, std::abs(objective));
  }
};

namespace detail {

inline bool row_violated(const Row& row, std::span<const double> x, double tol = 1e-6) {
  double act = 0.0;
  for (const Term& t : row.terms) act += t.coef * x[t.var];
  const double scale = 1.0 + std::abs(row.rhs);
  if (row.sense != RowSense::GreaterEqual && act > row.rhs + tol * scale) return true;
  if (row.sense != RowSense::LessEqual && act < row.rhs - tol * scale) return true;
  return false;
}

}  // namespace detail

/// Best-first LP-based branch and bound.
inline MipResult solve_mip(const MipSpec& spec, const MipOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const LinearProgram& base = spec.lp;
  base.validate();
  const int n = base.num_variables();
  for (int j = 0; j < n; ++j)
    if (spec.integer(j) && (!std::isfinite(base.variables[j].lower) || !std::isfinite(base.variables[j].upper)))
      throw InvalidArgument("integer variable '" + base.variables[j].name + "' needs finite bounds");

  const double sg = base.sense == ObjectiveSense::Minimize ? 1.0 : -1.0;  // internal = sg * objective
  LinearProgram current = base;  // base plus every lazy row, for rebuilds
  auto solver = std::make_unique<LpSolver>(current);

  MipResult res;
  double incumbent = kInf;  // internal (minimization) value
  std::vector<double> best_x;

  auto objective_of = [&](std::span<const double> x) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += base.variables[j].objective * x[j];
    return s;
  };
  const double cut = opt.cutoff ? sg * *opt.cutoff : kInf;
  auto accept = [&](std::vector<double> x) {
    const double v = sg * objective_of(x);
    if (v >= incumbent || v >= cut - 1e-9) return;
    incumbent = v;
    best_x = std::move(x);
    if (opt.keep_incumbents) res.incumbents.push_back(best_x);
    if (spec.on_incumbent) spec.on_incumbent(best_x, sg * incumbent);
  };
  auto is_integral = [&](std::span<const double> x) {
    for (int j = 0; j < n; ++j)
      if (spec.integer(j) && std::abs(x[j] - std::round(x[j])) > opt.integrality_tol) return false;
    return true;
  };
  // Prune test on an internal bound.
  auto dominated = [&](double bound) {
    if (bound >= cut - 1e-9) return true;
    if (incumbent == kInf) return false;
    if (spec.integral_objective && std::ceil(bound - 1e-6) >= incumbent - 1e-9) return true;
    return incumbent - bound <= opt.relative_gap * std::max(1.0, std::abs(incumbent));
  };

  if (spec.warm_start) {
    const auto& w = *spec.warm_start;
    bool ok = static_cast<int>(w.size()) == n && is_integral(w);
    for (int j = 0; ok && j < n; ++j)
      ok = w[j] >= base.variables[j].lower - 1e-9 && w[j] <= base.variables[j].upper + 1e-9;
    for (const Row& r : base.rows)
      if (ok && detail::row_violated(r, w)) ok = false;
    if (ok && spec.lazy) {
      for (const Row& r : spec.lazy(w, true))
        if (detail::row_violated(r, w)) ok = false;
    }
    if (ok) accept(w);
  }

  struct Node {
    double bound;
    int depth;
    long id;
    std::vector<std::pair<int, std::pair<double, double>>> changes;  // var -> (lo, hi)
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  long next_id = 0;
  open.push({-kInf, 0, next_id++, {}});

  std::vector<int> touched;
  auto apply = [&](const Node& node) {
    for (int j : touched) solver->set_bounds(j, base.variables[j].lower, base.variables[j].upper);
    touched.clear();
    for (const auto& [j, b] : node.changes) {
      solver->set_bounds(j, b.first, b.second);
      touched.push_back(j);
    }
  };
  auto rebuild = [&](const Node& node) {
    solver = std::make_unique<LpSolver>(current);
    touched.clear();
    apply(node);
  };
  auto add_cut = [&](const Row& r) {
    current.rows.push_back(r);
    solver->add_row(r);
    ++res.lazy_rows;
  };

  bool stopped = false;
  while (!open.empty()) {
    if (elapsed() > opt.time_limit || (opt.node_limit >= 0 && res.nodes >= opt.node_limit)) {
      stopped = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (dominated(node.bound)) continue;
    ++res.nodes;
    apply(node);

    double obj = 0.0;
    std::vector<double> x;
    bool pruned = false, integral = false;
    int fractional_rounds = 0;
    bool retried = false;
    while (true) {
      LpStatus st;
      try {
        st = solver->solve();
      } catch (const NumericalFailure&) {
        if (retried) throw;
        retried = true;
        rebuild(node);
        continue;
      }
      if (st == LpStatus::Infeasible) {
        pruned = true;
        break;
      }
      if (st == LpStatus::Unbounded) throw InvalidArgument("MIP relaxation is unbounded");
      obj = sg * solver->objective_value();
      if (dominated(obj)) {
        pruned = true;
        break;
      }
      x = solver->primal();
      integral = is_integral(x);
      if (spec.lazy && (integral || (spec.separate_fractional && fractional_rounds < spec.max_fractional_rounds))) {
        if (!integral) ++fractional_rounds;
        int added = 0;
        for (const Row& r : spec.lazy(x, integral))
          if (detail::row_violated(r, x)) {
            add_cut(r);
            ++added;
          }
        if (added > 0) continue;
      }
      break;
    }
    if (pruned) continue;
    if (integral) {
      // snap integer variables
      for (int j = 0; j < n; ++j)
        if (spec.integer(j)) x[j] = std::round(x[j]);
      accept(std::move(x));
      continue;
    }
    int branch = -1;
    double best_dist = 1.0;
    for (int j = 0; j < n; ++j) {
      if (!spec.integer(j)) continue;
      const double f = x[j] - std::floor(x[j]);
      if (f <= opt.integrality_tol || f >= 1.0 - opt.integrality_tol) continue;
      const double dist = std::abs(f - 0.5);
      if (dist < best_dist) {
        best_dist = dist;
        branch = j;
      }
    }
    double lo = solver->lower(branch), hi = solver->upper(branch);
    Node down{obj, node.depth + 1, next_id++, node.changes};
    down.changes.push_back({branch, {lo, std::floor(x[branch])}});
    Node up{obj, node.depth + 1, next_id++, node.changes};
    up.changes.push_back({branch, {std::ceil(x[branch]), hi}});
    open.push(std::move(down));
    open.push(std::move(up));
  }

  double bound = incumbent;
  bool unresolved = false;
  if (stopped) {
    while (!open.empty()) {
      if (!dominated(open.top().bound)) {
        bound = std::min(bound, open.top().bound);
        unresolved = true;
      }
      open.pop();
    }
  }
  if (spec.integral_objective && std::isfinite(bound) && bound > -kInf) bound = std::min(incumbent, std::ceil(bound - 1e-6));

  res.elapsed = elapsed();
  if (incumbent < kInf) {
    res.solution = best_x;
    res.objective = sg * incumbent;
    res.status = unresolved ? MipStatus::Feasible : MipStatus::Optimal;
  } else {
    res.status = unresolved ? MipStatus::TimeLimit : MipStatus::Infeasible;
  }
  res.bound = sg * bound;
  return res;
}

/// LP relaxation of `spec`, with the lazy generator applied to fractional
/// points until it returns no violated row (or `max_rounds` is reached).
inline LpSolution solve_relaxation(const MipSpec& spec, int max_rounds = 1000) {
  LpSolver solver(spec.lp);
  for (int round = 0;; ++round) {
    if (solver.solve() != LpStatus::Optimal || !spec.lazy || round >= max_rounds) break;
    const auto x = solver.primal();
    int added = 0;
    for (const Row& r : spec.lazy(x, false))
      if (detail::row_violated(r, x)) {
        solver.add_row(r);
        ++added;
      }
    if (added == 0) break;
  }
  return solver.solution();
}

}  // namespace bsf
