#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bsf/errors.hpp"

namespace bsf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  double objective = 0.0;
  std::string name;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// Bounded-variable linear program: min/max c·x s.t. rows, lower ≤ x ≤ upper.
struct LinearProgram {
  ObjectiveSense sense = ObjectiveSense::Minimize;
  std::vector<Variable> variables;
  std::vector<Row> rows;

  int add_variable(double lower, double upper, double objective, std::string name = {}) {
    variables.push_back({lower, upper, objective, std::move(name)});
    return static_cast<int>(variables.size()) - 1;
  }
  int add_row(std::vector<Term> terms, RowSense sense, double rhs, std::string name = {}) {
    rows.push_back({std::move(terms), sense, rhs, std::move(name)});
    return static_cast<int>(rows.size()) - 1;
  }
  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  void validate() const {
    for (const auto& v : variables) {
      if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
        throw InvalidArgument("variable '" + v.name + "' has lower > upper");
      if (v.lower == kInf || v.upper == -kInf) throw InvalidArgument("variable '" + v.name + "' has an empty domain");
    }
    for (const auto& r : rows)
      for (const auto& t : r.terms)
        if (t.var < 0 || t.var >= num_variables())
          throw InvalidArgument("row '" + r.name + "' references a missing variable");
  }

  double row_activity(int i, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : rows[i].terms) s += t.coef * x[t.var];
    return s;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

/// Row duals y and reduced costs d follow d_j = c_j − Σ_i y_i a_ij in the
/// program's own objective sense.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> primal;
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  long iterations = 0;
};

/// Revised bounded-variable simplex over an explicit dense basis inverse.
///
/// Every row i gets a slack s_i with a·x + s_i = b_i, so the slack basis is
/// always available. A primal feasible basis is reoptimized with the primal
/// simplex; a dual feasible one (after bound changes or new rows) with the
/// dual simplex; otherwise a composite phase 1 minimizing the sum of
/// infeasibilities runs first. Columns and rows can be appended between
/// solves and the current basis is kept.
class LpSolver {
 public:
  explicit LpSolver(const LinearProgram& lp) : maximize_(lp.sense == ObjectiveSense::Maximize) {
    lp.validate();
    for (const auto& v : lp.variables) {
      structural_.push_back(static_cast<int>(cols_.size()));
      push_column(v.lower, v.upper, maximize_ ? -v.objective : v.objective, {});
    }
    for (const auto& r : lp.rows) add_row(r);
  }

  int num_variables() const { return static_cast<int>(structural_.size()); }
  int num_rows() const { return m_; }
  long iterations() const { return iterations_; }

  /// Appends a variable; `column` lists (row, coefficient) pairs as Terms
  /// whose `var` field holds the row index.
  int add_variable(const Variable& v, std::span<const Term> column) {
    if (v.lower > v.upper) throw InvalidArgument("variable has lower > upper");
    const int c = static_cast<int>(cols_.size());
    structural_.push_back(c);
    push_column(v.lower, v.upper, maximize_ ? -v.objective : v.objective, {});
    for (const Term& t : column) {
      if (t.var < 0 || t.var >= m_) throw InvalidArgument("column references a missing row");
      if (t.coef != 0.0) {
        cols_[c].idx.push_back(t.var);
        cols_[c].val.push_back(t.coef);
        rows_[t.var].push_back({c, t.coef});
      }
    }
    if (x_[c] != 0.0) shift_basics(c, x_[c]);
    return num_variables() - 1;
  }

  /// Appends a row; its slack enters the basis so the factorization stays
  /// valid and dual feasibility is preserved.
  int add_row(const Row& row) {
    const int r = m_;
    const int s = static_cast<int>(cols_.size());
    double lo = 0.0, hi = 0.0;
    if (row.sense == RowSense::LessEqual) hi = kInf;
    if (row.sense == RowSense::GreaterEqual) lo = -kInf;
    push_column(lo, hi, 0.0, {r});
    slack_.push_back(s);
    b_.push_back(row.rhs);
    rows_.emplace_back();
    for (const Term& t : row.terms) {
      if (t.var < 0 || t.var >= num_variables()) throw InvalidArgument("row references a missing variable");
      if (t.coef == 0.0) continue;
      int c = structural_[t.var];
      cols_[c].idx.push_back(r);
      cols_[c].val.push_back(t.coef);
      rows_[r].push_back({c, t.coef});
    }
    m_ += 1;
    head_.push_back(s);
    pos_[s] = r;
    status_[s] = Status::Basic;
    refactor();
    return r;
  }

  void set_bounds(int var, double lower, double upper) {
    if (lower > upper) throw InvalidArgument("set_bounds: lower > upper");
    const int c = structural_[var];
    lb_[c] = lower;
    ub_[c] = upper;
    if (status_[c] == Status::Basic) return;
    double target = nonbasic_value(c, status_[c]);
    if (target != x_[c]) {
      shift_basics(c, target - x_[c]);
      x_[c] = target;
    }
  }

  double lower(int var) const { return lb_[structural_[var]]; }
  double upper(int var) const { return ub_[structural_[var]]; }
  double value(int var) const { return x_[structural_[var]]; }

  LpStatus solve() {
    solve_iterations_ = 0;
    last_status_ = run();
    return last_status_;
  }

  LpStatus status() const { return last_status_; }

  /// Objective in the program's own sense.
  double objective_value() const {
    double s = 0.0;
    for (int c : structural_) s += cost_[c] * x_[c];
    return maximize_ ? -s : s;
  }

  std::vector<double> primal() const {
    std::vector<double> x;
    x.reserve(structural_.size());
    for (int c : structural_) x.push_back(x_[c]);
    return x;
  }

  std::vector<double> row_duals() const {
    auto y = btran_costs();
    if (maximize_)
      for (double& v : y) v = -v;
    return y;
  }

  std::vector<double> reduced_costs() const {
    auto y = btran_costs();
    std::vector<double> d;
    d.reserve(structural_.size());
    for (int c : structural_) {
      double dj = cost_[c] - dot_column(y, c);
      d.push_back(maximize_ ? -dj : dj);
    }
    return d;
  }

  LpSolution solution() const {
    LpSolution s;
    s.status = last_status_;
    s.iterations = iterations_;
    if (last_status_ == LpStatus::Optimal) {
      s.primal = primal();
      s.row_duals = row_duals();
      s.reduced_costs = reduced_costs();
      s.objective = objective_value();
    }
    return s;
  }

 private:
  enum class Status : unsigned char { Basic, AtLower, AtUpper, AtZero };

  struct Column {
    std::vector<int> idx;
    std::vector<double> val;
  };

  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;
  static constexpr int kRefactorPeriod = 100;
  static constexpr long kMaxIterations = 500000;

  bool maximize_;
  int m_ = 0;
  std::vector<Column> cols_;
  std::vector<std::vector<std::pair<int, double>>> rows_;  // row -> (column, coef)
  std::vector<double> lb_, ub_, cost_, x_, b_;
  std::vector<Status> status_;
  std::vector<int> pos_;   // column -> basis position, -1 when nonbasic
  std::vector<int> head_;  // basis position -> column
  std::vector<int> structural_, slack_;
  // Basis inverse in product form: a base factorization taken at the last
  // refactor plus one eta column per pivot since.
  struct Eta {
    int r;
    double pivot;
    std::vector<std::pair<int, double>> others;  // (position, alpha) for positions != r
  };
  std::vector<int> base_open_rows_;  // rows whose slack is nonbasic (B2 rows)
  std::vector<int> base_spos_;       // basis positions of structurals (B2 columns)
  std::vector<int> base_row_pos_;    // row -> position of its basic slack, or -1
  std::vector<int> base_col_j_;      // column -> index into base_spos_, or -1
  std::vector<double> inv2_;         // B2^{-1}, p x p row-major
  std::vector<Eta> etas_;
  std::vector<int> head_at_refactor_;
  long iterations_ = 0;        // lifetime total
  long solve_iterations_ = 0;  // current solve() call, bounded by kMaxIterations
  int since_refactor_ = 0;
  std::mt19937_64 perturb_rng_{1};
  LpStatus last_status_ = LpStatus::Infeasible;

  double ptol(double bound) const { return kPrimalTol * (1.0 + std::abs(bound)); }

  static double nonbasic_value_for(double lo, double hi, Status st) {
    if (st == Status::AtUpper && hi < kInf) return hi;
    if (lo > -kInf) return lo;
    if (hi < kInf) return hi;
    return 0.0;
  }

  double nonbasic_value(int c, Status& st) const {
    if (st == Status::AtUpper && ub_[c] < kInf) return ub_[c];
    if (lb_[c] > -kInf) {
      st = Status::AtLower;
      return lb_[c];
    }
    if (ub_[c] < kInf) {
      st = Status::AtUpper;
      return ub_[c];
    }
    st = Status::AtZero;
    return 0.0;
  }

  void push_column(double lo, double hi, double cost, std::vector<int> slack_row) {
    Column col;
    for (int r : slack_row) {
      col.idx.push_back(r);
      col.val.push_back(1.0);
    }
    cols_.push_back(std::move(col));
    lb_.push_back(lo);
    ub_.push_back(hi);
    cost_.push_back(cost);
    Status st = Status::AtLower;
    x_.push_back(nonbasic_value_for(lo, hi, st));
    if (lo == -kInf && hi < kInf) st = Status::AtUpper;
    if (lo == -kInf && hi == kInf) st = Status::AtZero;
    status_.push_back(st);
    pos_.push_back(-1);
  }

  // x_B -= delta * B^{-1} a_c
  void shift_basics(int c, double delta) {
    if (m_ == 0) return;
    auto alpha = ftran(c);
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= delta * alpha[i];
  }

  // Solves B v = a for a dense right-hand side over rows.
  std::vector<double> ftran_dense(const std::vector<double>& a) const {
    std::vector<double> v(static_cast<std::size_t>(m_), 0.0);
    const std::size_t p = base_spos_.size();
    for (std::size_t j = 0; j < p; ++j) {
      const double* row = &inv2_[j * p];
      double t = 0.0;
      for (std::size_t q = 0; q < p; ++q) t += row[q] * a[base_open_rows_[q]];
      v[base_spos_[j]] = t;
    }
    for (int r = 0; r < m_; ++r) {
      const int i = base_row_pos_[r];
      if (i < 0) continue;
      double t = a[r];
      for (const auto& [c, val] : rows_[r]) {
        const int j = c < static_cast<int>(base_col_j_.size()) ? base_col_j_[c] : -1;
        if (j >= 0) t -= val * v[base_spos_[j]];
      }
      v[i] = t;
    }
    for (const Eta& e : etas_) {
      const double t = v[e.r] / e.pivot;
      v[e.r] = t;
      if (t == 0.0) continue;
      for (const auto& [i, a_i] : e.others) v[i] -= a_i * t;
    }
    return v;
  }

  std::vector<double> ftran(int c) const {
    std::vector<double> a(static_cast<std::size_t>(m_), 0.0);
    const Column& col = cols_[c];
    for (std::size_t k = 0; k < col.idx.size(); ++k) a[col.idx[k]] += col.val[k];
    return ftran_dense(a);
  }

  // Solves y^T B = cb^T, cb indexed by basis position.
  std::vector<double> btran(std::vector<double> cb) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double t = cb[it->r];
      for (const auto& [i, a_i] : it->others) t -= cb[i] * a_i;
      cb[it->r] = t / it->pivot;
    }
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int r = 0; r < m_; ++r)
      if (base_row_pos_[r] >= 0) y[r] = cb[base_row_pos_[r]];
    const std::size_t p = base_spos_.size();
    if (p == 0) return y;
    std::vector<double> rhs(p);
    for (std::size_t j = 0; j < p; ++j) {
      const int i = base_spos_[j];
      const Column& col = cols_[head_at_refactor_[i]];
      double t = cb[i];
      for (std::size_t k = 0; k < col.idx.size(); ++k)
        if (base_row_pos_[col.idx[k]] >= 0) t -= y[col.idx[k]] * col.val[k];
      rhs[j] = t;
    }
    for (std::size_t j = 0; j < p; ++j) {
      if (rhs[j] == 0.0) continue;
      const double* row = &inv2_[j * p];
      for (std::size_t q = 0; q < p; ++q) y[base_open_rows_[q]] += rhs[j] * row[q];
    }
    return y;
  }

  std::vector<double> btran_costs() const {
    std::vector<double> cb(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
    return btran(std::move(cb));
  }

  double dot_column(const std::vector<double>& y, int c) const {
    const Column& col = cols_[c];
    double s = 0.0;
    for (std::size_t k = 0; k < col.idx.size(); ++k) s += y[col.idx[k]] * col.val[k];
    return s;
  }

  void pivot(int r, const std::vector<double>& alpha) {
    Eta e{r, alpha[r], {}};
    for (int i = 0; i < m_; ++i)
      if (i != r && std::abs(alpha[i]) > 1e-14) e.others.push_back({i, alpha[i]});
    etas_.push_back(std::move(e));
    ++since_refactor_;
  }

  void reset_to_slack_basis() {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      pos_[c] = -1;
      Status st = status_[c] == Status::Basic ? Status::AtLower : status_[c];
      x_[c] = nonbasic_value(static_cast<int>(c), st);
      status_[c] = st;
    }
    for (int i = 0; i < m_; ++i) {
      head_[i] = slack_[i];
      pos_[slack_[i]] = i;
      status_[slack_[i]] = Status::Basic;
    }
    refactor();
  }

  // Basis inverse from its structural block. Ordering rows so that basic
  // slacks come first gives B = [[I, B1], [0, B2]] with B2 square over the
  // rows whose slack is nonbasic, so only B2 (at most #structurals wide)
  // needs Gauss-Jordan elimination. Falls back to the slack basis when B2 is
  // numerically singular.
  void refactor() {
    const std::size_t m = static_cast<std::size_t>(m_);
    std::vector<int> slack_row_of(cols_.size(), -1);
    for (int r = 0; r < m_; ++r) slack_row_of[slack_[r]] = r;
    std::vector<char> row_covered(m, 0);
    std::vector<int> spos;  // basis positions holding structurals
    for (int i = 0; i < m_; ++i) {
      const int r = slack_row_of[head_[i]];
      if (r >= 0)
        row_covered[r] = 1;
      else
        spos.push_back(i);
    }
    std::vector<int> open_rows;  // rows of B2
    std::vector<int> local(m, -1);
    for (int r = 0; r < m_; ++r)
      if (!row_covered[r]) {
        local[r] = static_cast<int>(open_rows.size());
        open_rows.push_back(r);
      }
    const std::size_t p = spos.size();
    if (open_rows.size() != p) {
      reset_to_slack_basis();
      return;
    }
    std::vector<double> a(p * p, 0.0), inv(p * p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const Column& col = cols_[head_[spos[j]]];
      for (std::size_t t = 0; t < col.idx.size(); ++t)
        if (local[col.idx[t]] >= 0) a[static_cast<std::size_t>(local[col.idx[t]]) * p + j] += col.val[t];
    }
    for (std::size_t i = 0; i < p; ++i) inv[i * p + i] = 1.0;
    for (std::size_t col = 0; col < p; ++col) {
      std::size_t best = col;
      for (std::size_t i = col + 1; i < p; ++i)
        if (std::abs(a[i * p + col]) > std::abs(a[best * p + col])) best = i;
      if (std::abs(a[best * p + col]) < 1e-11) {
        reset_to_slack_basis();
        return;
      }
      if (best != col) {
        std::swap_ranges(a.begin() + best * p, a.begin() + best * p + p, a.begin() + col * p);
        std::swap_ranges(inv.begin() + best * p, inv.begin() + best * p + p, inv.begin() + col * p);
      }
      const double piv = a[col * p + col];
      for (std::size_t j = 0; j < p; ++j) {
        a[col * p + j] /= piv;
        inv[col * p + j] /= piv;
      }
      for (std::size_t i = 0; i < p; ++i) {
        if (i == col) continue;
        const double f = a[i * p + col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < p; ++j) {
          a[i * p + j] -= f * a[col * p + j];
          inv[i * p + j] -= f * inv[col * p + j];
        }
      }
    }
    base_open_rows_ = std::move(open_rows);
    base_spos_ = std::move(spos);
    base_row_pos_.assign(m, -1);
    for (int i = 0; i < m_; ++i)
      if (slack_row_of[head_[i]] >= 0) base_row_pos_[slack_row_of[head_[i]]] = i;
    base_col_j_.assign(cols_.size(), -1);
    for (std::size_t j = 0; j < p; ++j) base_col_j_[head_[base_spos_[j]]] = static_cast<int>(j);
    inv2_ = std::move(inv);
    head_at_refactor_ = head_;
    etas_.clear();
    since_refactor_ = 0;
    recompute_basics();
  }

  void recompute_basics() {
    std::vector<double> rhs(b_);
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (status_[c] == Status::Basic || x_[c] == 0.0) continue;
      const Column& col = cols_[c];
      for (std::size_t k = 0; k < col.idx.size(); ++k) rhs[col.idx[k]] -= col.val[k] * x_[c];
    }
    const auto v = ftran_dense(rhs);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = v[i];
  }

  double infeasibility(int c) const {
    if (x_[c] < lb_[c] - ptol(lb_[c])) return lb_[c] - x_[c];
    if (x_[c] > ub_[c] + ptol(ub_[c])) return x_[c] - ub_[c];
    return 0.0;
  }

  bool primal_feasible() const {
    for (int i = 0; i < m_; ++i)
      if (infeasibility(head_[i]) > 0.0) return false;
    return true;
  }

  bool eligible_nonbasic(std::size_t c) const { return status_[c] != Status::Basic && lb_[c] != ub_[c]; }

  bool dual_feasible(const std::vector<double>& y) const {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (!eligible_nonbasic(c)) continue;
      const double d = cost_[c] - dot_column(y, static_cast<int>(c));
      const double tol = kDualTol * (1.0 + std::abs(cost_[c]));
      if (status_[c] == Status::AtLower && d < -tol) return false;
      if (status_[c] == Status::AtUpper && d > tol) return false;
      if (status_[c] == Status::AtZero && std::abs(d) > tol) return false;
    }
    return true;
  }

  // Moves boxed nonbasics to the bound their reduced cost prefers, so a
  // basis disturbed by bound changes becomes dual feasible when possible.
  void flip_to_dual_feasible() {
    const auto y = btran_costs();
    bool moved = false;
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (!eligible_nonbasic(c) || lb_[c] == -kInf || ub_[c] == kInf) continue;
      const double d = cost_[c] - dot_column(y, static_cast<int>(c));
      const double tol = kDualTol * (1.0 + std::abs(cost_[c]));
      Status want = status_[c];
      if (d < -tol) want = Status::AtUpper;
      else if (d > tol) want = Status::AtLower;
      if (want == status_[c]) continue;
      status_[c] = want;
      x_[c] = want == Status::AtUpper ? ub_[c] : lb_[c];
      moved = true;
    }
    if (moved) recompute_basics();
  }

  LpStatus run() {
    if (since_refactor_ > 0) refactor();
    if (!primal_feasible()) flip_to_dual_feasible();
    for (int attempt = 0; attempt < 6; ++attempt) {
      LpStatus st;
      if (primal_feasible()) {
        st = primal_simplex();
      } else if (dual_feasible(btran_costs())) {
        st = dual_simplex();
        if (st == LpStatus::Infeasible) {
          refactor();
          if (!primal_feasible() && !dual_feasible(btran_costs())) continue;
          if (primal_feasible()) continue;
          return LpStatus::Infeasible;
        }
      } else {
        st = primal_simplex();
      }
      if (st != LpStatus::Optimal) {
        if (st == LpStatus::Infeasible || st == LpStatus::Unbounded) {
          refactor();
          // Re-check on a fresh factorization before trusting the verdict.
          if (st == LpStatus::Infeasible && primal_feasible()) continue;
          return st;
        }
      }
      refactor();
      if (primal_feasible() && dual_feasible(btran_costs())) return LpStatus::Optimal;
    }
    throw NumericalFailure("simplex did not reach a verified optimum");
  }

  // Composite primal simplex: phase 1 on the sum of infeasibilities while
  // any basic variable violates a bound, then phase 2 on the true costs.
  LpStatus primal_simplex() {
    int degenerate_streak = 0;
    while (true) {
      ++iterations_;
      if (++solve_iterations_ > kMaxIterations) throw NumericalFailure("simplex iteration limit");
      if (since_refactor_ >= kRefactorPeriod) refactor();

      std::vector<double> cb(static_cast<std::size_t>(m_), 0.0);
      bool phase1 = false;
      for (int i = 0; i < m_; ++i) {
        const int c = head_[i];
        if (x_[c] < lb_[c] - ptol(lb_[c])) {
          cb[i] = -1.0;
          phase1 = true;
        } else if (x_[c] > ub_[c] + ptol(ub_[c])) {
          cb[i] = 1.0;
          phase1 = true;
        }
      }
      if (!phase1)
        for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
      const auto y = btran(cb);

      const bool bland = degenerate_streak > 50;
      int enter = -1;
      double enter_d = 0.0, best_score = 0.0;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (!eligible_nonbasic(c)) continue;
        const double cj = phase1 ? 0.0 : cost_[c];
        const double d = cj - dot_column(y, static_cast<int>(c));
        const double tol = kDualTol * (1.0 + std::abs(cj));
        bool ok = false;
        if (status_[c] == Status::AtLower) ok = d < -tol;
        else if (status_[c] == Status::AtUpper) ok = d > tol;
        else ok = std::abs(d) > tol;
        if (!ok) continue;
        if (bland) {
          enter = static_cast<int>(c);
          enter_d = d;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          enter = static_cast<int>(c);
          enter_d = d;
        }
      }
      if (enter < 0) {
        if (phase1) return LpStatus::Infeasible;
        return LpStatus::Optimal;
      }
      const double dir = enter_d < 0 ? 1.0 : -1.0;
      const auto alpha = ftran(enter);

      // Harris two-pass ratio test; phase 1 stops infeasible basics at the
      // bound where they become feasible.
      auto target_of = [&](int i, double rate, double& target) {
        const int c = head_[i];
        if (rate < 0) {
          if (x_[c] > ub_[c] + ptol(ub_[c])) target = ub_[c];
          else if (x_[c] < lb_[c] - ptol(lb_[c])) return false;
          else if (lb_[c] > -kInf) target = lb_[c];
          else return false;
        } else {
          if (x_[c] < lb_[c] - ptol(lb_[c])) target = lb_[c];
          else if (x_[c] > ub_[c] + ptol(ub_[c])) return false;
          else if (ub_[c] < kInf) target = ub_[c];
          else return false;
        }
        return true;
      };
      double relaxed_min = kInf;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= kPivotTol) continue;
        const double rate = -dir * alpha[i];
        double target;
        if (!target_of(i, rate, target)) continue;
        const double slack = rate < 0 ? (x_[head_[i]] - target + ptol(target)) / -rate
                                      : (target + ptol(target) - x_[head_[i]]) / rate;
        relaxed_min = std::min(relaxed_min, slack);
      }
      int leave = -1;
      double step = kInf, leave_target = 0.0, best_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= kPivotTol) continue;
        const double rate = -dir * alpha[i];
        double target;
        if (!target_of(i, rate, target)) continue;
        double t = (target - x_[head_[i]]) / rate;
        if (t > relaxed_min) continue;
        t = std::max(t, 0.0);
        bool take = false;
        if (bland) take = leave < 0 || head_[i] < head_[leave];
        else take = std::abs(alpha[i]) > best_alpha;
        if (take) {
          leave = i;
          step = t;
          leave_target = target;
          best_alpha = std::abs(alpha[i]);
        }
      }
      const double range = ub_[enter] - lb_[enter];
      if (range < kInf && range <= step) {
        // Bound flip of the entering variable.
        const double delta = dir * range;
        x_[enter] += delta;
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= delta * alpha[i];
        status_[enter] = dir > 0 ? Status::AtUpper : Status::AtLower;
        x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
        degenerate_streak = 0;
        continue;
      }
      if (leave < 0) {
        if (phase1) throw NumericalFailure("phase 1 ray without breakpoint");
        return LpStatus::Unbounded;
      }
      const double delta = dir * step;
      x_[enter] += delta;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= delta * alpha[i];
      const int out = head_[leave];
      x_[out] = leave_target;
      status_[out] = (leave_target == lb_[out]) ? Status::AtLower : Status::AtUpper;
      pos_[out] = -1;
      head_[leave] = enter;
      pos_[enter] = leave;
      status_[enter] = Status::Basic;
      pivot(leave, alpha);
      degenerate_streak = step <= 1e-12 ? degenerate_streak + 1 : 0;
    }
  }

  // Dual simplex on perturbed costs once it stalls; the true costs are put
  // back on every exit and run() re-verifies (primal cleanup if needed).
  LpStatus dual_simplex() {
    std::vector<double> saved;
    struct Restore {
      std::vector<double>& cost;
      std::vector<double>& saved;
      ~Restore() {
        if (!saved.empty()) cost.swap(saved);
      }
    } restore{cost_, saved};
    return dual_simplex_loop(saved);
  }

  void perturb_costs(std::vector<double>& saved) {
    saved = cost_;
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (status_[c] == Status::Basic || lb_[c] == ub_[c]) continue;
      const double delta = 1e-7 * (1.0 + std::abs(cost_[c])) * u(perturb_rng_);
      if (status_[c] == Status::AtLower && lb_[c] > -kInf) cost_[c] += delta;
      else if (status_[c] == Status::AtUpper && ub_[c] < kInf) cost_[c] -= delta;
    }
  }

  LpStatus dual_simplex_loop(std::vector<double>& saved) {
    int degenerate_streak = 0;
    while (true) {
      if (degenerate_streak > 50 && saved.empty()) {
        perturb_costs(saved);
        degenerate_streak = 0;
      }
      ++iterations_;
      if (++solve_iterations_ > kMaxIterations) throw NumericalFailure("dual simplex iteration limit");
      if (since_refactor_ >= kRefactorPeriod) refactor();

      // Bland mode: smallest-index infeasible basic leaves, smallest-index
      // column among exact ratio ties enters.
      const bool bland = degenerate_streak > 50;
      int r = -1;
      double worst = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double inf = infeasibility(head_[i]);
        if (inf <= 0.0) continue;
        if (bland ? (r < 0 || head_[i] < head_[r]) : inf > worst) {
          worst = inf;
          r = i;
        }
      }
      if (r < 0) return LpStatus::Optimal;
      const int out = head_[r];
      const bool increase = x_[out] < lb_[out];
      const double target = increase ? lb_[out] : ub_[out];

      const auto y = btran_costs();
      std::vector<double> unit(static_cast<std::size_t>(m_), 0.0);
      unit[r] = 1.0;
      const auto rho = btran(std::move(unit));
      struct Cand {
        int c;
        double ratio;
        double alpha;
      };
      std::vector<Cand> cands;
      double relaxed_min = kInf;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (!eligible_nonbasic(c)) continue;
        const double a = dot_column(rho, static_cast<int>(c));
        if (std::abs(a) <= kPivotTol) continue;
        // x_out changes by -a * dx_c.
        const double want = increase ? -a : a;  // sign of dx_c that helps
        bool ok = false;
        if (status_[c] == Status::AtLower) ok = want > 0;
        else if (status_[c] == Status::AtUpper) ok = want < 0;
        else ok = true;
        if (!ok) continue;
        const double d = cost_[c] - dot_column(y, static_cast<int>(c));
        const double tol = kDualTol * (1.0 + std::abs(cost_[c]));
        const double ratio = std::abs(d) / std::abs(a);
        relaxed_min = std::min(relaxed_min, (std::abs(d) + tol) / std::abs(a));
        cands.push_back({static_cast<int>(c), ratio, a});
      }
      if (cands.empty()) return LpStatus::Infeasible;
      if (bland) {
        relaxed_min = kInf;
        for (const Cand& cd : cands) relaxed_min = std::min(relaxed_min, cd.ratio);
        relaxed_min += 1e-12;
      }
      int enter = -1;
      double best_alpha = 0.0, enter_ratio = 0.0;
      for (const Cand& cd : cands) {
        if (cd.ratio > relaxed_min) continue;
        bool take = bland ? (enter < 0 || cd.c < enter) : std::abs(cd.alpha) > best_alpha;
        if (take) {
          enter = cd.c;
          best_alpha = std::abs(cd.alpha);
          enter_ratio = cd.ratio;
        }
      }
      const auto alpha = ftran(enter);
      if (std::abs(alpha[r]) <= kPivotTol) {
        refactor();
        continue;
      }
      const double delta = (x_[out] - target) / alpha[r];
      x_[enter] += delta;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= delta * alpha[i];
      x_[out] = target;
      status_[out] = increase ? Status::AtLower : Status::AtUpper;
      pos_[out] = -1;
      head_[r] = enter;
      pos_[enter] = r;
      status_[enter] = Status::Basic;
      pivot(r, alpha);
      degenerate_streak = enter_ratio <= 1e-12 ? degenerate_streak + 1 : 0;
    }
  }
};

/// One-shot solve.
inline LpSolution solve_lp(const LinearProgram& lp) {
  LpSolver solver(lp);
  solver.solve();
  return solver.solution();
}

}  // namespace bsf
