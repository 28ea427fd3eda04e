#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bsf/instances.hpp"
#include "bsf/models.hpp"
#include "bsf/oracle.hpp"
#include "bsf/pricing.hpp"
#include "support/naive.hpp"

using namespace bsf;

namespace {

WeightedGraph k3() { return WeightedGraph(3, {{0, 1, 1}, {1, 2, 2}, {0, 2, 3}}); }

// Best sum p - sum c - root_cost over every tree with weight <= budget.
std::optional<double> brute_bpcst(const WeightedGraph& g, std::span<const double> p, std::span<const double> c,
                                  Weight budget, double root_cost) {
  std::optional<double> best;
  for (const Tree& t : enumerate_all_trees(g)) {
    if (t.weight > budget) continue;
    double v = -root_cost;
    for (Vertex u : t.vertices) v += p[u];
    for (EdgeId e : t.edges) v -= c[e];
    if (!best || v > *best) best = v;
  }
  return best;
}

DualValues random_duals(SplitMix64& rng, int n, int support) {
  DualValues d;
  d.theta = static_cast<double>(rng.uniform_int(0, 12)) / 4.0;
  for (int v = 0; v < n; ++v) d.eta.push_back(static_cast<double>(rng.uniform_int(-8, 20)) / 4.0);
  d.zeta.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < support; ++i) d.zeta[rng.below(static_cast<std::uint64_t>(n))] = static_cast<double>(rng.uniform_int(1, 8)) / 40.0;
  return d;
}

double oracle_rho(const WeightedGraph& g, const DualValues& d, Weight ub) {
  return pricing_oracle(g, d, ub - 1).rho;
}

void check_columns(const WeightedGraph& g, const PricingResult& r, const DualValues& d, Weight ub,
                   std::span<const BranchRule> rules) {
  std::set<Tree> distinct(r.columns.begin(), r.columns.end());
  EXPECT_EQ(distinct.size(), r.columns.size());
  for (const Tree& t : r.columns) {
    EXPECT_TRUE(is_valid_tree(g, t));
    EXPECT_LE(t.weight, ub - 1);
    EXPECT_TRUE(respects(t, rules));
    EXPECT_GT(reduced_cost(t, d), 1e-6);
  }
}

}  // namespace

TEST(ReducedCost, Formula) {
  WeightedGraph g(2, {{0, 1, 4}});
  DualValues d{1.0, {2, 3}, {0.25, 0.25}};
  EXPECT_DOUBLE_EQ(reduced_cost(make_tree(g, {0, 1}, {0}), d), 2.0);
  DualValues flat{1.0, {2, 3}, {0, 0}};
  WeightedGraph h(2, {{0, 1, 40}});
  EXPECT_DOUBLE_EQ(reduced_cost(make_tree(g, {0, 1}, {0}), flat), reduced_cost(make_tree(h, {0, 1}, {0}), flat));
}

TEST(ReducedCost, MatchesOracleReport) {
  SplitMix64 rng(17);
  for (int it = 0; it < 100; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.5, 1, 9);
    auto d = random_duals(rng, g.num_vertices(), 3);
    auto r = pricing_oracle(g, d, 1000);
    EXPECT_NEAR(reduced_cost(r.tree, d), r.rho, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// BPCST

TEST(Bpcst, StarCollectsPositiveLeaves) {
  auto star = star_graph({1, 1, 1});
  std::vector<double> p{0, 5, -1, 2}, c(3, 0.0);
  auto model = build_bpcst(star, p, c, 1000);
  auto s = solve_bpcst(star, model);
  ASSERT_EQ(s.status, MipStatus::Optimal);
  EXPECT_NEAR(s.objective, 7.0, 1e-9);
  EXPECT_EQ(s.best->vertices, (std::vector<Vertex>{0, 1, 3}));
}

TEST(Bpcst, ZeroBudgetGivesBestSingleVertex) {
  auto star = star_graph({1, 1, 1});
  std::vector<double> p{0, 5, -1, 2}, c(3, 0.0);
  auto s = solve_bpcst(star, build_bpcst(star, p, c, 0));
  EXPECT_NEAR(s.objective, 5.0, 1e-9);
  EXPECT_EQ(s.best->vertices, (std::vector<Vertex>{1}));
}

TEST(Bpcst, NegativePrizes) {
  auto star = star_graph({1, 1, 1});
  std::vector<double> p{-3, -1, -4, -2}, c(3, 0.0);
  EXPECT_EQ(solve_bpcst(star, build_bpcst(star, p, c, 10)).status, MipStatus::Infeasible);
  BpcstOptions open;
  open.profit_floor.reset();
  auto s = solve_bpcst(star, build_bpcst(star, p, c, 10, open));
  EXPECT_NEAR(s.objective, -1.0, 1e-9);
  EXPECT_EQ(s.best->vertices, (std::vector<Vertex>{1}));
}

TEST(Bpcst, MatchesEnumeration) {
  SplitMix64 rng(23);
  BpcstOptions open;
  open.profit_floor.reset();
  for (int it = 0; it < 60; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.5, 1, 9);
    std::vector<double> p, c;
    for (int v = 0; v < g.num_vertices(); ++v) p.push_back(static_cast<double>(rng.uniform_int(-5, 10)));
    for (int e = 0; e < g.num_edges(); ++e) c.push_back(static_cast<double>(rng.uniform_int(0, 6)) / 2.0);
    const Weight budget = rng.uniform_int(0, 20);
    open.root_cost = static_cast<double>(rng.uniform_int(0, 3));
    auto s = solve_bpcst(g, build_bpcst(g, p, c, budget, open));
    ASSERT_EQ(s.status, MipStatus::Optimal) << it;
    EXPECT_NEAR(s.objective, *brute_bpcst(g, p, c, budget, open.root_cost), 1e-7) << it;
    EXPECT_LE(s.best->weight, budget);
    for (const Tree& t : s.incumbents) EXPECT_TRUE(is_valid_tree(g, t));
  }
}

TEST(Bpcst, ForcedRoot) {
  auto star = star_graph({1, 1, 1});
  std::vector<double> p{0, 5, -1, 2}, c(3, 0.0);
  BpcstOptions o;
  o.forced_root = 2;
  auto s = solve_bpcst(star, build_bpcst(star, p, c, 1000, o));
  EXPECT_NEAR(s.objective, 6.0, 1e-9);
  EXPECT_TRUE(s.best->contains(2));
}

TEST(Bpcst, CycleNeedsConnectivityCut) {
  // the 4-cycle 1-2-3 detached from a cheap root gives 3 arcs, 3 in-degrees,
  // but no connection to the root arc; only the cuts rule it out
  WeightedGraph g(4, {{0, 1, 100}, {1, 2, 0}, {2, 3, 0}, {1, 3, 0}});
  std::vector<double> p{1, 5, 5, 5}, c{0, 0, 0, 0};
  BpcstOptions o;
  o.forced_root = 0;
  auto s = solve_bpcst(g, build_bpcst(g, p, c, 10, o));
  EXPECT_NEAR(s.objective, 1.0, 1e-9);
  EXPECT_EQ(s.best->vertices, (std::vector<Vertex>{0}));
}

TEST(BranchRules, TogetherApartOnK3) {
  auto g = k3();
  BpcstOptions open;
  open.profit_floor.reset();
  SplitMix64 rng(4);
  for (int it = 0; it < 30; ++it) {
    std::vector<double> p;
    for (int v = 0; v < 3; ++v) p.push_back(static_cast<double>(rng.uniform_int(-3, 5)));
    std::vector<double> c(3, 0.5);
    std::vector<BranchRule> together{make_rule(0, 1, RuleKind::Together)};
    auto m1 = build_bpcst(g, p, c, 10, open);
    inject_branch_rules(m1, together);
    auto s1 = solve_bpcst(g, m1);
    EXPECT_EQ(s1.best->contains(0), s1.best->contains(1));

    std::vector<BranchRule> apart{make_rule(1, 0, RuleKind::Apart)};
    auto m2 = build_bpcst(g, p, c, 10, open);
    inject_branch_rules(m2, apart);
    auto s2 = solve_bpcst(g, m2);
    EXPECT_FALSE(s2.best->contains(0) && s2.best->contains(1));
  }
}

TEST(BranchRules, ContradictoryRulesLeaveOnlyTheThirdVertex) {
  auto g = k3();
  BpcstOptions open;
  open.profit_floor.reset();
  std::vector<BranchRule> both{make_rule(0, 1, RuleKind::Together), make_rule(0, 1, RuleKind::Apart)};
  std::vector<double> p{10, 10, -1}, c(3, 0.0);
  auto m = build_bpcst(g, p, c, 10, open);
  inject_branch_rules(m, both);
  auto s = solve_bpcst(g, m);
  ASSERT_TRUE(s.best);
  EXPECT_EQ(s.best->vertices, (std::vector<Vertex>{2}));
  for (const Tree& t : s.incumbents) EXPECT_FALSE(t.contains(0) || t.contains(1));
}

// ---------------------------------------------------------------------------
// fixed weight helpers

TEST(FixedWeight, ShiftExample) {
  DualValues d{0.0, {5, -2}, {0, 1}};
  EXPECT_DOUBLE_EQ(fixed_weight_shift(d, 3), -5.0);
  EXPECT_EQ(fixed_weight_prizes(d, 3), (std::vector<double>{10, 0}));
  DualValues pos{0.0, {5, 2}, {0, 0}};
  EXPECT_DOUBLE_EQ(fixed_weight_shift(pos, 3), 0.0);
}

TEST(FixedWeight, ApproximationExactAtOwnWeight) {
  SplitMix64 rng(2);
  for (int it = 0; it < 50; ++it) {
    auto g = bsf::testing::random_connected(rng, 5, 0.6, 1, 9);
    auto d = random_duals(rng, 5, 3);
    auto trees = enumerate_all_trees(g);
    const Tree& t = trees[rng.below(trees.size())];
    EXPECT_NEAR(approximate_reduced_cost(t, d, t.weight), reduced_cost(t, d), 1e-12);
    EXPECT_LE(approximate_reduced_cost(t, d, t.weight + 3), reduced_cost(t, d) + 1e-12);
  }
}

TEST(FixedWeight, ShiftIsNonPositiveAndPrizesNonNegative) {
  SplitMix64 rng(12);
  for (int it = 0; it < 200; ++it) {
    auto d = random_duals(rng, 6, 4);
    const Weight W = rng.uniform_int(0, 50);
    EXPECT_LE(fixed_weight_shift(d, W), 0.0);
    for (double p : fixed_weight_prizes(d, W)) EXPECT_GE(p, -1e-12);
  }
}

// ---------------------------------------------------------------------------
// strategies

TEST(FixedVertices, GuardAndEmptySupport) {
  auto g = figure1_graph();
  DualValues d{0.0, std::vector<double>(8, 1.0), std::vector<double>(8, 0.0)};
  auto r = price_fixed_vertices(g, d, 7, {});
  EXPECT_EQ(r.subproblems, 1);
  ASSERT_FALSE(r.columns.empty());
  EXPECT_EQ(r.columns.front().weight, 6);  // all eight vertices within budget 6
  d.zeta.assign(8, 0.1);
  EXPECT_THROW(price_fixed_vertices(g, d, 7, {}), GuardViolated);
  EXPECT_FALSE(fixed_vertices_allowed(8, 7));
  EXPECT_TRUE(fixed_vertices_allowed(3, 5));
  EXPECT_FALSE(fixed_vertices_allowed(3, 4));
  EXPECT_EQ(choose_strategy(d, 7), PricingStrategy::FixedWeight);
}

TEST(FixedVertices, SubsetIsHonored) {
  SplitMix64 rng(41);
  for (int it = 0; it < 30; ++it) {
    auto g = bsf::testing::random_connected(rng, 5 + static_cast<int>(rng.below(2)), 0.5, 1, 9);
    auto d = random_duals(rng, g.num_vertices(), 2);
    auto B = zeta_support(d);
    PricingOptions opt;
    auto r = price_fixed_vertices(g, d, 100, {}, opt);
    // each returned tree meets the support in some subset; its rho is exact
    for (const Tree& t : r.columns) EXPECT_GT(reduced_cost(t, d), 1e-6);
    // every enumerated subproblem: one per subset
    EXPECT_EQ(r.subproblems, 1 << B.size());
  }
}

TEST(FixedVertices, PerSubsetTreeContainsExactlyS) {
  SplitMix64 rng(64);
  int solved = 0;
  for (int it = 0; it < 25; ++it) {
    auto g = bsf::testing::random_connected(rng, 4 + static_cast<int>(rng.below(3)), 0.5, 1, 9);
    auto d = random_duals(rng, g.num_vertices(), 3);
    d.theta = 0;
    const Weight ub = 40;
    auto B = zeta_support(d);
    const double M = fixed_vertices_penalty(d, ub);
    for (std::uint32_t mask = 0; mask < (1u << B.size()); ++mask) {
      std::vector<Vertex> S;
      for (std::size_t i = 0; i < B.size(); ++i)
        if (mask >> i & 1) S.push_back(B[i]);
      auto sol = solve_bpcst(g, build_fixed_vertices_subproblem(g, d, ub, B, S, {}));
      if (!sol.best) continue;
      ++solved;
      for (Vertex v : B) EXPECT_EQ(sol.best->contains(v), std::count(S.begin(), S.end(), v) == 1) << it;
      EXPECT_NEAR(sol.objective - M * static_cast<double>(S.size()), reduced_cost(*sol.best, d), 1e-6) << it;
    }
  }
  EXPECT_GT(solved, 20);
}

TEST(Pricing, FirstFigure1RmpHasImprovingColumn) {
  auto g = figure1_graph();
  std::vector<Tree> singletons;
  for (Vertex v = 0; v < 8; ++v) singletons.push_back({{v}, {}, 0});
  auto rmp = build_rmp(g, singletons, 2, {}, 7);
  LpSolver lp(rmp.lp);
  ASSERT_EQ(lp.solve(), LpStatus::Optimal);
  auto d = rmp.duals(lp.row_duals());
  EXPECT_GT(oracle_rho(g, d, 7), 1e-6);
  auto fw = price_fixed_weight(g, d, 7, {});
  EXPECT_FALSE(fw.columns.empty());
  check_columns(g, fw, d, 7, {});
  if (choose_strategy(d, 7) == PricingStrategy::FixedVertices) {
    auto fv = price_fixed_vertices(g, d, 7, {});
    EXPECT_FALSE(fv.columns.empty());
    check_columns(g, fv, d, 7, {});
  }
}

TEST(Pricing, NoColumnAtFullyEnumeratedFixedPoint) {
  SplitMix64 rng(8);
  for (int it = 0; it < 6; ++it) {
    auto g = bsf::testing::random_connected(rng, 5 + static_cast<int>(rng.below(2)), 0.5, 1, 20);
    const int k = 2;
    const Weight ub = exact_minmax(g, k).value + 1;
    auto pool = enumerate_dominant_trees(g, ub - 1);
    auto rmp = build_rmp(g, pool, k, {}, ub);
    LpSolver lp(rmp.lp);
    ASSERT_EQ(lp.solve(), LpStatus::Optimal);
    auto d = rmp.duals(lp.row_duals());
    EXPECT_LE(oracle_rho(g, d, ub), 1e-6) << it;
    EXPECT_TRUE(price_fixed_weight(g, d, ub, {}).columns.empty()) << it;
    if (fixed_vertices_allowed(zeta_support(d).size(), ub))
      EXPECT_TRUE(price_fixed_vertices(g, d, ub, {}).columns.empty()) << it;
  }
}

TEST(Pricing, StrategiesAgreeWithOracle) {
  SplitMix64 rng(77);
  int positive = 0;
  for (int it = 0; it < 60; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.5, 1, 9);
    const int n = g.num_vertices();
    auto d = random_duals(rng, n, static_cast<int>(rng.below(4)));
    const Weight ub = rng.uniform_int(2, 25);
    std::vector<BranchRule> rules;
    if (rng.coin()) rules.push_back(make_rule(0, 1 + static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(n - 1))),
                                              rng.coin() ? RuleKind::Together : RuleKind::Apart));
    double best = -kInf;
    std::optional<Tree> best_tree;
    for (const Tree& t : enumerate_dominant_trees(g, ub - 1))
      if (respects(t, rules)) {
        const double r = reduced_cost(t, d);
        if (r > best) {
          best = r;
          best_tree = t;
        }
      }
    const bool exists = best > 1e-6;
    positive += exists;

    PricingOptions full;
    full.early_return = false;
    auto fw = price_fixed_weight(g, d, ub, rules, full);
    check_columns(g, fw, d, ub, rules);
    EXPECT_EQ(!fw.columns.empty(), exists) << it;
    EXPECT_EQ(!price_fixed_weight(g, d, ub, rules).columns.empty(), exists) << it;
    if (fixed_vertices_allowed(zeta_support(d).size(), ub)) {
      auto fv = price_fixed_vertices(g, d, ub, rules);
      check_columns(g, fv, d, ub, rules);
      EXPECT_EQ(!fv.columns.empty(), exists) << it;
      if (exists) EXPECT_NEAR(reduced_cost(fv.columns.front(), d), best, 1e-7) << it;
    }
  }
  EXPECT_GT(positive, 20);
}

// With the w(T) - 1 jump the sweep can step over the weight of the best tree
// after finding a lighter positive one; this asserts it never does.
TEST(Pricing, FullSweepAttainsOracleMaximum) {
  SplitMix64 rng(77);
  PricingOptions full;
  full.early_return = false;
  int misses = 0;
  for (int it = 0; it < 60; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.5, 1, 9);
    auto d = random_duals(rng, g.num_vertices(), static_cast<int>(rng.below(4)));
    const Weight ub = rng.uniform_int(2, 25);
    auto best = pricing_oracle(g, d, ub - 1);
    if (best.rho <= 1e-6) continue;
    auto fw = price_fixed_weight(g, d, ub, {}, full);
    ASSERT_FALSE(fw.columns.empty()) << it;
    if (reduced_cost(fw.columns.front(), d) < best.rho - 1e-7) ++misses;
  }
  EXPECT_EQ(misses, 0);
}

TEST(Pricing, StepwiseSweepAttainsOracleMaximum) {
  SplitMix64 rng(77);
  PricingOptions every;
  every.early_return = false;
  every.jump_on_success = false;
  for (int it = 0; it < 60; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.5, 1, 9);
    auto d = random_duals(rng, g.num_vertices(), static_cast<int>(rng.below(4)));
    const Weight ub = rng.uniform_int(2, 25);
    auto best = pricing_oracle(g, d, ub - 1);
    auto fw = price_fixed_weight(g, d, ub, {}, every);
    if (best.rho <= 1e-6) {
      EXPECT_TRUE(fw.columns.empty()) << it;
      continue;
    }
    ASSERT_FALSE(fw.columns.empty()) << it;
    EXPECT_NEAR(reduced_cost(fw.columns.front(), d), best.rho, 1e-7) << it;
  }
}
