#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsf/heuristics.hpp"
#include "bsf/instances.hpp"
#include "bsf/models.hpp"
#include "bsf/mps.hpp"
#include "bsf/oracle.hpp"
#include "support/naive.hpp"

using namespace bsf;

namespace {

Weight mip_value(const MipSpec& spec) {
  auto r = solve_mip(spec);
  EXPECT_EQ(r.status, MipStatus::Optimal);
  return static_cast<Weight>(std::llround(r.objective));
}

bool satisfies_rows(const LinearProgram& lp, std::span<const double> x) {
  for (const Row& r : lp.rows)
    if (detail::row_violated(r, x)) return false;
  for (int j = 0; j < lp.num_variables(); ++j)
    if (x[j] < lp.variables[j].lower - 1e-9 || x[j] > lp.variables[j].upper + 1e-9) return false;
  return true;
}

// Every entry a multiple of 1/4 so cut arithmetic is exact.
std::vector<double> dyadic_vector(SplitMix64& rng, std::size_t size, double density) {
  std::vector<double> x(size, 0.0);
  for (double& v : x)
    if (rng.uniform01() < density) v = static_cast<double>(rng.uniform_int(1, 4)) / 4.0;
  return x;
}

bool brute_force_violated(const WeightedGraph& g, std::span<const double> x, int k) {
  const int n = g.num_vertices();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Vertex> S;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1) S.push_back(v);
    if (inside_mass(g, x, k, S) > static_cast<double>(S.size()) - 1 + 1e-9) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// flow

TEST(FlowModel, Figure1MinMax) {
  auto g = figure1_graph();
  auto fm = build_flow_minmax(g, 2, 7);
  EXPECT_EQ(fm.spec.lp.num_variables(), 49);
  EXPECT_EQ(fm.z.size(), 16u);
  auto r = solve_mip(fm.spec);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 4.0, 1e-6);
  auto f = extract_forest_from_flow(g, fm, r.solution);
  EXPECT_EQ(f.value_minmax, 4);
  EXPECT_EQ(f.k(), 2);
}

TEST(FlowModel, Figure1MaxMinBothModes) {
  auto g = figure1_graph();
  const Weight U = max_spanning_tree(g).weight;
  for (auto mode : {MaxMinMode::BigM, MaxMinMode::Theta}) {
    auto fm = build_flow_maxmin(g, 2, U, mode);
    auto r = solve_mip(fm.spec);
    ASSERT_EQ(r.status, MipStatus::Optimal);
    EXPECT_NEAR(r.objective, 3.0, 1e-6);
    EXPECT_EQ(extract_forest_from_flow(g, fm, r.solution).value_maxmin, 3);
  }
  EXPECT_EQ(build_flow_maxmin(g, 2, U, MaxMinMode::Theta).theta.size(), 8u);
}

TEST(FlowModel, SingleTreeIsMst) {
  SplitMix64 rng(5);
  for (int it = 0; it < 10; ++it) {
    auto g = bsf::testing::random_connected(rng, 3 + static_cast<int>(rng.below(5)), 0.4, 1, 20);
    const Weight mst = kruskal_mst(g).weight;
    EXPECT_EQ(mip_value(build_flow_minmax(g, 1, mst).spec), mst);
    const Weight mx = max_spanning_tree(g).weight;
    EXPECT_EQ(mip_value(build_flow_maxmin(g, 1, mx).spec), mx);
    EXPECT_EQ(mip_value(build_flow_maxmin(g, 1, mx, MaxMinMode::Theta).spec), mx);
  }
}

TEST(FlowModel, BadBound) {
  auto g = figure1_graph();
  // MST 7 minus its heaviest edge leaves 6, so 3 is a certified lower bound
  EXPECT_THROW(build_flow_minmax(g, 2, 2), BadBound);
  EXPECT_NO_THROW(build_flow_minmax(g, 2, 3));
  EXPECT_THROW(build_flow_maxmin(g, 1, 8), BadBound);  // max spanning tree weighs 9
  EXPECT_NO_THROW(build_flow_maxmin(g, 1, 9));
  // the optimum itself is always accepted, even below ceil(w(MST)/k)
  auto star = star_graph({3, 1, 1});
  EXPECT_EQ(exact_minmax(star, 2).value, 2);
  EXPECT_EQ(mip_value(build_flow_minmax(star, 2, 2).spec), 2);
}

TEST(FlowModel, WarmPointIsFeasible) {
  SplitMix64 rng(8);
  for (int it = 0; it < 20; ++it) {
    auto g = bsf::testing::random_connected(rng, 4 + static_cast<int>(rng.below(5)), 0.4, 0, 15);
    const int k = 1 + static_cast<int>(rng.below(3));
    auto h = heuristic_bnb(g, k);
    auto fm = build_flow_minmax(g, k, h.ub);
    EXPECT_TRUE(satisfies_rows(fm.spec.lp, flow_point(g, fm, h.forest))) << it;
    auto mm = exact_maxmin(g, k);
    for (auto mode : {MaxMinMode::BigM, MaxMinMode::Theta}) {
      auto mx = build_flow_maxmin(g, k, max_spanning_tree(g).weight, mode);
      EXPECT_TRUE(satisfies_rows(mx.spec.lp, flow_point(g, mx, mm.forest))) << it;
    }
  }
}

TEST(FlowModel, ExtractRoundTrips) {
  auto path = path_graph({2, 5, 1, 4});
  auto fm = build_flow_minmax(path, 2, 12);
  auto r = solve_mip(fm.spec);
  auto f = extract_forest_from_flow(path, fm, r.solution);
  EXPECT_EQ(f.value_minmax, static_cast<Weight>(std::llround(r.objective)));
  EXPECT_EQ(f.value_minmax, 5);

  SplitMix64 rng(99);
  auto g = bsf::testing::random_connected(rng, 7, 0.4, 1, 30);
  auto fm7 = build_flow_minmax(g, 3, heuristic_bnb(g, 3).ub);
  auto r7 = solve_mip(fm7.spec);
  auto f7 = extract_forest_from_flow(g, fm7, r7.solution);
  EXPECT_EQ(f7.value_minmax, static_cast<Weight>(std::llround(r7.objective)));
  EXPECT_EQ(f7.value_minmax, exact_minmax(g, 3).value);
}

TEST(FlowModel, ExtractRejectsInconsistentPoints) {
  auto g = figure1_graph();
  auto fm = build_flow_minmax(g, 2, 7);
  std::vector<double> x(fm.spec.lp.num_variables(), 0.0);
  x[fm.y[0]] = 0.5;
  EXPECT_THROW(extract_forest_from_flow(g, fm, x), InconsistentSolution);
  std::fill(x.begin(), x.end(), 0.0);
  x[fm.y[0]] = 1;  // one root but eight components
  EXPECT_THROW(extract_forest_from_flow(g, fm, x), InconsistentSolution);
}

// ---------------------------------------------------------------------------
// cycle elimination

TEST(CycleModel, Figure1) {
  auto g = figure1_graph();
  auto cm = build_cycle_minmax(g, 2);
  EXPECT_EQ(cm.spec.lp.num_variables(), g.num_edges() * 2 + 1);
  auto r = solve_mip(cm.spec);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 4.0, 1e-6);
  EXPECT_EQ(extract_forest_from_cycle(g, cm, r.solution).value_minmax, 4);
}

TEST(CycleModel, TriangleNeedsASubtourCut) {
  WeightedGraph tri(3, {{0, 1, 1}, {1, 2, 2}, {0, 2, 4}});
  std::vector<double> ones{1, 1, 1};
  auto sets = separate_cycle(ones, tri, 1);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0], (std::vector<Vertex>{0, 1, 2}));
  auto cm = build_cycle_minmax(tri, 1);
  auto r = solve_mip(cm.spec);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
}

TEST(CycleModel, RelaxationBelowInteger) {
  SplitMix64 rng(31);
  for (int it = 0; it < 8; ++it) {
    auto g = bsf::testing::random_connected(rng, 4 + static_cast<int>(rng.below(3)), 0.4, 1, 20);
    const int k = 1 + static_cast<int>(rng.below(2));
    auto cm = build_cycle_minmax(g, k);
    auto lp = solve_relaxation(cm.spec);
    ASSERT_EQ(lp.status, LpStatus::Optimal);
    EXPECT_LE(lp.objective, static_cast<double>(mip_value(cm.spec)) + 1e-6);
  }
}

TEST(CycleSeparation, ThreeCycleInOneClass) {
  // 4-vertex graph, triangle 0-1-2 plus pendant 3, k = 2
  WeightedGraph g(4, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {2, 3, 1}});
  std::vector<double> x(8, 0.0);
  for (EdgeId e : {0, 1, 2}) x[e * 2] = 1;
  auto sets = separate_cycle(x, g, 2);
  ASSERT_FALSE(sets.empty());
  EXPECT_EQ(sets[0], (std::vector<Vertex>{0, 1, 2}));
}

TEST(CycleSeparation, ForestsAreNeverCut) {
  SplitMix64 rng(3);
  for (int it = 0; it < 100; ++it) {
    const int n = 3 + static_cast<int>(rng.below(6));
    auto g = bsf::testing::random_connected(rng, n, 0.5, 1, 9);
    const int k = 1 + static_cast<int>(rng.below(3));
    auto f = k_approx(g, std::min(k, n));
    std::vector<double> x(static_cast<std::size_t>(g.num_edges()) * k, 0.0);
    for (int i = 0; i < f.k(); ++i)
      for (EdgeId e : f.trees[i].edges) x[e * k + (i % k)] = 1;
    EXPECT_TRUE(separate_cycle(x, g, k).empty()) << it;
  }
}

TEST(CycleSeparationProperty, AgreesWithSubsetScan) {
  SplitMix64 rng(77);
  int violated = 0;
  for (int it = 0; it < 400; ++it) {
    const int n = 2 + static_cast<int>(rng.below(7));
    auto g = bsf::testing::random_connected(rng, n, 0.5, 1, 9);
    const int k = 1 + static_cast<int>(rng.below(3));
    auto x = dyadic_vector(rng, static_cast<std::size_t>(g.num_edges()) * k, 0.35);
    const bool expect = brute_force_violated(g, x, k);
    auto sets = separate_cycle(x, g, k);
    EXPECT_EQ(!sets.empty(), expect) << it;
    for (const auto& S : sets) EXPECT_GT(inside_mass(g, x, k, S), static_cast<double>(S.size()) - 1) << it;
    violated += expect;
  }
  EXPECT_GT(violated, 40);
  EXPECT_LT(violated, 360);
}

TEST(CycleSeparationProperty, CutCapacityIdentity) {
  SplitMix64 rng(13);
  for (int it = 0; it < 1000; ++it) {
    const int n = 2 + static_cast<int>(rng.below(7));
    auto g = bsf::testing::random_connected(rng, n, 0.5, 1, 9);
    const int k = 1 + static_cast<int>(rng.below(3));
    auto x = dyadic_vector(rng, static_cast<std::size_t>(g.num_edges()) * k, 0.5);
    std::vector<Vertex> S;
    for (int v = 0; v < n; ++v)
      if (rng.below(2)) S.push_back(v);
    if (S.empty()) S.push_back(static_cast<Vertex>(rng.below(n)));
    double outside = 0.0;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const bool in = std::count(S.begin(), S.end(), g.edge(e).u) && std::count(S.begin(), S.end(), g.edge(e).v);
      if (!in)
        for (int i = 0; i < k; ++i) outside += x[e * k + i];
    }
    EXPECT_EQ(cut_capacity(g, x, k, S), static_cast<double>(S.size()) + outside) << it;
  }
}

// ---------------------------------------------------------------------------
// cross-formulation

TEST(ModelProperty, FlowCycleAndOracleAgree) {
  SplitMix64 rng(2024);
  for (int it = 0; it < 20; ++it) {
    const int n = 4 + static_cast<int>(rng.below(6));
    auto g = bsf::testing::random_connected(rng, n, 0.3, 1, 50);
    const int k = 2 + static_cast<int>(rng.below(2));
    const Weight opt = exact_minmax(g, k).value;
    auto h = heuristic_bnb(g, k);
    auto fm = build_flow_minmax(g, k, h.ub);
    fm.spec.warm_start = flow_point(g, fm, h.forest);
    EXPECT_EQ(mip_value(fm.spec), opt) << it;
    auto cm = build_cycle_minmax(g, k);
    cm.spec.warm_start = cycle_point(g, cm, h.forest);
    EXPECT_EQ(mip_value(cm.spec), opt) << it;
  }
}

TEST(ModelProperty, MaxMinModesAgreeWithOracle) {
  SplitMix64 rng(4048);
  for (int it = 0; it < 50; ++it) {
    const int n = 3 + static_cast<int>(rng.below(6));
    auto g = bsf::testing::random_connected(rng, n, 0.35, 1, 40);
    const int k = 1 + static_cast<int>(rng.below(std::min(n, 3)));
    const Weight opt = exact_maxmin(g, k).value;
    const Weight U = max_spanning_tree(g).weight;
    EXPECT_EQ(mip_value(build_flow_maxmin(g, k, U, MaxMinMode::BigM).spec), opt) << it;
    EXPECT_EQ(mip_value(build_flow_maxmin(g, k, U, MaxMinMode::Theta).spec), opt) << it;
  }
}

// ---------------------------------------------------------------------------
// restricted master

TEST(Rmp, SingletonsWithKEqualN) {
  auto g = figure1_graph();
  ColumnPool pool;
  for (Vertex v = 0; v < g.num_vertices(); ++v) pool.add(make_tree(g, {v}, {}), 100);
  auto rmp = build_rmp(g, pool, g.num_vertices(), {}, 7);
  auto sol = solve_lp(rmp.lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-9);
  EXPECT_FALSE(rmp.artificial_active(sol.primal));
}

TEST(Rmp, DominantEnumerationOfFigure1) {
  auto g = figure1_graph();
  auto trees = enumerate_dominant_trees(g, g.total_weight());
  auto rmp = build_rmp(g, std::span<const Tree>(trees), 2, {}, 7);
  auto sol = solve_lp(rmp.lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_LE(sol.objective, 4.0 + 1e-9);
  EXPECT_FALSE(rmp.artificial_active(sol.primal));
  auto r = solve_rmp_integer(rmp, 30);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 4.0, 1e-9);
  EXPECT_EQ(forest_from_rmp(g, rmp, r.solution).value_minmax, 4);
}

TEST(Rmp, ColumnPatternsMatchTrees) {
  auto g = figure1_graph();
  auto trees = enumerate_dominant_trees(g, 5);
  auto rmp = build_rmp(g, std::span<const Tree>(trees), 2, {}, 7);
  ASSERT_EQ(rmp.columns.size(), trees.size());
  for (std::size_t c = 0; c < rmp.columns.size(); ++c) {
    const int var = rmp.column_vars[c];
    const Tree& t = rmp.columns[c];
    for (int i = 0; i < rmp.lp.num_rows(); ++i) {
      double coef = 0.0;
      for (const Term& term : rmp.lp.rows[i].terms)
        if (term.var == var) coef += term.coef;
      double want = 0.0;
      if (i == rmp.k_row) want = -1;
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (i == rmp.cover_rows[v] && t.contains(v)) want = 1;
        if (i == rmp.weight_rows[v] && t.contains(v)) want = -static_cast<double>(t.weight);
      }
      EXPECT_EQ(coef, want);
    }
  }
}

TEST(Rmp, RulesFilterColumnsAndArtificialsCoverTheRest) {
  auto g = figure1_graph();
  auto trees = enumerate_dominant_trees(g, g.total_weight());
  std::vector<BranchRule> rules{make_rule(0, 1, RuleKind::Apart), make_rule(0, 1, RuleKind::Together)};
  auto rmp = build_rmp(g, std::span<const Tree>(trees), 2, rules, 7);
  for (const Tree& t : rmp.columns) EXPECT_FALSE(t.contains(0) || t.contains(1));
  // nothing can cover vertex 0, so the artificial stays in
  auto sol = solve_lp(rmp.lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_TRUE(rmp.artificial_active(sol.primal));
  EXPECT_EQ(solve_rmp_integer(rmp, 10).status, MipStatus::Infeasible);

  auto empty = build_rmp(g, std::span<const Tree>(), 2, {}, 7);
  EXPECT_TRUE(empty.columns.empty());
  auto es = solve_lp(empty.lp);
  EXPECT_TRUE(empty.artificial_active(es.primal));
}

TEST(Rmp, DualsSatisfyTheirSigns) {
  auto g = figure1_graph();
  ColumnPool pool;
  for (Vertex v = 0; v < g.num_vertices(); ++v) pool.add(make_tree(g, {v}, {}), 100);
  auto rmp = build_rmp(g, pool, 2, {}, 7);
  auto sol = solve_lp(rmp.lp);
  auto d = rmp.duals(sol.row_duals);
  EXPECT_GE(d.theta, 0.0);
  double zsum = 0.0;
  for (double z : d.zeta) {
    EXPECT_GE(z, 0.0);
    zsum += z;
  }
  EXPECT_LE(zsum, 1.0 + 1e-9);
  // every pooled column prices non-positively at an optimum
  for (const Tree& t : rmp.columns) EXPECT_LE(reduced_cost(t, d), 1e-7);
}

// ---------------------------------------------------------------------------
// MPS

namespace {

LinearProgram normalized(LinearProgram lp) {
  for (Row& r : lp.rows) {
    std::map<int, double> merged;
    for (const Term& t : r.terms) merged[t.var] += t.coef;
    r.terms.clear();
    for (auto [v, c] : merged)
      if (c != 0.0) r.terms.push_back({v, c});
  }
  return lp;
}

void expect_same(const MipSpec& a, const MipSpec& b) {
  const auto x = normalized(a.lp), y = normalized(b.lp);
  EXPECT_EQ(x.sense, y.sense);
  ASSERT_EQ(x.num_variables(), y.num_variables());
  ASSERT_EQ(x.num_rows(), y.num_rows());
  for (int j = 0; j < x.num_variables(); ++j) {
    EXPECT_EQ(x.variables[j].name, y.variables[j].name);
    EXPECT_EQ(x.variables[j].lower, y.variables[j].lower) << x.variables[j].name;
    EXPECT_EQ(x.variables[j].upper, y.variables[j].upper) << x.variables[j].name;
    EXPECT_EQ(x.variables[j].objective, y.variables[j].objective);
    EXPECT_EQ(a.integer(j), b.integer(j)) << x.variables[j].name;
  }
  for (int i = 0; i < x.num_rows(); ++i) {
    EXPECT_EQ(x.rows[i].name, y.rows[i].name);
    EXPECT_EQ(x.rows[i].sense, y.rows[i].sense);
    EXPECT_EQ(x.rows[i].rhs, y.rows[i].rhs);
    ASSERT_EQ(x.rows[i].terms.size(), y.rows[i].terms.size()) << x.rows[i].name;
    for (std::size_t t = 0; t < x.rows[i].terms.size(); ++t) {
      EXPECT_EQ(x.rows[i].terms[t].var, y.rows[i].terms[t].var);
      EXPECT_EQ(x.rows[i].terms[t].coef, y.rows[i].terms[t].coef);
    }
  }
}

int count_columns(const std::string& text, const std::string& prefix) {
  std::istringstream is(text);
  std::string line, section;
  std::set<std::string> names;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != ' ') {
      section = line.substr(0, line.find(' '));
      continue;
    }
    if (section != "COLUMNS") continue;
    std::istringstream ls(line);
    std::string nm;
    ls >> nm;
    if (nm.rfind(prefix, 0) == 0) names.insert(nm);
  }
  return static_cast<int>(names.size());
}

}  // namespace

TEST(Mps, FlowModelRoundTrip) {
  auto g = path_graph({3, 4});
  auto fm = build_flow_minmax(g, 2, 7);
  std::stringstream ss;
  write_mps(ss, fm.spec, "path3");
  auto back = read_mps(ss);
  expect_same(fm.spec, back);
  EXPECT_NEAR(solve_mip(back).objective, 3.0, 1e-9);
}

TEST(Mps, MaxMinAndFreeVariablesRoundTrip) {
  auto fm = build_flow_maxmin(figure1_graph(), 2, 8, MaxMinMode::Theta);
  fm.spec.lp.add_variable(-kInf, kInf, 0.125, "free_var");
  fm.spec.lp.add_variable(-kInf, 3, 0, "neg_var");
  fm.spec.lp.add_variable(2, 2, 0, "fixed_var");
  fm.spec.lp.add_variable(-1.5, kInf, 1e-13, "tiny_obj");
  std::stringstream ss;
  write_mps(ss, fm.spec);
  EXPECT_NE(ss.str().find("OBJSENSE"), std::string::npos);
  expect_same(fm.spec, read_mps(ss));
}

TEST(Mps, CycleColumnCount) {
  auto g = figure1_graph();
  auto cm = build_cycle_minmax(g, 3);
  std::stringstream ss;
  write_mps(ss, cm.spec);
  EXPECT_EQ(count_columns(ss.str(), "x_") + count_columns(ss.str(), "omega"), g.num_edges() * 3 + 1);
  expect_same(cm.spec, read_mps(ss));
}

TEST(Mps, PartitionModelOfTriangle) {
  WeightedGraph k3(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  auto trees = enumerate_dominant_trees(k3, 10);
  ASSERT_EQ(trees.size(), 7u);
  auto rmp = build_rmp(k3, std::span<const Tree>(trees), 2, {}, 3);
  std::stringstream ss;
  write_mps(ss, rmp_integer_spec(rmp));
  EXPECT_EQ(count_columns(ss.str(), "xT_"), 7);
}

TEST(Mps, FileErrors) {
  EXPECT_THROW(import_mps("/nonexistent/dir/model.mps"), IoError);
  EXPECT_THROW(export_mps(MipSpec{}, "/nonexistent/dir/model.mps"), IoError);
  std::istringstream bad("NAME x\nROWS\n N obj\n Q r1\nENDATA\n");
  EXPECT_THROW(read_mps(bad), ParseError);
  std::istringstream badnum("NAME x\nROWS\n N obj\n L r1\nCOLUMNS\n    v  r1  abc\nENDATA\n");
  try {
    read_mps(badnum);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6);
  }
}

TEST(Mps, LpTextMentionsEveryRow) {
  auto fm = build_flow_minmax(path_graph({1, 1}), 1, 2);
  std::ostringstream os;
  write_lp_text(os, fm.spec.lp, fm.spec.is_integer);
  const std::string s = os.str();
  for (const Row& r : fm.spec.lp.rows) EXPECT_NE(s.find(r.name + ":"), std::string::npos) << r.name;
  EXPECT_NE(s.find("integer"), std::string::npos);
}
