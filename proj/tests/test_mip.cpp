#include <gtest/gtest.h>

#include "bsf/mip.hpp"
#include "bsf/rng.hpp"
#include "support/lp_check.hpp"

using namespace bsf;

TEST(Mip, PureLpSolvesInOneNode) {
  MipSpec spec;
  spec.lp.sense = ObjectiveSense::Maximize;
  int x = spec.lp.add_variable(0, kInf, 1.0);
  spec.lp.add_row({{x, 2.0}}, RowSense::LessEqual, 3.0);
  auto r = solve_mip(spec);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_EQ(r.nodes, 1);
  EXPECT_NEAR(r.objective, 1.5, 1e-9);
  EXPECT_NEAR(r.objective, solve_lp(spec.lp).objective, 1e-12);
}

TEST(Mip, Knapsack) {
  MipSpec spec;
  spec.lp.sense = ObjectiveSense::Maximize;
  int x = spec.lp.add_variable(0, 1, 3.0);
  int y = spec.lp.add_variable(0, 1, 2.0);
  spec.lp.add_row({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0);
  spec.set_integer(x);
  spec.set_integer(y);
  auto r = solve_mip(spec);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
  EXPECT_NEAR(r.solution[x], 1.0, 1e-9);
}

TEST(Mip, InfeasibleAndUnboundedIntegerVar) {
  MipSpec spec;
  int x = spec.lp.add_variable(0, 1, 1.0);
  spec.lp.add_row({{x, 2.0}}, RowSense::Equal, 1.0);
  spec.set_integer(x);
  EXPECT_EQ(solve_mip(spec).status, MipStatus::Infeasible);
  MipSpec bad;
  int y = bad.lp.add_variable(0, kInf, 1.0);
  bad.set_integer(y);
  EXPECT_THROW(solve_mip(bad), InvalidArgument);
}

TEST(Mip, LazyCutsRejectCandidates) {
  // max x + y over {0,1}^2 with the lazy constraint x + y <= 1
  MipSpec spec;
  spec.lp.sense = ObjectiveSense::Maximize;
  int x = spec.lp.add_variable(0, 1, 1.0);
  int y = spec.lp.add_variable(0, 1, 1.0);
  spec.set_integer(x);
  spec.set_integer(y);
  int calls = 0;
  spec.lazy = [&](std::span<const double>, bool integral) {
    EXPECT_TRUE(integral);
    ++calls;
    return std::vector<Row>{{{{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0, "cut"}};
  };
  auto r = solve_mip(spec);
  ASSERT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
  EXPECT_GE(calls, 2);
  EXPECT_EQ(r.lazy_rows, 1);
}

TEST(Mip, WarmStartAndTimeLimit) {
  MipSpec spec;
  spec.lp.sense = ObjectiveSense::Maximize;
  int x = spec.lp.add_variable(0, 5, 1.0);
  spec.lp.add_row({{x, 2.0}}, RowSense::LessEqual, 7.0);
  spec.set_integer(x);
  spec.warm_start = std::vector<double>{2.0};
  MipOptions opt;
  opt.node_limit = 0;
  auto r = solve_mip(spec, opt);
  EXPECT_EQ(r.status, MipStatus::Feasible);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
  EXPECT_EQ(r.bound, kInf);
  spec.warm_start = std::vector<double>{4.0};  // violates the row: ignored
  r = solve_mip(spec, opt);
  EXPECT_EQ(r.status, MipStatus::TimeLimit);
  r = solve_mip(spec);
  EXPECT_EQ(r.status, MipStatus::Optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
}

namespace {

struct RandomMip {
  MipSpec spec;
  std::optional<double> brute;
};

// Small bounded integer programs with a few continuous variables fixed by
// enumeration of the integer part and an LP on the rest.
RandomMip random_mip(SplitMix64& rng) {
  RandomMip out;
  auto lp = bsf::testing::random_feasible_lp(rng, 4, 4);
  for (auto& v : lp.variables) {
    v.lower = std::ceil(v.lower);
    v.upper = std::floor(v.upper);
    if (v.upper - v.lower > 3) v.upper = v.lower + 3;
  }
  out.spec.lp = lp;
  const int n = lp.num_variables();
  std::vector<char> integer(n);
  for (int j = 0; j < n; ++j) {
    integer[j] = rng.below(4) != 0;
    out.spec.set_integer(j, integer[j]);
  }
  std::vector<double> fix(n);
  auto rec = [&](auto&& self, int j) -> void {
    if (j == n) {
      LinearProgram sub = lp;
      for (int i = 0; i < n; ++i)
        if (integer[i]) sub.variables[i].lower = sub.variables[i].upper = fix[i];
      auto s = solve_lp(sub);
      if (s.status != LpStatus::Optimal) return;
      if (!out.brute || (lp.sense == ObjectiveSense::Minimize ? s.objective < *out.brute : s.objective > *out.brute))
        out.brute = s.objective;
      return;
    }
    if (!integer[j]) return self(self, j + 1);
    for (double v = lp.variables[j].lower; v <= lp.variables[j].upper; v += 1.0) {
      fix[j] = v;
      self(self, j + 1);
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace

TEST(MipProperty, MatchesEnumeration) {
  SplitMix64 rng(99);
  for (int iter = 0; iter < 100; ++iter) {
    auto m = random_mip(rng);
    auto r = solve_mip(m.spec);
    if (!m.brute) {
      EXPECT_EQ(r.status, MipStatus::Infeasible) << iter;
      continue;
    }
    ASSERT_EQ(r.status, MipStatus::Optimal) << iter;
    EXPECT_NEAR(r.objective, *m.brute, 1e-6 * (1 + std::abs(*m.brute))) << iter;
  }
}

TEST(MipProperty, NoOpLazyCallbackChangesNothing) {
  SplitMix64 rng(7);
  for (int iter = 0; iter < 60; ++iter) {
    auto m = random_mip(rng);
    auto plain = solve_mip(m.spec);
    m.spec.lazy = [](std::span<const double>, bool) { return std::vector<Row>{}; };
    m.spec.separate_fractional = rng.coin();
    auto lazy = solve_mip(m.spec);
    ASSERT_EQ(plain.status, lazy.status);
    if (plain.has_solution()) EXPECT_NEAR(plain.objective, lazy.objective, 1e-9);
  }
}
