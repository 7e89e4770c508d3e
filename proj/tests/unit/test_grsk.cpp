#include <gtest/gtest.h>

#include <cmath>

#include "polylab/errors.hpp"
#include "polylab/grsk.hpp"
#include "polylab/rng.hpp"

using namespace polylab;

namespace {

WeightGrid ones(int m, int n) {
  return explicit_grid(std::vector<std::vector<double>>(n, std::vector<double>(m, 1.0)));
}

WeightGrid igrid(int m, int n, std::uint64_t seed, double theta = 2.0) {
  return sample_grid(m, n, DistributionSpec::inverse_gamma(theta), seed);
}

void expect_close(LogNum a, LogNum b, double tol = 1e-10) {
  ASSERT_EQ(a.sign(), b.sign());
  if (!a.is_zero()) EXPECT_NEAR(a.logmag(), b.logmag(), tol);
}

}  // namespace

TEST(IndexSet, Membership) {
  const IndexSet idx(4, 3);
  EXPECT_TRUE(idx.in_j1(1, 1));
  EXPECT_FALSE(idx.in_j1(1, 2));
  EXPECT_TRUE(idx.in_j1(4, 3));
  EXPECT_TRUE(idx.in_j2(5, 3));
  EXPECT_FALSE(idx.in_j2(6, 3));
  EXPECT_TRUE(idx.in_j2(7, 1));
  EXPECT_FALSE(idx.in_j2(8, 1));
  for (auto [i, j] : idx.members()) EXPECT_NE(idx.in_j1(i, j), idx.in_j2(i, j));
  EXPECT_EQ(idx.size(), idx.members().size());
  EXPECT_EQ(IndexSet(2, 2).size(), 1u + 2u + 2u + 1u);
}

TEST(Grsk, AllOnesEnsemble) {
  const LineEnsemble e = build_ensemble(ones(3, 3));
  EXPECT_NEAR(e.z(3, 1).to_double(), 6.0, 1e-12);
  EXPECT_NEAR(e.z(4, 1).to_double(), 6.0, 1e-12);
  EXPECT_NEAR(e.z(1, 1).to_double(), 1.0, 1e-12);
}

TEST(Grsk, TopLineIsSinglePathPartitionFunction) {
  const WeightGrid g = igrid(5, 4, 11);
  const LineEnsemble e = build_ensemble(g);
  for (int i = 1; i <= 5; ++i) expect_close(e.z(i, 1), t1(g, {1, 1}, {i, 4}), 1e-12);
  for (int i = 6; i <= 9; ++i) expect_close(e.z(i, 1), t1(g, {1, i - 5}, {5, 4}), 1e-12);
}

TEST(Grsk, SecondLineIsRatioOfTwoPathFunctions) {
  const WeightGrid g = igrid(4, 4, 5);
  const LineEnsemble e = build_ensemble(g);
  for (int i = 2; i <= 4; ++i) {
    const LogNum t2 = brute_force_disjoint(g, nested_spec({1, 1}, {i, 4}, 2));
    expect_close(e.z(i, 2), t2 / t1(g, {1, 1}, {i, 4}), 1e-9);
  }
  for (int i = 5; i <= 7; ++i) {
    const int row = i - 4;
    const LogNum t2 = brute_force_disjoint(g, nested_spec({1, row}, {4, 4}, 2));
    expect_close(e.z(i, 2), t2 / t1(g, {1, row}, {4, 4}), 1e-9);
  }
}

TEST(Grsk, Gluing) {
  const LineEnsemble e = build_ensemble(igrid(4, 3, 7));
  EXPECT_LT(gluing_residual(e), 1e-10);
  for (int s = 0; s < 50; ++s) EXPECT_LT(gluing_residual(build_ensemble(igrid(2 + s % 5, 2 + s % 4, s))), 1e-9);
}

TEST(Grsk, RefusesZeroWeights) {
  EXPECT_THROW(build_ensemble(explicit_grid({{1, 0}, {1, 1}})), Unsupported);
}

TEST(Grsk, IncrementConventions) {
  const LineEnsemble e = build_ensemble(igrid(5, 4, 21));
  const IncrementField inc = build_increments(e);
  const int m = 5, n = 4;
  for (int l = 1; l <= 4; ++l) {
    const int y = n + 1 - l;
    // Leftmost vertex of line l sits at column l and carries z itself.
    expect_close(inc.y({l, y}), e.z(l, l), 1e-13);
    LogNum prod = LogNum::one();
    for (int i = l; i <= m; ++i) prod *= inc.y({i, y});
    expect_close(prod, e.z(m, l), 1e-12);
    expect_close(inc.y({m, y, true}) * e.z(m, l), LogNum::one(), 1e-13);
  }
  EXPECT_FALSE(inc.contains({1, 1}));
  EXPECT_TRUE(inc.successors({m, 2, true}).size() == 1);
  for (const Vertex& v : inc.topological_order())
    for (const Vertex& w : inc.successors(v)) EXPECT_FALSE(v.aux && w.aux);
}

TEST(Grsk, TopologicalOrderIsConsistent) {
  const IncrementField inc = build_increments(build_ensemble(igrid(4, 5, 2)));
  const auto& order = inc.topological_order();
  std::vector<int> pos(inc.slot_count(), -1);
  for (std::size_t r = 0; r < order.size(); ++r) pos[inc.slot(order[r])] = int(r);
  for (const Vertex& v : order)
    for (const Vertex& w : inc.successors(v)) EXPECT_LT(pos[inc.slot(v)], pos[inc.slot(w)]);
}

TEST(Grsk, TopLineSPartition) {
  const int m = 4, n = 3;
  const LineEnsemble e = build_ensemble(igrid(m, n, 9));
  const IncrementField inc = build_increments(e);
  expect_close(s_partition(inc, {{1, n}}, {{m, n}}).value, e.z(m, 1), 1e-12);
  const Vertex w{3, 2};
  expect_close(s_partition(inc, {w}, {w}).value, inc.y(w), 0);
}

TEST(Grsk, FMatchesSinglePathOnEveryEndpoint) {
  for (int seed = 0; seed < 40; ++seed) {
    const int m = 2 + seed % 5, n = 2 + (seed / 5) % 4;
    const WeightGrid g = igrid(m, n, 100 + seed);
    const IncrementField inc = build_increments(build_ensemble(g));
    for (int a = 1; a <= m; ++a)
      for (int b = std::max(1, n - m + 1); b <= n; ++b)
        expect_close(f_function(inc, a, b), t1(g, {a, 1}, {m, b}), 1e-9);
  }
}

TEST(Grsk, FExamples) {
  const WeightGrid g = igrid(5, 4, 3);
  const LineEnsemble e = build_ensemble(g);
  expect_close(f_function(e, 1, 4), t1(g, {1, 1}, {5, 4}), 1e-10);
  expect_close(f_function(e, 2, 2), t1(g, {2, 1}, {5, 2}), 1e-10);
  EXPECT_NEAR(f_function(build_ensemble(ones(3, 3)), 3, 1).to_double(), 1.0, 1e-12);
  EXPECT_THROW(f_function(build_ensemble(ones(2, 4)), 1, 1), InvalidInput);
  EXPECT_THROW(f_function(e, 0, 1), InvalidInput);
}

TEST(Grsk, CrossingDecomposition) {
  const int m = 4, n = 3;
  for (int seed = 0; seed < 10; ++seed) {
    const LineEnsemble e = build_ensemble(igrid(m, n, 40 + seed));
    const IncrementField inc = build_increments(e);
    for (int a = 1; a <= m; ++a)
      for (int b = 1; b <= n; ++b) {
        const Vertex u = lift_start(a, n), v = lift_right_end(m, b);
        LogNum sum;
        for (int y = 1; y <= n; ++y) {
          const Vertex left{m, y}, right{m + 1, y};
          if (!inc.contains(left) || !inc.contains(right)) continue;
          const LogNum to = inc.paths_from(u)[inc.slot(left)];
          const LogNum from = inc.paths_from(right)[inc.slot(v)];
          sum += to / e.z(m, n + 1 - y) * from;
        }
        expect_close(f_function(inc, a, b), sum, 1e-11);
      }
  }
}

TEST(Grsk, DeterminantMatchesDagEnumeration) {
  const int m = 5, n = 4;
  for (int seed = 0; seed < 10; ++seed) {
    const IncrementField inc = build_increments(build_ensemble(igrid(m, n, 60 + seed)));
    for (int a1 = 1; a1 <= m; ++a1)
      for (int a2 = a1 + 1; a2 <= m; ++a2)
        for (int b2 = 1; b2 < n; ++b2)
          for (int b1 = 1; b1 <= m; ++b1) {
            const std::vector<Vertex> s{lift_start(a1, n), lift_start(a2, n)};
            const std::vector<Vertex> t{Vertex{b1, n}, lift_right_end(m, b2)};
            const LogNum bf = s_brute_force(inc, s, t);
            const LogNum det = s_partition(inc, s, t).value;
            if (bf.is_zero()) {
              EXPECT_TRUE(det.is_zero() || std::fabs(det.to_double()) < 1e-9);
            } else {
              expect_close(det, bf, 1e-9);
            }
          }
  }
}

TEST(Grsk, TopEndInvariance) {
  for (int seed = 0; seed < 20; ++seed) {
    const int m = 6, n = 5;
    const WeightGrid g = igrid(m, n, 80 + seed);
    const IncrementField inc = build_increments(build_ensemble(g));
    for (int a1 = 1; a1 <= m; ++a1)
      for (int a2 = a1 + 1; a2 <= m; ++a2)
        for (int b1 = a2 + 1; b1 <= m; ++b1)
          for (int b2 = b1 + 1; b2 <= m; ++b2) {
            const LogNum lhs = t_disjoint(g, {{{a1, 1}, {a2, 1}}, {{b1, n}, {b2, n}}}).value;
            const LogNum rhs = s_partition(inc, {lift_start(a1, n), lift_start(a2, n)}, {{b1, n}, {b2, n}}).value;
            expect_close(lhs, rhs, 1e-8);
          }
  }
}

TEST(Grsk, VirtualSubEnsemble) {
  const LineEnsemble e = build_ensemble(igrid(5, 4, 1));
  const LineEnsemble s = virtual_sub_ensemble(e);
  EXPECT_EQ(s.m(), 4);
  EXPECT_EQ(s.n(), 3);
  for (auto [i, j] : s.index().members()) EXPECT_EQ(s.z(i, j), e.z(i + 1, j + 1));
  EXPECT_LT(gluing_residual(s), 1e-10);
  EXPECT_EQ(virtual_sub_ensemble(build_ensemble(igrid(3, 2, 1))).index().lines(), 1);
  EXPECT_THROW(virtual_sub_ensemble(build_ensemble(igrid(1, 3, 1))), InvalidInput);
  const LineEnsemble two = strip_top_lines(e, 2);
  EXPECT_EQ(two.m(), 3);
  EXPECT_EQ(two.z(2, 1), e.z(4, 3));
}

TEST(Grsk, JsonRoundTrip) {
  const LineEnsemble e = build_ensemble(igrid(3, 2, 4));
  const LineEnsemble back = ensemble_from_json(ensemble_to_json(e));
  for (auto [i, j] : e.index().members()) EXPECT_EQ(back.z(i, j), e.z(i, j));
  EXPECT_NE(ensemble_to_json(e).find("\"logz\""), std::string::npos);
}

TEST(Grsk, ExtendedPathAgrees) {
  const WeightGrid g = igrid(5, 4, 12);
  const LineEnsemble a = build_ensemble(g);
  const LineEnsemble b = to_lognum(build_ensemble_as(ScalarGrid<ExtendedReal>(g)));
  for (auto [i, j] : a.index().members()) EXPECT_NEAR(a.z(i, j).logmag(), b.z(i, j).logmag(), 1e-8);
}
