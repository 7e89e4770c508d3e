#include <gtest/gtest.h>

#include <cmath>

#include "polylab/errors.hpp"
#include "polylab/partition.hpp"
#include "polylab/rng.hpp"

using namespace polylab;

namespace {

WeightGrid ones(int m, int n) {
  return explicit_grid(std::vector<std::vector<double>>(n, std::vector<double>(m, 1.0)));
}

// Random planar-ordered endpoint family on an m x n grid, or empty.
EndpointSpec random_spec(Stream& rng, int m, int n, int k) {
  auto pick = [&](std::vector<Point>& out) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      out.clear();
      Point p{1 + int(rng.next_u64() % m), 1 + int(rng.next_u64() % n)};
      out.push_back(p);
      for (int r = 1; r < k; ++r) {
        Point q{p.i + int(rng.next_u64() % 3), p.j - int(rng.next_u64() % 3)};
        if (q == p) q.i += 1;
        p = q;
        out.push_back(p);
      }
      bool ok = true;
      for (Point q : out) ok &= q.i >= 1 && q.i <= m && q.j >= 1 && q.j <= n;
      if (ok) return true;
    }
    return false;
  };
  EndpointSpec s;
  if (!pick(s.starts) || !pick(s.ends)) return {};
  return s;
}

}  // namespace

TEST(Partition, T1CountsPaths) {
  EXPECT_NEAR(t1(ones(3, 3), {1, 1}, {3, 3}).to_double(), 6.0, 1e-12);
  EXPECT_NEAR(t1(ones(6, 5), {1, 1}, {6, 5}).to_double(), 126.0, 1e-10);
}

TEST(Partition, T1SingleVertexAndEmpty) {
  const WeightGrid g = sample_grid(4, 4, DistributionSpec::inverse_gamma(2), 1);
  EXPECT_EQ(t1(g, {2, 3}, {2, 3}), g(2, 3));
  EXPECT_TRUE(t1(g, {2, 2}, {1, 1}).is_zero());
  EXPECT_TRUE(t1(g, {1, 3}, {3, 2}).is_zero());
  EXPECT_THROW(t1(g, {0, 1}, {2, 2}), InvalidInput);
}

TEST(Partition, TwoPathExamples) {
  EndpointSpec s{{{1, 1}, {2, 1}}, {{3, 3}, {3, 2}}};
  EXPECT_NEAR(t_disjoint(ones(3, 3), s).value.to_double(), 3.0, 1e-12);
  EXPECT_NEAR(brute_force_disjoint(ones(3, 3), s).to_double(), 3.0, 1e-12);

  EndpointSpec o{{{1, 1}, {2, 1}}, {{2, 2}, {2, 1}}};
  EXPECT_NEAR(t_disjoint(ones(2, 2), o).value.to_double(), 1.0, 1e-12);
  EXPECT_NEAR(brute_force_disjoint(ones(2, 2), o).to_double(), 1.0, 1e-12);
}

TEST(Partition, Nested) {
  const WeightGrid g = sample_grid(3, 3, DistributionSpec::inverse_gamma(2), 8);
  EXPECT_NEAR(t_k_nested(g, {1, 1}, {3, 3}, 1).value.logmag(), t1(g, {1, 1}, {3, 3}).logmag(), 1e-13);
  // Disjoint pairs (1,1)->(2,3), (2,1)->(3,3) on the all-ones grid.
  const double bf = brute_force_disjoint(ones(3, 3), nested_spec({1, 1}, {3, 3}, 2)).to_double();
  EXPECT_NEAR(bf, 3.0, 1e-12);
  EXPECT_NEAR(t_k_nested(ones(3, 3), {1, 1}, {3, 3}, 2).value.to_double(), bf, 1e-12);
  EXPECT_TRUE(t_k_nested(ones(3, 3), {1, 1}, {3, 3}, 4).value.is_zero());
}

TEST(Partition, RejectsUnorderedEndpoints) {
  EndpointSpec s{{{2, 1}, {1, 1}}, {{3, 3}, {3, 2}}};
  EXPECT_THROW(t_disjoint(ones(3, 3), s), InvalidInput);
  EndpointSpec e{{{1, 1}, {1, 1}}, {{3, 3}, {3, 2}}};
  EXPECT_THROW(t_disjoint(ones(3, 3), e), InvalidInput);
}

TEST(Partition, BruteForceBudget) {
  EndpointSpec s{{{1, 1}}, {{7, 7}}};
  EXPECT_THROW(brute_force_disjoint(ones(7, 7), s), BudgetExceeded);
  EXPECT_NEAR(brute_force_disjoint(ones(1, 1), EndpointSpec{{{1, 1}}, {{1, 1}}}).to_double(), 1.0, 0);
  EXPECT_TRUE(brute_force_disjoint(ones(3, 3), EndpointSpec{{{2, 2}}, {{1, 1}}}).is_zero());
}

TEST(PartitionProperty, LgvMatchesEnumeration) {
  Stream rng(77);
  int tested = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + int(rng.next_u64() % 5), n = 1 + int(rng.next_u64() % 5);
    const int k = 1 + int(rng.next_u64() % 3);
    const DistributionSpec d = trial % 3 == 0 ? DistributionSpec::uniform01() : DistributionSpec::inverse_gamma(2.0);
    const WeightGrid g = sample_grid(m, n, d, trial);
    const EndpointSpec s = random_spec(rng, m, n, k);
    if (s.starts.empty()) continue;
    ++tested;
    const LogNum a = t_disjoint(g, s).value;
    const LogNum b = brute_force_disjoint(g, s);
    if (b.is_zero()) {
      EXPECT_TRUE(a.is_zero() || a.logmag() < b.logmag() + 1e-300 || std::fabs(a.to_double()) < 1e-12);
      continue;
    }
    EXPECT_EQ(a.sign(), 1);
    EXPECT_NEAR(a.logmag(), b.logmag(), 1e-9);
  }
  EXPECT_GT(tested, 200);
}

TEST(PartitionProperty, MonotoneInEachWeight) {
  Stream rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> v(4, std::vector<double>(4));
    for (auto& row : v)
      for (double& x : row) x = 0.1 + rng.uniform();
    const WeightGrid g = explicit_grid(v);
    const int pi = int(rng.next_u64() % 4), pj = int(rng.next_u64() % 4);
    v[pj][pi] *= 1.5;
    const WeightGrid h = explicit_grid(v);
    for (int ui = 1; ui <= 4; ++ui)
      for (int uj = 1; uj <= 4; ++uj)
        for (int vi = ui; vi <= 4; ++vi)
          for (int vj = uj; vj <= 4; ++vj)
            EXPECT_LE(t1(g, {ui, uj}, {vi, vj}).logmag(), t1(h, {ui, uj}, {vi, vj}).logmag() + 1e-14);
  }
}

TEST(PartitionProperty, QuadranglePositivity) {
  for (int seed = 0; seed < 100; ++seed) {
    const WeightGrid g = sample_grid(5, 5, DistributionSpec::inverse_gamma(2.0), seed);
    for (int x1 = 1; x1 <= 5; ++x1)
      for (int x2 = x1 + 1; x2 <= 5; ++x2)
        for (int y1 = 1; y1 <= 5; ++y1)
          for (int y2 = y1 + 1; y2 <= 5; ++y2) {
            const Point u1{x1, 1}, u2{x2, 1}, v1{y1, 5}, v2{y2, 5};
            const LogNum a = t1(g, u1, v1), b = t1(g, u1, v2), c = t1(g, u2, v1), d = t1(g, u2, v2);
            if (a.is_zero() || b.is_zero() || c.is_zero() || d.is_zero()) continue;
            EXPECT_GE((a * d - b * c).sign(), 0);
          }
  }
}

TEST(PartitionProperty, ColumnCrossingDecomposition) {
  for (int seed = 0; seed < 50; ++seed) {
    const WeightGrid g = sample_grid(6, 5, DistributionSpec::inverse_gamma(3.0), seed);
    const Point u{1, 2}, v{6, 5};
    const int c = 3;
    LogNum sum;
    for (int j = u.j; j <= v.j; ++j) sum += t1(g, u, {c, j}) * t1(g, {c + 1, j}, v);
    EXPECT_NEAR(sum.logmag(), t1(g, u, v).logmag(), 1e-12);
  }
}

TEST(PartitionProperty, TablesAgreeWithRollingDp) {
  const WeightGrid g = sample_grid(5, 4, DistributionSpec::inverse_gamma(1.0), 3);
  const ScalarGrid<LogNum> sg(g);
  const Table<LogNum> fw = t1_forward(sg, {2, 1});
  const Table<LogNum> bw = t1_backward(sg, {4, 4});
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 4; ++j) {
      const LogNum f = t1(g, {2, 1}, {i, j}), b = t1(g, {i, j}, {4, 4});
      EXPECT_TRUE(f.is_zero() ? fw(i, j).is_zero() : std::fabs(f.logmag() - fw(i, j).logmag()) < 1e-13);
      EXPECT_TRUE(b.is_zero() ? bw(i, j).is_zero() : std::fabs(b.logmag() - bw(i, j).logmag()) < 1e-13);
    }
}

TEST(PartitionProperty, ExtendedPrecisionAgrees) {
  for (int seed = 0; seed < 20; ++seed) {
    const WeightGrid g = sample_grid(5, 5, DistributionSpec::inverse_gamma(2.0), seed);
    const EndpointSpec s = nested_spec({1, 1}, {5, 5}, 3);
    const LogNum a = t_disjoint(g, s).value;
    const LogNum b = ScalarTraits<ExtendedReal>::to_lognum(t_disjoint_as(ScalarGrid<ExtendedReal>(g), s).value);
    EXPECT_NEAR(a.logmag(), b.logmag(), 1e-9);
  }
}
