#include <gtest/gtest.h>

#include <cmath>

#include "polylab/errors.hpp"
#include "polylab/identities.hpp"
#include "polylab/rng.hpp"

using namespace polylab;

namespace {

WeightGrid ones(int m, int n) {
  return explicit_grid(std::vector<std::vector<double>>(n, std::vector<double>(m, 1.0)));
}

WeightGrid igrid(int m, int n, std::uint64_t seed, double theta = 2.0) {
  return sample_grid(m, n, DistributionSpec::inverse_gamma(theta), seed);
}

void expect_pass(const IdentityReport& r, double tol = 1e-9) {
  EXPECT_TRUE(r.passed()) << r.name << ": " << r.failure_count << " failures, first "
                          << (r.failures.empty() ? "" : r.failures[0].inputs);
  EXPECT_LT(r.max_residual, tol);
}

double t1d(const WeightGrid& g, Point u, Point v) { return t1(g, u, v).to_double(); }

double det2(double a, double b, double c, double d) { return a * d - b * c; }

}  // namespace

TEST(CheckLgv, AllOnesPair) {
  const WeightGrid g = ones(3, 3);
  const EndpointSpec spec{{{1, 1}, {2, 1}}, {{3, 3}, {3, 2}}};
  const IdentityReport r = check_lgv(g, spec);
  expect_pass(r, 1e-10);
  EXPECT_EQ(r.cases, 1u);
  EXPECT_NEAR(t_disjoint(g, spec).value.to_double(), 3.0, 1e-12);
}

TEST(CheckLgv, ImpossibleEndpointsAgreeOnZero) {
  const WeightGrid g = igrid(3, 3, 4);
  const IdentityReport r = check_lgv(g, EndpointSpec{{{2, 1}, {3, 1}}, {{2, 2}, {2, 1}}});
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.zero_agreements, 1u);
}

TEST(CheckLgv, RandomFourByFour) {
  IdentityReport total;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const WeightGrid g = igrid(4, 4, 100 + s);
    for (int k = 1; k <= 3; ++k) {
      const EndpointSpec spec = random_endpoint_spec(4, 4, k, hash_combine(s, k));
      if (!spec.starts.empty()) total.merge(check_lgv(g, spec));
    }
  }
  EXPECT_GT(total.cases, 1000u);
  expect_pass(total);
}

TEST(ExtendedInvariance, SinglePathTopEnd) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const WeightGrid g = igrid(5, 4, s);
    for (int a = 1; a <= 5; ++a)
      for (int b = 1; b <= 5; ++b) expect_pass(check_extended_invariance(g, 1, 1, {a}, {b}));
  }
}

TEST(ExtendedInvariance, SinglePathRightEnd) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const WeightGrid g = igrid(5, 4, 50 + s);
    for (int a = 1; a <= 5; ++a)
      for (int b = 1; b <= 3; ++b) expect_pass(check_extended_invariance(g, 1, 0, {a}, {b}));
  }
}

TEST(ExtendedInvariance, MixedPairOnSixByFour) {
  const WeightGrid g = igrid(6, 4, 9);
  int checked = 0;
  for (int a1 = 1; a1 <= 6; ++a1)
    for (int a2 = a1 + 1; a2 <= 6; ++a2)
      for (int top = 1; top <= 6; ++top)
        for (int right = 1; right <= 3; ++right) {
          expect_pass(check_extended_invariance(g, 2, 1, {a1, a2}, {top, right}));
          ++checked;
        }
  EXPECT_EQ(checked, 15 * 6 * 3);
}

TEST(ExtendedInvariance, RejectsBadOrdering) {
  const WeightGrid g = igrid(5, 4, 1);
  EXPECT_THROW(check_extended_invariance(g, 2, 0, {3, 2}, {2, 1}), InvalidInput);
  EXPECT_THROW(check_extended_invariance(g, 2, 0, {1, 2}, {1, 2}), InvalidInput);
  EXPECT_THROW(check_extended_invariance(g, 2, 2, {1, 2}, {3, 3}), InvalidInput);
  EXPECT_THROW(check_extended_invariance(g, 1, 0, {1}, {4}), InvalidInput);
}

TEST(ExtendedInvariance, GeneratedCasesAreValidAndExhaustive) {
  const auto cases = extended_invariance_cases(4, 3, 3);
  const WeightGrid g = igrid(4, 3, 2);
  for (const auto& c : cases) EXPECT_NO_THROW(check_extended_invariance(g, c.k, c.ell, c.a, c.b));
  // k = 1: 4 starts x (4 top ends + 2 right ends).
  std::size_t single = 0;
  for (const auto& c : cases) single += c.k == 1;
  EXPECT_EQ(single, 4u * 6u);
}

TEST(ExtendedInvariance, ExhaustiveOnRandomGrids) {
  for (std::uint64_t s = 0; s < 5; ++s) expect_pass(check_extended_invariance_all(igrid(5, 4, 200 + s, 0.5), 5));
}

TEST(CrossLine, TwoByTwoRearrangement) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int m = 5, n = 4;
    const WeightGrid g = igrid(m, n, 300 + s);
    for (int b = 1; b <= n; ++b) {
      // Expand every T as a determinant of single-path values.
      const double tmn = t1d(g, {1, 1}, {m, n});
      const double t2 = det2(tmn, t1d(g, {1, 1}, {m, n - 1}), t1d(g, {2, 1}, {m, n}), t1d(g, {2, 1}, {m, n - 1}));
      double rhs = t1d(g, {2, 1}, {m, n}) * t1d(g, {1, 1}, {m, b}) / tmn;
      if (b <= n - 1) {
        // The k = 2 numerator's first factor is T_2 itself.
        const double y = det2(tmn, t1d(g, {1, 1}, {m, b}), t1d(g, {2, 1}, {m, n}), t1d(g, {2, 1}, {m, b}));
        rhs += t2 * y / (t2 * tmn);
      }
      EXPECT_NEAR(std::log(rhs), std::log(t1d(g, {2, 1}, {m, b})), 1e-9);
      expect_pass(check_cross_line(g, 2, b));
    }
  }
}

TEST(CrossLine, SingleTermWhenAIsOne) {
  const WeightGrid g = igrid(5, 4, 7);
  for (int b = 1; b <= 4; ++b) {
    const IdentityReport r = check_cross_line(g, 1, b);
    expect_pass(r);
    EXPECT_EQ(r.cases, 1u);
  }
}

TEST(CrossLine, AllEndpointsOnRandomGrids) {
  for (std::uint64_t s = 0; s < 20; ++s) expect_pass(check_cross_line_all(igrid(5, 4, 400 + s)));
}

TEST(CrossLine, RejectsBadIndices) {
  const WeightGrid g = igrid(5, 4, 7);
  EXPECT_THROW(check_cross_line(g, 0, 1), InvalidInput);
  EXPECT_THROW(check_cross_line(g, 1, 5), InvalidInput);
}

TEST(CorollaryRatio, Corner) {
  const WeightGrid g = igrid(5, 4, 11);
  const IdentityReport r = check_corollary_ratio(g, 5, 4);
  expect_pass(r);
  EXPECT_EQ(r.cases, 1u);
}

TEST(CorollaryRatio, AllOnesSubEnsemble) {
  const WeightGrid g = ones(3, 3);
  const IdentityReport r = check_corollary_ratio(g, 2, 2);
  expect_pass(r);
  EXPECT_EQ(r.cases, 2u);
  // T([(1,1),(2,1)],[(3,3),(3,2)]) / T1((1,1),(3,3)) = 3 / 6.
  const LineEnsemble sub = virtual_sub_ensemble(build_ensemble(g));
  EXPECT_NEAR(f_function(sub, 1, 2).to_double(), 0.5, 1e-12);
}

TEST(CorollaryRatio, RandomGrids) {
  for (std::uint64_t s = 0; s < 50; ++s) expect_pass(check_corollary_all(igrid(5, 4, 500 + s, 8.0)));
}

TEST(MultipointRatio, ReducesToCorollary) {
  const WeightGrid g = igrid(5, 4, 13);
  for (int a = 2; a <= 5; ++a)
    for (int ell = 1; ell <= 2; ++ell) {
      expect_pass(check_multipoint_ratio(g, 1, {a}, {ell}));
      expect_pass(check_corollary_ratio(g, a, ell));
    }
}

TEST(MultipointRatio, TwoPaddingPathsOnSevenByFive) {
  const WeightGrid g = igrid(7, 5, 17);
  for (int a = 3; a <= 7; ++a)
    for (int ell = 1; ell <= 2; ++ell) expect_pass(check_multipoint_ratio(g, 2, {a}, {ell}));
}

TEST(MultipointRatio, ZeroRightEndIsStructurallyZero) {
  const WeightGrid g = igrid(6, 5, 19);
  const IdentityReport r = check_multipoint_ratio(g, 1, {3, 5}, {2, 0});
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.zero_agreements, 1u);
}

TEST(MultipointRatio, RejectsTuplesOutsideDomain) {
  const WeightGrid g = igrid(6, 5, 19);
  EXPECT_THROW(check_multipoint_ratio(g, 1, {1}, {1}), InvalidInput);
  EXPECT_THROW(check_multipoint_ratio(g, 1, {3}, {4}), InvalidInput);
  EXPECT_THROW(check_multipoint_ratio(g, 1, {3, 2}, {2, 1}), InvalidInput);
  EXPECT_THROW(check_multipoint_ratio(g, 5, {6}, {0}), InvalidInput);
}

TEST(MultipointRatio, GeneratedCasesLieInDomain) {
  for (int w = 1; w <= 3; ++w)
    for (const auto& c : multipoint_cases(6, 5, w, 3)) EXPECT_TRUE(in_multipoint_domain(6, 5, c));
  EXPECT_EQ(multipoint_cases(4, 4, 1, 1).size(), 3u * 3u);
}

TEST(MultipointRatio, ExhaustiveOnRandomGrid) {
  expect_pass(check_multipoint_all(igrid(6, 5, 23), 3, 3));
}

TEST(Adversarial, GridsSpanTwelveDecades) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const WeightGrid g = adversarial_grid(5, 4, s);
    for (int j = 1; j <= 4; ++j)
      for (int i = 1; i <= 5; ++i) {
        EXPECT_GE(g(i, j).logmag(), std::log(1e-6) - 1e-9);
        EXPECT_LE(g(i, j).logmag(), std::log(1e6) + 1e-9);
      }
  }
}

TEST(Adversarial, IdentitiesHoldWithEscalation) {
  IdentityReport total;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const WeightGrid g = adversarial_grid(6, 5, s);
    total.merge(check_extended_invariance_all(g, 5));
    total.merge(check_cross_line_all(g));
    total.merge(check_corollary_all(g));
    total.merge(check_multipoint_all(g, 2, 3));
  }
  expect_pass(total, 1e-8);
  EXPECT_GT(total.extended_reruns, 0u);
}

TEST(Precision, ModesAgreeOnBenignGrid) {
  const WeightGrid g = igrid(5, 4, 29, 8.0);
  IdentityOptions std_opt, ext_opt;
  std_opt.precision = Precision::standard;
  ext_opt.precision = Precision::extended;
  const IdentityReport a = check_extended_invariance_all(g, 4, std_opt);
  const IdentityReport b = check_extended_invariance_all(g, 4, ext_opt);
  const IdentityReport c = check_extended_invariance_all(g, 4);
  expect_pass(a);
  expect_pass(b);
  expect_pass(c);
  EXPECT_EQ(a.cases, b.cases);
  EXPECT_EQ(a.zero_agreements, b.zero_agreements);
  EXPECT_EQ(b.zero_agreements, c.zero_agreements);
  EXPECT_EQ(b.extended_reruns, 0u);
}

TEST(Suites, DeterministicAcrossWorkerCounts) {
  SuiteConfig one, three;
  three.workers = 3;
  const IdentityReport a = run_ratio_suite(10, one);
  const IdentityReport b = run_ratio_suite(10, three);
  EXPECT_EQ(a.cases, b.cases);
  EXPECT_EQ(a.zero_agreements, b.zero_agreements);
  EXPECT_EQ(a.extended_reruns, b.extended_reruns);
  EXPECT_EQ(a.max_residual, b.max_residual);
  expect_pass(a, 1e-8);
}

TEST(Suites, ZeroWeightsUnsupported) {
  EXPECT_THROW(check_cross_line_all(explicit_grid({{1.0, 0.0}, {1.0, 1.0}})), Unsupported);
}
