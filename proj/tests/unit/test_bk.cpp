#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polylab/bk.hpp"
#include "polylab/errors.hpp"
#include "polylab/partition.hpp"

using namespace polylab;

namespace {

const DistributionSpec kLaw = DistributionSpec::inverse_gamma(2.0);

double median_log_t1(int m, int n, Point u, Point v) {
  std::vector<double> s = t1_log_samples(m, n, 2.0, u, v, 2001, 77);
  std::nth_element(s.begin(), s.begin() + 1000, s.end());
  return s[1000];
}

BkOptions mcmc_options() {
  BkOptions opt;
  opt.estimator = LhsEstimator::mcmc;
  opt.chains = 8;
  opt.burn_in = 50;
  opt.ess_floor = 0.0;
  return opt;
}

}  // namespace

TEST(IncreasingEvent, FullSpaceAndEmpty) {
  const auto any = [](int, int) { return 0.0; };
  EXPECT_TRUE(IncreasingEvent::full_space().holds(any));
  EXPECT_FALSE(IncreasingEvent::empty().holds(any));
  const IncreasingEvent e = IncreasingEvent::threshold(2, 1, 0.5);
  EXPECT_FALSE(e.holds(any));
  EXPECT_TRUE(e.holds([](int, int) { return 0.5; }));
}

TEST(IncreasingEvent, RefusesDecreasingConditions) {
  IncreasingEvent e = IncreasingEvent::threshold(2, 1, 0.0);
  e.terms.front().at_least = false;
  EXPECT_THROW(e.require_increasing(), InvalidInput);
  EXPECT_THROW(bk_log_gamma(4, 4, 2.0, e, 1, 100, 2), InvalidInput);
  IncreasingEvent nan = IncreasingEvent::threshold(2, 1, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(nan.require_increasing(), InvalidInput);
}

TEST(IncreasingEvent, IsMonotoneUnderRandomIncreases) {
  Stream rng = Stream::at(5, 0);
  for (int trial = 0; trial < 500; ++trial) {
    IncreasingEvent e;
    e.mode = rng.uniform() < 0.5 ? EventMode::all : EventMode::any;
    const int terms = 1 + static_cast<int>(rng.uniform() * 3);
    for (int t = 0; t < terms; ++t)
      e.terms.push_back({2 + static_cast<int>(rng.uniform() * 3), 1 + static_cast<int>(rng.uniform() * 3),
                         rng.uniform() * 2.0 - 1.0, true});
    std::vector<double> base(16), up(16);
    for (std::size_t k = 0; k < base.size(); ++k) {
      base[k] = rng.uniform() * 2.0 - 1.0;
      up[k] = base[k] + (rng.uniform() < 0.5 ? rng.uniform() : 0.0);
    }
    const auto at = [](const std::vector<double>& v) { return [&v](int p, int q) { return v[p * 4 + q - 5]; }; };
    if (e.holds(at(base))) EXPECT_TRUE(e.holds(at(up)));
  }
}

TEST(BkLogGamma, TrivialEvents) {
  for (const BkOptions& opt : {BkOptions{}, mcmc_options()}) {
    const auto v =
        bk_log_gamma(4, 4, 2.0, {IncreasingEvent::full_space(), IncreasingEvent::empty()}, 3, 400, 4, opt);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_DOUBLE_EQ(v[0].lhs_estimate, 1.0);
    EXPECT_DOUBLE_EQ(v[0].rhs_estimate, 1.0);
    EXPECT_TRUE(v[0].pass);
    EXPECT_DOUBLE_EQ(v[1].lhs_estimate, 0.0);
    EXPECT_DOUBLE_EQ(v[1].rhs_estimate, 0.0);
    EXPECT_TRUE(v[1].pass);
  }
}

TEST(BkLogGamma, PassRuleIsExact) {
  const BkVerdict v = bk_log_gamma(4, 4, 2.0, IncreasingEvent::threshold(3, 2, 0.0), 3, 500, 4);
  EXPECT_DOUBLE_EQ(v.margin, v.lhs_estimate - v.rhs_estimate);
  EXPECT_EQ(v.pass, v.margin <= 3.0 * (v.lhs_se + v.rhs_se));
  EXPECT_EQ(v.estimator, "importance");
}

TEST(BkLogGamma, Errors) {
  EXPECT_THROW(bk_log_gamma(1, 4, 2.0, IncreasingEvent::full_space(), 1, 100, 1), InvalidInput);
  EXPECT_THROW(bk_log_gamma(4, 4, 0.0, IncreasingEvent::full_space(), 1, 100, 1), InvalidInput);
  EXPECT_THROW(bk_log_gamma(4, 4, 2.0, IncreasingEvent::threshold(1, 1, 0.0), 1, 100, 1), InvalidInput);
  EXPECT_THROW(bk_log_gamma(4, 4, 2.0, IncreasingEvent::threshold(2, 4, 0.0), 1, 100, 1), InvalidInput);
  EXPECT_THROW(bk_log_gamma(4, 4, 2.0, IncreasingEvent::threshold(5, 1, 0.0), 1, 100, 1), InvalidInput);
}

TEST(BkLogGamma, RoutesAgreePerReplica) {
  const double c = median_log_t1(4, 3, {2, 1}, {4, 3});
  const IncreasingEvent e{{{3, 3, c, true}, {2, 1, -1.0, true}}, EventMode::any};
  BkOptions dual, primal;
  dual.keep_replicas = primal.keep_replicas = true;
  primal.route = LhsRoute::primal;
  const BkVerdict a = bk_log_gamma(5, 4, 2.0, e, 11, 600, 12, dual);
  const BkVerdict b = bk_log_gamma(5, 4, 2.0, e, 11, 600, 12, primal);
  ASSERT_EQ(a.log_weight.size(), b.log_weight.size());
  for (std::size_t r = 0; r < a.log_weight.size(); ++r)
    EXPECT_NEAR(a.log_weight[r], b.log_weight[r], 1e-9 * (1.0 + std::fabs(a.log_weight[r])));
  EXPECT_EQ(a.lhs_indicator, b.lhs_indicator);
  EXPECT_EQ(a.rhs_indicator, b.rhs_indicator);
}

TEST(BkLogGamma, DeterministicAcrossWorkers) {
  const IncreasingEvent e = IncreasingEvent::threshold(3, 2, 0.0);
  for (BkOptions opt : {BkOptions{}, mcmc_options()}) {
    opt.workers = 1;
    const auto one = to_json(bk_log_gamma(4, 4, 2.0, e, 5, 800, 6, opt)).dump();
    opt.workers = 3;
    EXPECT_EQ(one, to_json(bk_log_gamma(4, 4, 2.0, e, 5, 800, 6, opt)).dump());
  }
}

TEST(BkLogGamma, McmcAgreesWithImportanceSampling) {
  const double c = median_log_t1(3, 3, {1, 1}, {3, 2});
  const IncreasingEvent e = IncreasingEvent::threshold(2, 2, c);
  BkOptions is;
  is.route = LhsRoute::primal;
  BkOptions mc = mcmc_options();
  mc.route = LhsRoute::primal;
  mc.chains = 16;
  const BkVerdict a = bk_log_gamma(4, 4, 2.0, e, 21, 20000, 22, is);
  const BkVerdict b = bk_log_gamma(4, 4, 2.0, e, 21, 20000, 23, mc);
  EXPECT_EQ(b.estimator, "mcmc");
  EXPECT_EQ(b.chains, 16u);
  EXPECT_GT(b.acceptance_rate, 0.0);
  EXPECT_LE(std::fabs(a.lhs_estimate - b.lhs_estimate), 3.5 * std::hypot(a.lhs_se, b.lhs_se))
      << a.lhs_estimate << " +- " << a.lhs_se << " vs " << b.lhs_estimate << " +- " << b.lhs_se;
}

TEST(BkLogGamma, SmallGridsRespectTheInequality) {
  for (std::uint64_t g = 0; g < 4; ++g) {
    const double c = median_log_t1(3, 3, {1, 1}, {3, 3});
    const BkVerdict v = bk_log_gamma(4, 4, 2.0, IncreasingEvent::threshold(2, 3, c), 100 + g, 4000, 200 + g);
    EXPECT_TRUE(v.pass) << "g seed " << 100 + g << ": margin " << v.margin;
  }
}

// The family is f(m)^{-1} T2 = T1((a-1,1),(m-1,b)) on the sub-grid; scaling
// every weight by lambda multiplies it by lambda^(m-a+b), so thresholds
// shifted by the same power give the same indicators.
TEST(BkLogGamma, IndicatorsInvariantUnderJointRescaling) {
  const int m = 5, n = 5;
  const double log_lambda = 0.7;
  const IncreasingEvent e{{{3, 2, 0.4, true}, {4, 4, -0.3, true}}, EventMode::all};
  for (std::uint64_t s = 0; s < 50; ++s) {
    const WeightGrid x = sample_grid(m - 1, n - 1, kLaw, 400 + s);
    std::vector<std::vector<double>> v(n - 1, std::vector<double>(m - 1));
    for (int i = 1; i <= m - 1; ++i)
      for (int j = 1; j <= n - 1; ++j) v[j - 1][i - 1] = x(i, j).to_double() * std::exp(log_lambda);
    const WeightGrid y = explicit_grid(v);
    const auto value = [&](const WeightGrid& grid) {
      return [&grid](int a, int b) { return t1(grid, {a - 1, 1}, {m - 1, b}).logmag(); };
    };
    IncreasingEvent shifted = e;
    for (auto& t : shifted.terms) t.log_threshold += (m - t.p + t.q) * log_lambda;
    EXPECT_EQ(e.holds(value(x)), shifted.holds(value(y)));
  }
}

TEST(BkEndpointVariation, TrivialEventAndRestrictions) {
  const BkVerdict v = bk_endpoint_variation(8, 5, 5, 2.0, IncreasingEvent::full_space(), 1, 200, 2);
  EXPECT_DOUBLE_EQ(v.lhs_estimate, 1.0);
  EXPECT_TRUE(v.pass);
  EXPECT_THROW(bk_endpoint_variation(8, 5, 4, 2.0, IncreasingEvent::full_space(), 1, 200, 2), Unsupported);
  EXPECT_THROW(bk_endpoint_variation(8, 5, 8, 2.0, IncreasingEvent::full_space(), 1, 200, 2), InvalidInput);
  EXPECT_THROW(bk_endpoint_variation(8, 5, 5, 2.0, IncreasingEvent::threshold(6, 6, 0.0), 1, 200, 2),
               InvalidInput);
  EXPECT_THROW(bk_endpoint_variation(8, 5, 5, 2.0, IncreasingEvent::threshold(3, 5, 0.0), 1, 200, 2),
               InvalidInput);
}

// b = m-1 with b' = m: a single fresh column joins the sub-ensemble sums.
TEST(BkEndpointVariation, OneColumnExtensionRoutesAgree) {
  const int m = 6, n = 5, b = 5;
  const IncreasingEvent e{{{2, 6, 3.0, true}, {4, 6, 2.0, true}}, EventMode::any};
  BkOptions dual, primal;
  dual.keep_replicas = primal.keep_replicas = true;
  primal.route = LhsRoute::primal;
  const BkVerdict a = bk_endpoint_variation(m, n, b, 2.0, e, 31, 400, 32, dual);
  const BkVerdict c = bk_endpoint_variation(m, n, b, 2.0, e, 31, 400, 32, primal);
  EXPECT_EQ(a.lhs_indicator, c.lhs_indicator);
  for (std::size_t r = 0; r < a.log_weight.size(); ++r)
    EXPECT_NEAR(a.log_weight[r], c.log_weight[r], 1e-9 * (1.0 + std::fabs(a.log_weight[r])));
  EXPECT_GT(std::count(a.lhs_indicator.begin(), a.lhs_indicator.end(), 1.0), 0);
  EXPECT_GT(std::count(a.lhs_indicator.begin(), a.lhs_indicator.end(), 0.0), 0);
}

TEST(BkEndpointVariation, ThresholdEventPasses) {
  const double c = median_log_t1(6, 4, {1, 1}, {6, 4});
  BkOptions opt;
  opt.route = LhsRoute::primal;
  const BkVerdict v = bk_endpoint_variation(8, 5, 5, 2.0, IncreasingEvent::threshold(2, 7, c), 41, 10000, 42, opt);
  EXPECT_TRUE(v.pass) << v.margin;
}

TEST(MultiPointSpec, Validation) {
  EXPECT_NO_THROW((MultiPointSpec{1, {{{2}, {3}}}}.validate(5, 5)));
  EXPECT_THROW((MultiPointSpec{1, {}}.validate(5, 5)), InvalidInput);
  EXPECT_THROW((MultiPointSpec{1, {{{1}, {3}}}}.validate(5, 5)), InvalidInput);
  EXPECT_THROW((MultiPointSpec{1, {{{2}, {4}}}}.validate(5, 5)), InvalidInput);
  EXPECT_THROW((MultiPointSpec{2, {{{3, 4}, {1, 2}}}}.validate(6, 6)), InvalidInput);
  EXPECT_NO_THROW((MultiPointSpec{2, {{{3, 4}, {3, 2}}}}.validate(6, 6)));
}

TEST(BkMultipoint, OnePaddingPathMatchesLogGamma) {
  const int m = 5, n = 5, a = 3, b = 2;
  const double c = median_log_t1(m - 1, n - 1, {a - 1, 1}, {m - 1, b});
  BkOptions opt;
  opt.keep_replicas = true;
  const BkVerdict lg = bk_log_gamma(m, n, 2.0, IncreasingEvent::threshold(a, b, c), 51, 3000, 52, opt);
  const BkVerdict mp =
      bk_multipoint(m, n, 2.0, MultiPointSpec{1, {{{a}, {b}}}}, IncreasingEvent::threshold(1, 1, c), 51, 3000, 52, opt);
  EXPECT_EQ(lg.lhs_indicator, mp.lhs_indicator);
  for (std::size_t r = 0; r < lg.log_weight.size(); ++r)
    EXPECT_NEAR(lg.log_weight[r], mp.log_weight[r], 1e-9 * (1.0 + std::fabs(lg.log_weight[r])));
  EXPECT_NEAR(lg.lhs_estimate, mp.lhs_estimate, 1e-9);
  EXPECT_LE(std::fabs(lg.rhs_estimate - mp.rhs_estimate), 3.5 * std::hypot(lg.rhs_se, mp.rhs_se));
}

TEST(BkMultipoint, TrivialAndZeroEnds) {
  const MultiPointSpec spec{2, {{{3, 4}, {3, 2}}, {{3, 5}, {2, 0}}}};
  const auto v = bk_multipoint(6, 6, 2.0, spec,
                               {IncreasingEvent::full_space(), IncreasingEvent::threshold(2, 1, -50.0)}, 61, 300, 62);
  EXPECT_DOUBLE_EQ(v[0].lhs_estimate, 1.0);
  EXPECT_TRUE(v[0].pass);
  // A right end at l = 0 makes the family vanish on both sides.
  EXPECT_DOUBLE_EQ(v[1].lhs_estimate, 0.0);
  EXPECT_DOUBLE_EQ(v[1].rhs_estimate, 0.0);
}

// Pilot seed 3 gives importance weights with an effective sample size in
// the thousands; for most pilots at w = 2 it is below 100.
TEST(BkMultipoint, McmcAgreesWithImportanceSampling) {
  const MultiPointSpec spec{2, {{{3}, {1}}}};
  BkOptions is;
  const IncreasingEvent e = IncreasingEvent::threshold(1, 1, -2.0);
  const BkVerdict a = bk_multipoint(4, 4, 2.0, spec, e, 3, 40000, 72, is);
  const BkVerdict b = bk_multipoint(4, 4, 2.0, spec, e, 3, 16000, 73, mcmc_options());
  EXPECT_FALSE(a.inconclusive);
  EXPECT_GT(a.lhs_estimate, 0.1);
  EXPECT_LT(a.lhs_estimate, 0.9);
  EXPECT_LE(std::fabs(a.lhs_estimate - b.lhs_estimate), 3.5 * std::hypot(a.lhs_se, b.lhs_se))
      << a.lhs_estimate << " +- " << a.lhs_se << " vs " << b.lhs_estimate << " +- " << b.lhs_se;
}

TEST(Counterexample, BernoulliCases) {
  const auto a = counterexample_bernoulli(0.5, 0.5);
  EXPECT_DOUBLE_EQ(a.lhs, 1.0);
  EXPECT_DOUBLE_EQ(a.rhs, 0.5);
  EXPECT_TRUE(a.violated);
  const auto b = counterexample_bernoulli(0.9, 0.5);
  EXPECT_DOUBLE_EQ(b.lhs, 1.0);
  EXPECT_NEAR(b.rhs, 0.9, 1e-15);
  EXPECT_TRUE(b.violated);
  const auto c = counterexample_bernoulli(0.5, 0.6);
  EXPECT_DOUBLE_EQ(c.lhs, 0.0);
  EXPECT_FALSE(c.violated);
  EXPECT_THROW(counterexample_bernoulli(0.0, 0.5), InvalidInput);
  EXPECT_THROW(counterexample_bernoulli(0.5, 0.0), InvalidInput);
}

// Violated exactly for t in (0, 1/2], for every p.
TEST(Counterexample, BernoulliViolationRegion) {
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.95})
    for (double t : {0.05, 0.2, 0.5, 0.51, 0.8, 1.0, 1.5}) {
      const auto r = counterexample_bernoulli(p, t);
      EXPECT_EQ(r.violated, t <= 0.5) << p << " " << t;
    }
}

// The conditional ratio on a 2x2 0/1 grid with T1 = 2 is always 1/2.
TEST(Counterexample, BernoulliRatioMatchesBruteForce) {
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<std::vector<double>> v(2, std::vector<double>(2));
    for (int s = 0; s < 4; ++s) v[s / 2][s % 2] = (mask >> s) & 1;
    const WeightGrid grid = explicit_grid(v);
    const double t1v = t1(grid, {1, 1}, {2, 2}).to_double();
    const double t2v = brute_force_disjoint(grid, nested_spec({1, 1}, {2, 2}, 2)).to_double();
    EXPECT_DOUBLE_EQ(t_k_nested(grid, {1, 1}, {2, 2}, 2).value.to_double(), t2v);
    if (std::fabs(t1v - 2.0) < 1e-12) EXPECT_DOUBLE_EQ(t2v / t1v, 0.5);
  }
}

TEST(Counterexample, UniformCases) {
  const auto a = counterexample_uniform(0.1, 0.4, 100000, 1);
  EXPECT_EQ(a.status, "verified");
  EXPECT_DOUBLE_EQ(a.lhs, 1.0);
  EXPECT_NEAR(a.rhs, 0.6, 1e-15);
  EXPECT_TRUE(a.violated);
  EXPECT_GT(a.hits, 0u);
  const auto b = counterexample_uniform(0.4, 0.1, 100000, 2);
  EXPECT_EQ(b.status, "verified");
  EXPECT_DOUBLE_EQ(b.lhs, 1.0);
  EXPECT_NEAR(b.rhs, 0.9, 1e-15);
  EXPECT_TRUE(b.violated);
  const auto c = counterexample_uniform(0.1, 0.45, 1000, 3);
  EXPECT_EQ(c.status, "not_covered");
  EXPECT_TRUE(std::isnan(c.lhs));
  EXPECT_FALSE(c.violated);
  EXPECT_THROW(counterexample_uniform(0.6, 0.1, 10, 1), InvalidInput);
  EXPECT_THROW(counterexample_uniform(0.1, 0.1, 0, 1), InvalidInput);
}

TEST(Reports, JsonAndCsv) {
  BkOptions opt;
  opt.keep_replicas = true;
  const BkVerdict v = bk_log_gamma(3, 3, 2.0, IncreasingEvent::threshold(2, 2, 0.0), 1, 10, 2, opt);
  const auto j = to_json(v);
  EXPECT_EQ(j["experiment"], "bk_log_gamma");
  EXPECT_EQ(j["pass"], v.pass);
  std::ostringstream os;
  write_replica_csv(os, v);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  const auto r = to_json(counterexample_uniform(0.1, 0.45, 10, 1));
  EXPECT_TRUE(r["lhs"].is_null());
}
