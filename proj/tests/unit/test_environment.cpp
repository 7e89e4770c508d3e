#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "polylab/environment.hpp"
#include "polylab/errors.hpp"
#include "polylab/partition.hpp"

using namespace polylab;

namespace {

struct Moments {
  double mean, se;
};

Moments single_site_moments(const DistributionSpec& d, int reps, std::uint64_t seed) {
  double s = 0, s2 = 0;
  for (int r = 0; r < reps; ++r) {
    const double x = sample_grid(1, 1, d, replica_seed(seed, 0, r))(1, 1).to_double();
    s += x;
    s2 += x * x;
  }
  const double mean = s / reps;
  const double var = s2 / reps - mean * mean;
  return {mean, std::sqrt(var / reps)};
}

}  // namespace

TEST(Environment, InverseGammaMeanTheta3) {
  const Moments mo = single_site_moments(DistributionSpec::inverse_gamma(3.0), 1'000'000, 17);
  EXPECT_LT(std::fabs(mo.mean - 0.5), 3 * mo.se);
}

TEST(Environment, InverseGammaMeanTheta4) {
  const Moments mo = single_site_moments(DistributionSpec::inverse_gamma(4.0), 1'000'000, 18);
  EXPECT_LT(std::fabs(mo.mean - 1.0 / 3.0), 3 * mo.se);
}

TEST(Environment, InverseGammaSmallShapeMedian) {
  // For theta = 1/2, 1/X ~ Z^2/2 with Z standard normal: P(X > 2) = P(|Z| < 1).
  const DistributionSpec d = DistributionSpec::inverse_gamma(0.5);
  const int reps = 200'000;
  int hits = 0;
  for (int r = 0; r < reps; ++r)
    if (sample_grid(1, 1, d, replica_seed(9, 0, r))(1, 1).to_double() > 2.0) ++hits;
  const double p = 0.682689492137;
  EXPECT_LT(std::fabs(hits / double(reps) - p), 3 * std::sqrt(p * (1 - p) / reps));
}

TEST(Environment, BernoulliFrequency) {
  const double p = 0.3;
  const int reps = 200'000;
  int ones = 0;
  for (int r = 0; r < reps; ++r) {
    const WeightGrid g = sample_grid(2, 2, DistributionSpec::bernoulli(p), replica_seed(4, 0, r));
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j <= 2; ++j) {
        const double x = g(i, j).to_double();
        ASSERT_TRUE(x == 0.0 || x == 1.0);
        if (i == 1 && j == 1) ones += x == 1.0;
      }
  }
  EXPECT_LT(std::fabs(ones / double(reps) - p), 3 * std::sqrt(p * (1 - p) / reps));
}

TEST(Environment, SeedDeterminism) {
  const auto d = DistributionSpec::inverse_gamma(2.0);
  const WeightGrid a = sample_grid(5, 4, d, 99), b = sample_grid(5, 4, d, 99), c = sample_grid(5, 4, d, 100);
  bool differs = false;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 4; ++j) {
      EXPECT_EQ(a(i, j), b(i, j));
      differs |= !(a(i, j) == c(i, j));
    }
  EXPECT_TRUE(differs);
}

TEST(Environment, OffsetWindowsShareWeights) {
  const auto d = DistributionSpec::inverse_gamma(2.0);
  const WeightGrid big = sample_grid(6, 6, d, 5);
  const WeightGrid win = sample_grid(3, 2, d, 5, 2, 3);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 2; ++j) EXPECT_EQ(win(i, j), big(i + 2, j + 3));
}

TEST(Environment, RejectsBadParameters) {
  EXPECT_THROW(DistributionSpec::inverse_gamma(0.0), InvalidInput);
  EXPECT_THROW(DistributionSpec::bernoulli(1.0), InvalidInput);
  EXPECT_THROW(explicit_grid({{1.0, -1.0}}), InvalidInput);
  EXPECT_THROW(sample_grid(0, 2, DistributionSpec::uniform01(), 1), InvalidInput);
}

TEST(Environment, ExplicitGrid) {
  const WeightGrid g = explicit_grid({{1, 1}, {1, 1}});
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) EXPECT_EQ(g(i, j).to_double(), 1.0);
  const WeightGrid one = explicit_grid({{2.5}});
  EXPECT_DOUBLE_EQ(t1(one, {1, 1}, {1, 1}).to_double(), 2.5);
  const WeightGrid ones = explicit_grid(std::vector<std::vector<double>>(3, std::vector<double>(3, 1.0)));
  EXPECT_NEAR(t1(ones, {1, 1}, {3, 3}).to_double(), 6.0, 1e-12);
}

TEST(Environment, TextRoundTrip) {
  const WeightGrid g = sample_grid(4, 3, DistributionSpec::uniform01(), 42);
  std::stringstream ss;
  write_grid(ss, g);
  const WeightGrid h = read_grid(ss);
  ASSERT_EQ(h.m(), 4);
  ASSERT_EQ(h.n(), 3);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 3; ++j) EXPECT_DOUBLE_EQ(h(i, j).to_double(), g(i, j).to_double());
  std::stringstream bad("2 2\n1 1\n1");
  EXPECT_THROW(read_grid(bad), InvalidInput);
}
