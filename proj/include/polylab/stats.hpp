#pragma once

#include <cstddef>
#include <vector>

namespace polylab {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and its standard error for independent draws.
MeanSe mean_se(const std::vector<double>& x);

/// Mean with a batch-means standard error, for correlated chains.
MeanSe batch_means(const std::vector<double>& x, std::size_t batches = 50);

/// Self-normalized importance-sampling estimate sum(w phi) / sum(w) from log
/// weights, with the delta-method standard error and the effective sample
/// size (sum w)^2 / sum w^2.
struct WeightedEstimate {
  double value = 0.0;
  double se = 0.0;
  double ess = 0.0;
};
WeightedEstimate self_normalized(const std::vector<double>& log_w, const std::vector<double>& phi);

/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::vector<double> x, double q);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic p-value of the two-sample KS statistic.
double ks_pvalue(double d, std::size_t na, std::size_t nb);

double lag1_autocorrelation(const std::vector<double>& x);

}  // namespace polylab
