#include "polylab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polylab {

MeanSe mean_se(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean_se: empty sample");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(x.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

MeanSe batch_means(const std::vector<double>& x, std::size_t batches) {
  if (x.empty()) throw std::invalid_argument("batch_means: empty sample");
  batches = std::max<std::size_t>(2, std::min(batches, x.size()));
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += x[i];
    means.push_back(s / static_cast<double>(len));
  }
  MeanSe out = mean_se(means);
  double total = 0.0;
  for (double v : x) total += v;
  out.mean = total / static_cast<double>(x.size());
  return out;
}

WeightedEstimate self_normalized(const std::vector<double>& log_w, const std::vector<double>& phi) {
  if (log_w.size() != phi.size() || log_w.empty()) throw std::invalid_argument("self_normalized: size mismatch");
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw std::invalid_argument("self_normalized: no finite weight");
  double sw = 0.0, sw2 = 0.0, swp = 0.0;
  std::vector<double> w(log_w.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    w[r] = std::exp(log_w[r] - top);
    sw += w[r];
    sw2 += w[r] * w[r];
    swp += w[r] * phi[r];
  }
  WeightedEstimate out;
  out.value = swp / sw;
  double var = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    const double d = w[r] / sw * (phi[r] - out.value);
    var += d * d;
  }
  out.se = std::sqrt(var);
  out.ess = sw * sw / sw2;
  return out;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, std::size_t na, std::size_t nb) {
  const double ne = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  if (lambda < 1e-3) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double lag1_autocorrelation(const std::vector<double>& x) {
  if (x.size() < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace polylab
