#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polylab/lognum.hpp"

namespace polylab {

enum class DistTag { inverse_gamma, bernoulli, uniform01, explicit_values };

struct DistributionSpec {
  DistTag tag = DistTag::inverse_gamma;
  double theta = 2.0;  ///< inverse-gamma shape
  double p = 0.5;      ///< Bernoulli success probability

  static DistributionSpec inverse_gamma(double theta);
  static DistributionSpec bernoulli(double p);
  static DistributionSpec uniform01();
  static DistributionSpec explicit_values();

  /// Throws InvalidInput on out-of-range parameters.
  void validate() const;
  std::string describe() const;
};

/// Immutable m x n field of nonnegative vertex weights, addressed by
/// (i, j) with column i in [1, m] and row j in [1, n].
class WeightGrid {
 public:
  WeightGrid(int m, int n, std::vector<LogNum> weights, DistributionSpec dist, std::uint64_t seed);

  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  const DistributionSpec& dist() const noexcept { return dist_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool contains(int i, int j) const noexcept { return i >= 1 && i <= m_ && j >= 1 && j <= n_; }
  const LogNum& operator()(int i, int j) const noexcept {
    return w_[static_cast<std::size_t>(j - 1) * m_ + (i - 1)];
  }
  bool has_zero() const noexcept;

 private:
  int m_;
  int n_;
  std::vector<LogNum> w_;  // row-major by j
  DistributionSpec dist_;
  std::uint64_t seed_;
};

/// I.i.d. field. The draw at (i, j) comes from its own counter-based stream
/// keyed by (seed, i + di, j + dj), so overlapping windows of the same seed
/// see the same weights.
WeightGrid sample_grid(int m, int n, const DistributionSpec& dist, std::uint64_t seed,
                       long di = 0, long dj = 0);

/// values[j-1][i-1] is the weight at (i, j).
WeightGrid explicit_grid(const std::vector<std::vector<double>>& values);

/// Text format: header "m n", then n rows of m weights, row j = 1 first.
void write_grid(std::ostream& os, const WeightGrid& g);
WeightGrid read_grid(std::istream& is);

/// Seed for replica r of an experiment tagged `tag`.
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t r) noexcept;

}  // namespace polylab
