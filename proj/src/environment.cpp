#include "polylab/environment.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "polylab/errors.hpp"
#include "polylab/rng.hpp"

namespace polylab {

DistributionSpec DistributionSpec::inverse_gamma(double theta) {
  DistributionSpec d;
  d.tag = DistTag::inverse_gamma;
  d.theta = theta;
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::bernoulli(double p) {
  DistributionSpec d;
  d.tag = DistTag::bernoulli;
  d.p = p;
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::uniform01() {
  DistributionSpec d;
  d.tag = DistTag::uniform01;
  return d;
}

DistributionSpec DistributionSpec::explicit_values() {
  DistributionSpec d;
  d.tag = DistTag::explicit_values;
  return d;
}

void DistributionSpec::validate() const {
  if (tag == DistTag::inverse_gamma && !(theta > 0.0))
    throw InvalidInput("inverse-gamma parameter must be positive, got " + std::to_string(theta));
  if (tag == DistTag::bernoulli && !(p > 0.0 && p < 1.0))
    throw InvalidInput("bernoulli parameter must lie in (0,1), got " + std::to_string(p));
}

std::string DistributionSpec::describe() const {
  std::ostringstream os;
  switch (tag) {
    case DistTag::inverse_gamma: os << "inverse-gamma(" << theta << ")"; break;
    case DistTag::bernoulli: os << "bernoulli(" << p << ")"; break;
    case DistTag::uniform01: os << "uniform01"; break;
    case DistTag::explicit_values: os << "explicit"; break;
  }
  return os.str();
}

WeightGrid::WeightGrid(int m, int n, std::vector<LogNum> weights, DistributionSpec dist,
                       std::uint64_t seed)
    : m_(m), n_(n), w_(std::move(weights)), dist_(dist), seed_(seed) {
  if (m < 1 || n < 1) throw InvalidInput("grid dimensions must be positive");
  if (w_.size() != static_cast<std::size_t>(m) * n) throw InvalidInput("grid size mismatch");
  for (const auto& x : w_) {
    if (x.sign() < 0) throw InvalidInput("negative weight");
  }
}

bool WeightGrid::has_zero() const noexcept {
  for (const auto& x : w_) {
    if (x.is_zero()) return true;
  }
  return false;
}

WeightGrid sample_grid(int m, int n, const DistributionSpec& dist, std::uint64_t seed, long di,
                       long dj) {
  if (m < 1 || n < 1) throw InvalidInput("grid dimensions must be positive");
  dist.validate();
  if (dist.tag == DistTag::explicit_values) throw InvalidInput("explicit grids are not sampled");
  std::vector<LogNum> w(static_cast<std::size_t>(m) * n);
  for (int j = 1; j <= n; ++j) {
    for (int i = 1; i <= m; ++i) {
      Stream s = Stream::at(seed, static_cast<std::uint64_t>(i + di), static_cast<std::uint64_t>(j + dj));
      LogNum x;
      switch (dist.tag) {
        case DistTag::inverse_gamma: x = LogNum::from_log(-std::log(s.gamma(dist.theta))); break;
        case DistTag::bernoulli: x = s.bernoulli(dist.p) ? LogNum::one() : LogNum::zero(); break;
        case DistTag::uniform01: x = LogNum::from_log(std::log(s.uniform())); break;
        case DistTag::explicit_values: break;
      }
      w[static_cast<std::size_t>(j - 1) * m + (i - 1)] = x;
    }
  }
  return WeightGrid(m, n, std::move(w), dist, seed);
}

WeightGrid explicit_grid(const std::vector<std::vector<double>>& values) {
  if (values.empty() || values.front().empty()) throw InvalidInput("explicit grid must be non-empty");
  const int n = static_cast<int>(values.size());
  const int m = static_cast<int>(values.front().size());
  std::vector<LogNum> w;
  w.reserve(static_cast<std::size_t>(m) * n);
  for (const auto& row : values) {
    if (static_cast<int>(row.size()) != m) throw InvalidInput("ragged explicit grid");
    for (double x : row) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("explicit weights must be finite and >= 0");
      w.push_back(LogNum::from_double(x));
    }
  }
  return WeightGrid(m, n, std::move(w), DistributionSpec::explicit_values(), 0);
}

void write_grid(std::ostream& os, const WeightGrid& g) {
  os << g.m() << ' ' << g.n() << '\n' << std::setprecision(17);
  for (int j = 1; j <= g.n(); ++j) {
    for (int i = 1; i <= g.m(); ++i) os << (i > 1 ? " " : "") << g(i, j).to_double();
    os << '\n';
  }
}

WeightGrid read_grid(std::istream& is) {
  int m = 0, n = 0;
  if (!(is >> m >> n) || m < 1 || n < 1) throw InvalidInput("grid header must be 'm n' with m, n >= 1");
  std::vector<std::vector<double>> v(n, std::vector<double>(m));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      if (!(is >> v[j][i])) {
        throw InvalidInput("grid body: expected " + std::to_string(m * n) + " weights, row " +
                           std::to_string(j + 1) + " is short");
      }
    }
  }
  return explicit_grid(v);
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t r) noexcept {
  return hash_combine(hash_combine(mix64(seed), tag), r);
}

}  // namespace polylab
