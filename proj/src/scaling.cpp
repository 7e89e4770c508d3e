#include "polylab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "polylab/errors.hpp"
#include "polylab/parallel.hpp"
#include "polylab/partition.hpp"
#include "polylab/stats.hpp"

namespace polylab {

namespace {

constexpr std::uint64_t kFieldTag = 0x71;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kAligned = 1e-9;

/// A lattice column with its interpolation weight.
struct Corner {
  long col;
  double weight;
};

std::vector<Corner> corners(double v) {
  const double r = std::round(v);
  if (std::fabs(v - r) < kAligned) return {{static_cast<long>(r), 1.0}};
  const double lo = std::floor(v);
  return {{static_cast<long>(lo), 1.0 - (v - lo)}, {static_cast<long>(lo) + 1, v - lo}};
}

long lattice_row(int n, double time, const char* what) {
  const double v = n * time;
  const double r = std::round(v);
  if (!std::isfinite(v) || std::fabs(v - r) > kAligned)
    throw InvalidInput(std::string(what) + ": n times the time coordinate must be an integer");
  return static_cast<long>(r);
}

double sqrt_n(int n) { return std::sqrt(static_cast<double>(n)); }
double col_of(int n, long row, double x) { return static_cast<double>(row) + 2.0 * sqrt_n(n) * x; }

void check_span(const RescaledFieldSpec& spec, double s, double t, double dx, const char* what) {
  if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(dx) || !(s < t))
    throw InvalidInput(std::string(what) + ": need finite coordinates with s < t");
  if (spec.n * (t - s) > spec.budget || 2.0 * sqrt_n(spec.n) * std::fabs(dx) > spec.budget)
    throw BudgetExceeded(std::string(what) + ": query exceeds the lattice budget " + std::to_string(spec.budget));
}

/// The weights of one replica on a lattice rectangle, with grid index
/// (col - c0 + 1, row - r0 + 1).
struct Window {
  long c0, r0;
  WeightGrid grid;
  std::map<std::pair<long, long>, Table<LogNum>> forward;

  Point at(long col, long row) const {
    return {static_cast<int>(col - c0 + 1), static_cast<int>(row - r0 + 1)};
  }
  /// T1 between two lattice points; zero unless ordered.
  LogNum t1_between(long c1, long r1, long c2, long r2) {
    if (c2 < c1 || r2 < r1) return LogNum::zero();
    auto it = forward.find({c1, r1});
    if (it == forward.end()) it = forward.emplace(std::pair{c1, r1}, t1_forward(ScalarGrid<LogNum>(grid), at(c1, r1))).first;
    const Point e = at(c2, r2);
    return it->second(e.i, e.j);
  }
};

struct Bounds {
  long cmin = std::numeric_limits<long>::max(), cmax = std::numeric_limits<long>::min();
  long rmin = std::numeric_limits<long>::max(), rmax = std::numeric_limits<long>::min();
  void add(long c, long r) {
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
};

Window make_window(const RescaledFieldSpec& spec, const Bounds& b, std::size_t r) {
  const long m = b.cmax - b.cmin + 1, n = b.rmax - b.rmin + 1;
  if (m * n > 64L * 1024 * 1024) throw BudgetExceeded("rescaled field: lattice window too large");
  if (spec.unit_weights)
    return {b.cmin, b.rmin, explicit_grid(std::vector<std::vector<double>>(n, std::vector<double>(m, 1.0))), {}};
  return {b.cmin, b.rmin,
          sample_grid(static_cast<int>(m), static_cast<int>(n), DistributionSpec::inverse_gamma(spec.theta()),
                      replica_seed(spec.seed, kFieldTag, r), b.cmin - 1, b.rmin - 1),
          {}};
}

double log_of(const LogNum& x) { return x.sign() > 0 ? x.logmag() : kNegInf; }

struct ZPlan {
  long r1, r2;
  std::vector<Corner> c1, c2;
};

struct K2Plan {
  long q, qt;
  std::vector<Corner> p1, p2, e1, e2;
};

/// Two-path value from cached single-path tables, redone in extended
/// precision when the 2 x 2 determinant cancels.
LogNum two_path(Window& w, long p1, long p2, long q, long e1, long e2, long qt, bool& unresolved) {
  if (p1 >= p2 || e1 > e2) return LogNum::zero();
  SquareMatrix<LogNum> mat(2);
  mat(0, 0) = w.t1_between(p1, q, e1, qt);
  mat(0, 1) = w.t1_between(p1, q, e2, qt - 1);
  mat(1, 0) = w.t1_between(p2, q, e1, qt);
  mat(1, 1) = w.t1_between(p2, q, e2, qt - 1);
  const DetResult d = signed_log_det(mat);
  if (!d.degenerate && d.rel_error <= 1e-8) return d.value;
  const EndpointSpec es{{w.at(p1, q), w.at(p2, q)}, {w.at(e1, qt), w.at(e2, qt - 1)}};
  const auto deep = t_disjoint_as(ScalarGrid<ExtendedReal>(w.grid), es);
  if (deep.degenerate || deep.rel_error > 1e-8) unresolved = true;
  return ScalarTraits<ExtendedReal>::to_lognum(deep.value);
}

}  // namespace

double RescaledFieldSpec::theta() const { return 2.0 * sqrt_n(n); }

void RescaledFieldSpec::validate() const {
  if (n < 1) throw InvalidInput("rescaled field: n must be positive");
  if (replicas < 1) throw InvalidInput("rescaled field: need at least one replica");
  if (!(budget > 0.0)) throw InvalidInput("rescaled field: budget must be positive");
}

double z_n_log_factor(int n, long steps) {
  return 0.5 * std::log(static_cast<double>(n)) + static_cast<double>(steps) * std::log(0.5 * (2.0 * sqrt_n(n) - 1.0));
}

double k2_n_log_factor(int n, long steps) {
  return std::log(static_cast<double>(n)) + static_cast<double>(steps) * std::log(0.5 * (2.0 * sqrt_n(n) - 1.0));
}

FieldSamples sample_z_n(const RescaledFieldSpec& spec) {
  spec.validate();
  if (spec.region.empty()) throw InvalidInput("sample_z_n: empty region");
  std::vector<ZPlan> plans;
  Bounds bounds;
  for (const auto& q : spec.region) {
    check_span(spec, q.s, q.t, q.y - q.x, "sample_z_n");
    ZPlan p;
    p.r1 = lattice_row(spec.n, q.s, "sample_z_n");
    p.r2 = lattice_row(spec.n, q.t, "sample_z_n");
    p.c1 = corners(col_of(spec.n, p.r1, q.x));
    p.c2 = corners(col_of(spec.n, p.r2, q.y));
    for (const auto& c : p.c1) bounds.add(c.col, p.r1);
    for (const auto& c : p.c2) bounds.add(c.col, p.r2);
    plans.push_back(std::move(p));
  }
  FieldSamples out;
  out.n = spec.n;
  out.log_values.assign(plans.size(), std::vector<double>(spec.replicas));
  out.degenerate.assign(plans.size(), 0);
  parallel_for(spec.replicas, spec.workers, [&](std::size_t r) {
    Window w = make_window(spec, bounds, r);
    for (std::size_t k = 0; k < plans.size(); ++k) {
      const ZPlan& p = plans[k];
      LogNum total = LogNum::zero();
      for (const auto& a : p.c1)
        for (const auto& b : p.c2) {
          const LogNum z = w.t1_between(a.col, p.r1, b.col, p.r2);
          if (z.is_zero()) continue;
          const long steps = (b.col - a.col) + (p.r2 - p.r1);
          total += LogNum::from_log(z.logmag() + z_n_log_factor(spec.n, steps) + std::log(a.weight * b.weight));
        }
      out.log_values[k][r] = log_of(total);
    }
  });
  return out;
}

FieldSamples sample_k2_n(const RescaledFieldSpec& spec, const std::vector<K2Query>& queries) {
  spec.validate();
  if (queries.empty()) throw InvalidInput("sample_k2_n: no queries");
  std::vector<K2Plan> plans;
  Bounds bounds;
  for (const auto& q : queries) {
    if (!(q.x1 <= q.x2) || !(q.y1 <= q.y2)) throw InvalidInput("sample_k2_n: need x1 <= x2 and y1 <= y2");
    check_span(spec, q.s, q.t, std::max(std::fabs(q.y1 - q.x1), std::fabs(q.y2 - q.x2)), "sample_k2_n");
    K2Plan p;
    p.q = lattice_row(spec.n, q.s, "sample_k2_n");
    p.qt = lattice_row(spec.n, q.t, "sample_k2_n");
    if (p.qt < p.q + 1) throw InvalidInput("sample_k2_n: need t >= s + 1/n");
    p.p1 = corners(col_of(spec.n, p.q, q.x1));
    p.p2 = corners(col_of(spec.n, p.q, q.x2));
    p.e1 = corners(col_of(spec.n, p.qt, q.y1));
    p.e2 = corners(col_of(spec.n, p.qt, q.y2));
    for (const auto* cs : {&p.p1, &p.p2})
      for (const auto& c : *cs) bounds.add(c.col, p.q);
    for (const auto* cs : {&p.e1, &p.e2})
      for (const auto& c : *cs) bounds.add(c.col, p.qt);
    plans.push_back(std::move(p));
  }
  FieldSamples out;
  out.n = spec.n;
  out.log_values.assign(plans.size(), std::vector<double>(spec.replicas));
  std::vector<std::vector<char>> flagged(plans.size(), std::vector<char>(spec.replicas, 0));
  parallel_for(spec.replicas, spec.workers, [&](std::size_t r) {
    Window w = make_window(spec, bounds, r);
    for (std::size_t k = 0; k < plans.size(); ++k) {
      const K2Plan& p = plans[k];
      LogNum total = LogNum::zero();
      bool unresolved = false;
      for (const auto& a1 : p.p1)
        for (const auto& a2 : p.p2)
          for (const auto& b1 : p.e1)
            for (const auto& b2 : p.e2) {
              const LogNum v = two_path(w, a1.col, a2.col, p.q, b1.col, b2.col, p.qt, unresolved);
              if (v.sign() <= 0) continue;
              const long steps = (b1.col - a1.col) + (b2.col - a2.col) + 2 * (p.qt - p.q) - 1;
              total += LogNum::from_log(v.logmag() + k2_n_log_factor(spec.n, steps) +
                                        std::log(a1.weight * a2.weight * b1.weight * b2.weight));
            }
      out.log_values[k][r] = log_of(total);
      flagged[k][r] = unresolved;
    }
  });
  out.degenerate.assign(plans.size(), 0);
  for (std::size_t k = 0; k < plans.size(); ++k)
    out.degenerate[k] = static_cast<std::size_t>(std::count(flagged[k].begin(), flagged[k].end(), 1));
  return out;
}

FieldSamples sample_k2_n(const RescaledFieldSpec& spec, const K2Query& query) {
  return sample_k2_n(spec, std::vector<K2Query>{query});
}

ConvergenceReport convergence_diagnostic(const std::vector<RescaledFieldSpec>& levels) {
  if (levels.size() < 2) throw InvalidInput("convergence_diagnostic: need at least two levels of n");
  const std::size_t points = levels.front().region.size();
  for (const auto& l : levels) {
    if (l.replicas < 1000) throw InvalidInput("convergence_diagnostic: need at least 1000 replicas per level");
    if (l.region.size() != points) throw InvalidInput("convergence_diagnostic: levels must share one region");
  }
  ConvergenceReport rep;
  std::vector<std::vector<std::vector<double>>> finite;
  for (const auto& l : levels) {
    const FieldSamples s = sample_z_n(l);
    LevelSummary sum;
    sum.n = l.n;
    auto& f = finite.emplace_back();
    for (const auto& v : s.log_values) {
      std::vector<double> x;
      std::copy_if(v.begin(), v.end(), std::back_inserter(x), [](double u) { return std::isfinite(u); });
      if (x.size() < 2) throw EstimationFailure("convergence_diagnostic: too few positive samples");
      const MeanSe ms = mean_se(x);
      sum.mean.push_back(ms.mean);
      sum.variance.push_back(ms.se * ms.se * static_cast<double>(x.size()));
      std::vector<double> q;
      for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) q.push_back(quantile(x, p));
      sum.quantiles.push_back(std::move(q));
      f.push_back(std::move(x));
    }
    rep.levels.push_back(std::move(sum));
  }
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    std::vector<double> row;
    for (std::size_t p = 0; p < points; ++p) row.push_back(ks_statistic(finite[k][p], finite[k + 1][p]));
    rep.ks.push_back(std::move(row));
  }
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double shift = std::log(2.0 * sqrt_n(levels[k + 1].n) - 1.0) - std::log(2.0 * sqrt_n(levels[k].n) - 1.0);
    std::vector<double> row;
    for (std::size_t p = 0; p < points; ++p) {
      std::vector<double> b = finite[k + 1][p];
      for (double& v : b) v += shift;
      row.push_back(ks_statistic(finite[k][p], std::move(b)));
    }
    rep.ks_vertex_factor.push_back(std::move(row));
  }
  const auto flags = [&](const std::vector<std::vector<double>>& ks, const std::string& label) {
    std::vector<bool> out(points, false);
    for (std::size_t p = 0; p < points; ++p) {
      for (std::size_t k = 1; k < ks.size(); ++k)
        if (ks[k][p] >= ks[k - 1][p]) out[p] = true;
      if (out[p])
        rep.warnings.push_back("point " + std::to_string(p + 1) + ": KS distance" + label +
                               " did not decrease between levels");
    }
    return out;
  };
  rep.non_decreasing = flags(rep.ks, "");
  rep.non_decreasing_vertex_factor = flags(rep.ks_vertex_factor, " with the vertex factor");
  return rep;
}

SurrogateLattice surrogate_lattice(int n, const SurrogateGeometry& g) {
  if (n < 1) throw InvalidInput("surrogate: n must be positive");
  if (!(g.t > 0.0)) throw InvalidInput("surrogate: need t > 0");
  if (!(g.x2 > 0.0) || !std::isfinite(g.x2)) throw InvalidInput("surrogate: need x2 > 0");
  if (g.ends.empty()) throw InvalidInput("surrogate: no end points");
  const double scale = 2.0 * sqrt_n(n);
  SurrogateLattice l;
  l.rows = static_cast<int>(lattice_row(n, g.t, "surrogate"));
  l.b = l.rows;
  l.a = 1 + static_cast<int>(std::lround(scale * g.x2));
  if (l.a < 2 || l.a > l.b) throw InvalidInput("surrogate: the start separation must land in [2, nt]");
  for (double y : g.ends) {
    if (!(y > 0.0) || !std::isfinite(y)) throw InvalidInput("surrogate: end positions must be positive");
    const int bp = l.b + static_cast<int>(std::lround(scale * y));
    if (bp <= l.b) throw InvalidInput("surrogate: an end position rounds onto column nt");
    l.b_prime.push_back(bp);
  }
  l.m = *std::max_element(l.b_prime.begin(), l.b_prime.end());
  return l;
}

std::vector<BkVerdict> prelimit_bk_surrogate(int n, const SurrogateGeometry& geometry,
                                             const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                             std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  const SurrogateLattice l = surrogate_lattice(n, geometry);
  std::vector<IncreasingEvent> mapped;
  for (const auto& e : events) {
    IncreasingEvent m = e;
    for (auto& t : m.terms) {
      if (t.q != 1 || t.p < 1 || t.p > static_cast<int>(l.b_prime.size()))
        throw InvalidInput("prelimit_bk_surrogate: event coordinates are (k, 1) for the k-th end");
      const int bp = l.b_prime[static_cast<std::size_t>(t.p - 1)];
      t.log_threshold -= z_n_log_factor(n, bp - l.a + l.rows - 2);
      t.p = l.a;
      t.q = bp;
    }
    mapped.push_back(std::move(m));
  }
  auto out = bk_endpoint_variation(l.m, l.rows, l.b, 2.0 * sqrt_n(n), mapped, g_seed, replicas, seed, opt);
  for (auto& v : out) v.experiment = "prelimit_bk_surrogate";
  return out;
}

BkVerdict prelimit_bk_surrogate(int n, const SurrogateGeometry& geometry, const IncreasingEvent& event,
                                std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  return prelimit_bk_surrogate(n, geometry, std::vector<IncreasingEvent>{event}, g_seed, replicas, seed, opt).front();
}

std::vector<double> surrogate_rhs_log_samples(int n, const SurrogateGeometry& geometry, int k, std::size_t count,
                                              std::uint64_t seed, int workers) {
  const SurrogateLattice l = surrogate_lattice(n, geometry);
  if (k < 1 || k > static_cast<int>(l.b_prime.size())) throw InvalidInput("surrogate: end index out of range");
  const int bp = l.b_prime[static_cast<std::size_t>(k - 1)];
  std::vector<double> s =
      t1_log_samples(l.m - 1, l.rows - 1, 2.0 * sqrt_n(n), {l.a - 1, 1}, {bp - 1, l.rows - 1}, count, seed, workers);
  const double shift = z_n_log_factor(n, bp - l.a + l.rows - 2);
  for (double& v : s) v += shift;
  return s;
}

nlohmann::ordered_json to_json(const ConvergenceReport& r) {
  nlohmann::ordered_json j;
  j["soft"] = true;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& l : r.levels) {
    nlohmann::ordered_json e;
    e["n"] = l.n;
    e["mean"] = l.mean;
    e["variance"] = l.variance;
    e["quantile_levels"] = {0.05, 0.25, 0.5, 0.75, 0.95};
    e["quantiles"] = l.quantiles;
    levels.push_back(std::move(e));
  }
  j["levels"] = std::move(levels);
  j["ks"] = r.ks;
  j["non_decreasing"] = r.non_decreasing;
  j["ks_vertex_factor"] = r.ks_vertex_factor;
  j["non_decreasing_vertex_factor"] = r.non_decreasing_vertex_factor;
  j["warnings"] = r.warnings;
  return j;
}

void write_samples_csv(std::ostream& os, const FieldSamples& s) {
  os << "n,point,replica,value\n";
  for (std::size_t p = 0; p < s.log_values.size(); ++p)
    for (std::size_t r = 0; r < s.log_values[p].size(); ++r)
      os << s.n << ',' << p + 1 << ',' << r << ',' << s.log_values[p][r] << '\n';
}

}  // namespace polylab
