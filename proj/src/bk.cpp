#include "polylab/bk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

#include "polylab/errors.hpp"
#include "polylab/grsk.hpp"
#include "polylab/identities.hpp"
#include "polylab/parallel.hpp"
#include "polylab/stats.hpp"

namespace polylab {

namespace {

constexpr std::uint64_t kLhsTag = 0x61;
constexpr std::uint64_t kRhsTag = 0x62;
constexpr std::uint64_t kExtTag = 0x63;
constexpr std::uint64_t kQuantileTag = 0x64;
constexpr std::uint64_t kUniformTag = 0x65;
constexpr std::uint64_t kChainTag = 0x66;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Coord = std::pair<int, int>;

DistributionSpec law(double theta) { return DistributionSpec::inverse_gamma(theta); }

/// Distinct coordinates referenced by the events, in sorted order.
std::vector<Coord> coordinates(const std::vector<IncreasingEvent>& events) {
  std::vector<Coord> out;
  for (const auto& e : events)
    for (const auto& t : e.terms) out.emplace_back(t.p, t.q);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_coords(const std::vector<Coord>& coords, const std::function<bool(int, int)>& ok, const std::string& what) {
  for (const auto& [p, q] : coords)
    if (!ok(p, q))
      throw InvalidInput(what + ": event coordinate (" + std::to_string(p) + "," + std::to_string(q) +
                         ") is outside the family");
}

/// Fills `out` with the log of every coordinate on the conditioned side for
/// grid x (sample index r) and returns the importance log weight.
using LhsFn = std::function<double(const WeightGrid&, std::size_t, std::vector<double>&)>;
/// Fills `out` with the log of every coordinate on replica r of the other side.
using RhsFn = std::function<void(std::size_t, std::vector<double>&)>;

struct Conditioned {
  TopLineTilt tilt;
  double theta;
  LhsFn eval;
};

std::vector<BkVerdict> run_experiment(const std::string& name, const std::vector<IncreasingEvent>& events,
                                      const std::vector<Coord>& coords, std::size_t replicas, std::uint64_t seed,
                                      const Conditioned& cond, const RhsFn& rhs, const BkOptions& opt) {
  if (replicas < 2) throw InvalidInput(name + ": need at least 2 replicas");
  if (!(opt.k >= 0.0)) throw InvalidInput(name + ": verdict multiplier must be nonnegative");
  for (const auto& e : events) e.require_increasing();
  std::map<Coord, std::size_t> slot;
  for (std::size_t c = 0; c < coords.size(); ++c) slot[coords[c]] = c;
  const std::size_t ne = events.size();
  auto indicators = [&](const std::vector<double>& vals, std::vector<std::vector<double>>& dst, std::size_t r) {
    auto value = [&](int p, int q) { return vals[slot.at({p, q})]; };
    for (std::size_t e = 0; e < ne; ++e) dst[e][r] = events[e].holds(value) ? 1.0 : 0.0;
  };

  const bool mcmc = opt.estimator == LhsEstimator::mcmc;
  const std::size_t chains = mcmc ? std::max<std::size_t>(2, std::min(opt.chains, replicas)) : 0;
  const std::size_t per_chain = mcmc ? (replicas + chains - 1) / chains : 0;
  const std::size_t samples = mcmc ? chains * per_chain : replicas;
  std::vector<double> log_w(samples, 0.0);
  std::vector<std::vector<double>> li(ne, std::vector<double>(samples)), ri(ne, std::vector<double>(replicas));
  std::vector<std::size_t> props(chains), accs(chains);
  if (mcmc) {
    parallel_for(chains, opt.workers, [&](std::size_t c) {
      TiltedGridChain chain(cond.tilt, cond.theta, replica_seed(seed, kChainTag, c));
      for (std::size_t t = 0; t < opt.burn_in; ++t) chain.sweep();
      std::vector<double> vals(coords.size());
      for (std::size_t s = 0; s < per_chain; ++s) {
        chain.sweep();
        const std::size_t r = c * per_chain + s;
        std::fill(vals.begin(), vals.end(), kNegInf);
        cond.eval(chain.grid(), r, vals);
        indicators(vals, li, r);
      }
      props[c] = chain.proposals();
      accs[c] = chain.accepted();
    });
  } else {
    parallel_for(replicas, opt.workers, [&](std::size_t r) {
      const WeightGrid x =
          sample_grid(cond.tilt.m, cond.tilt.n, law(cond.theta), replica_seed(seed, kLhsTag, r));
      std::vector<double> vals(coords.size(), kNegInf);
      log_w[r] = cond.eval(x, r, vals);
      indicators(vals, li, r);
    });
  }
  parallel_for(replicas, opt.workers, [&](std::size_t r) {
    std::vector<double> vals(coords.size(), kNegInf);
    rhs(r, vals);
    indicators(vals, ri, r);
  });

  std::size_t total_props = 0, total_accs = 0;
  for (std::size_t c = 0; c < chains; ++c) total_props += props[c], total_accs += accs[c];
  std::vector<BkVerdict> out;
  for (std::size_t e = 0; e < ne; ++e) {
    BkVerdict v;
    v.experiment = name;
    v.estimator = mcmc ? "mcmc" : "importance";
    v.k = opt.k;
    v.replicas = samples;
    if (mcmc) {
      std::vector<double> means;
      for (std::size_t c = 0; c < chains; ++c) {
        double sum = 0.0;
        for (std::size_t s = 0; s < per_chain; ++s) sum += li[e][c * per_chain + s];
        means.push_back(sum / static_cast<double>(per_chain));
      }
      const MeanSe ms = mean_se(means);
      const MeanSe pooled = mean_se(li[e]);
      v.lhs_estimate = ms.mean;
      v.lhs_se = ms.se;
      const double var = pooled.se * pooled.se * static_cast<double>(samples);
      v.ess = ms.se > 0.0 ? var / (ms.se * ms.se) : static_cast<double>(samples);
      v.chains = chains;
      v.acceptance_rate = total_props ? static_cast<double>(total_accs) / static_cast<double>(total_props) : 0.0;
    } else {
      const WeightedEstimate w = self_normalized(log_w, li[e]);
      v.lhs_estimate = w.value;
      v.lhs_se = w.se;
      v.ess = w.ess;
    }
    const MeanSe u = mean_se(ri[e]);
    v.rhs_estimate = u.mean;
    v.rhs_se = u.se;
    v.margin = v.lhs_estimate - v.rhs_estimate;
    v.pass = v.margin <= opt.k * (v.lhs_se + v.rhs_se);
    if (v.ess < opt.ess_floor) {
      v.inconclusive = true;
      v.warnings.push_back(std::string(mcmc ? "short chains" : "degenerate weights") + ": effective sample size " +
                           std::to_string(v.ess) + " below floor " + std::to_string(opt.ess_floor));
    }
    if (opt.keep_replicas) {
      v.log_weight = log_w;
      v.lhs_indicator = li[e];
      v.rhs_indicator = ri[e];
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// log T1(u, v) for every coordinate, with (u, v) = ends(p, q); one forward
/// sweep per distinct start.
void primal_t1(const ScalarGrid<LogNum>& sg, const std::vector<Coord>& coords,
               const std::function<std::pair<Point, Point>(int, int)>& ends, std::vector<double>& out) {
  std::map<Coord, Table<LogNum>> sweeps;
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const auto [u, v] = ends(coords[c].first, coords[c].second);
    auto it = sweeps.find({u.i, u.j});
    if (it == sweeps.end()) it = sweeps.emplace(Coord{u.i, u.j}, t1_forward(sg, u)).first;
    out[c] = it->second(v.i, v.j).logmag();
  }
}

void check_common(int m, int n, double theta, std::size_t replicas, const char* what) {
  if (m < 2 || n < 2) throw InvalidInput(std::string(what) + ": need m, n >= 2");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput(std::string(what) + ": need theta > 0");
  if (replicas < 2) throw InvalidInput(std::string(what) + ": need at least 2 replicas");
}

double log_value(const LogNum& x) { return x.is_zero() ? kNegInf : x.logmag(); }

}  // namespace

IncreasingEvent IncreasingEvent::full_space() { return {{}, EventMode::all}; }

IncreasingEvent IncreasingEvent::empty() { return {{}, EventMode::any}; }

IncreasingEvent IncreasingEvent::threshold(int p, int q, double log_threshold) {
  return {{EventTerm{p, q, log_threshold, true}}, EventMode::all};
}

void IncreasingEvent::require_increasing() const {
  for (const auto& t : terms) {
    if (!t.at_least)
      throw InvalidInput("event condition on (" + std::to_string(t.p) + "," + std::to_string(t.q) +
                         ") is decreasing; only >= thresholds are accepted");
    if (std::isnan(t.log_threshold)) throw InvalidInput("event threshold is NaN");
  }
}

bool IncreasingEvent::holds(const std::function<double(int, int)>& log_value) const {
  auto one = [&](const EventTerm& t) {
    const double v = log_value(t.p, t.q);
    return t.at_least ? v >= t.log_threshold : v <= t.log_threshold;
  };
  if (mode == EventMode::all) return std::all_of(terms.begin(), terms.end(), one);
  return std::any_of(terms.begin(), terms.end(), one);
}

std::vector<BkVerdict> bk_log_gamma(int m, int n, double theta, const std::vector<IncreasingEvent>& events,
                                    std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed,
                                    const BkOptions& opt) {
  check_common(m, n, theta, replicas, "bk_log_gamma");
  const auto coords = coordinates(events);
  require_coords(
      coords, [&](int a, int b) { return a >= 2 && a <= m && b >= 1 && b <= n - 1 && b >= n - m + 1; },
      "bk_log_gamma");
  const ConditioningProfile g = pilot_profile(DensityModel(m, n, theta), g_seed);
  const auto to_sub = [&](int a, int b) { return std::pair{Point{a - 1, 1}, Point{m - 1, b}}; };

  const LhsFn lhs = [&](const WeightGrid& x, std::size_t, std::vector<double>& out) {
    if (opt.route == LhsRoute::primal) {
      primal_t1(ScalarGrid<LogNum>(x), coords, to_sub, out);
      return gamma_log_weight(top_line_log(x), g);
    }
    const LineEnsemble sub = build_ensemble(x);
    const IncrementField inc = build_increments(sub);
    for (std::size_t c = 0; c < coords.size(); ++c)
      out[c] = log_value(f_function(inc, coords[c].first - 1, coords[c].second));
    return gamma_log_weight(sub, g);
  };
  const RhsFn rhs = [&](std::size_t r, std::vector<double>& out) {
    const WeightGrid y = sample_grid(m - 1, n - 1, law(theta), replica_seed(seed, kRhsTag, r));
    primal_t1(ScalarGrid<LogNum>(y), coords, to_sub, out);
  };
  return run_experiment("bk_log_gamma", events, coords, replicas, seed, {gamma_tilt(g), theta, lhs}, rhs, opt);
}


BkVerdict bk_log_gamma(int m, int n, double theta, const IncreasingEvent& event, std::uint64_t g_seed,
                       std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  return bk_log_gamma(m, n, theta, std::vector<IncreasingEvent>{event}, g_seed, replicas, seed, opt).front();
}

std::vector<BkVerdict> bk_endpoint_variation(int m, int n, int b, double theta,
                                             const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                             std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  check_common(m, n, theta, replicas, "bk_endpoint_variation");
  if (b < 2 || b >= m) throw InvalidInput("bk_endpoint_variation: need 2 <= b < m");
  if (b < n)
    throw Unsupported("bk_endpoint_variation: needs b >= n; for b < n the line-ensemble form of the two-path "
                      "ratio is undefined at right ends l <= n-b");
  const auto coords = coordinates(events);
  require_coords(
      coords, [&](int a, int bp) { return a >= 2 && a <= b && bp > b && bp <= m; }, "bk_endpoint_variation");
  const ConditioningProfile g = pilot_profile(DensityModel(b, n, theta), g_seed);

  const LhsFn lhs = [&](const WeightGrid& x, std::size_t r, std::vector<double>& out) {
    const WeightGrid ext = sample_grid(m - b, n - 1, law(theta), replica_seed(seed, kExtTag, r));
    const ScalarGrid<LogNum> se(ext);
    // first[a][l-1]: F_{a-1,l} of the conditioned sub-ensemble.
    std::map<int, std::vector<LogNum>> first;
    std::map<int, Table<LogNum>> tail;
    double log_w = 0.0;
    if (opt.route == LhsRoute::primal) {
      const ScalarGrid<LogNum> sx(x);
      for (const auto& [a, bp] : coords) {
        if (first.count(a)) continue;
        const Table<LogNum> fw = t1_forward(sx, Point{a - 1, 1});
        auto& row = first[a];
        for (int l = 1; l <= n - 1; ++l) row.push_back(fw(b - 1, l));
      }
      log_w = gamma_log_weight(top_line_log(x), g);
    } else {
      const LineEnsemble sub = build_ensemble(x);
      const IncrementField inc = build_increments(sub);
      for (const auto& [a, bp] : coords) {
        if (first.count(a)) continue;
        const std::vector<LogNum> from = inc.paths_from(lift_start(a - 1, n - 1));
        auto& row = first[a];
        for (int l = 1; l <= n - 1; ++l) row.push_back(from[inc.slot(lift_right_end(b - 1, l))]);
      }
      log_w = gamma_log_weight(sub, g);
    }
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const auto [a, bp] = coords[c];
      auto it = tail.find(bp);
      if (it == tail.end()) it = tail.emplace(bp, t1_backward(se, Point{bp - b, n - 1})).first;
      LogNum total = LogNum::zero();
      for (int l = 1; l <= n - 1; ++l) total += first[a][l - 1] * it->second(1, l);
      out[c] = log_value(total);
    }
    return log_w;
  };
  const RhsFn rhs = [&](std::size_t r, std::vector<double>& out) {
    const WeightGrid y = sample_grid(m - 1, n - 1, law(theta), replica_seed(seed, kRhsTag, r));
    primal_t1(
        ScalarGrid<LogNum>(y), coords, [&](int a, int bp) { return std::pair{Point{a - 1, 1}, Point{bp - 1, n - 1}}; },
        out);
  };
  return run_experiment("bk_endpoint_variation", events, coords, replicas, seed, {gamma_tilt(g), theta, lhs}, rhs,
                        opt);
}

BkVerdict bk_endpoint_variation(int m, int n, int b, double theta, const IncreasingEvent& event,
                                std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed,
                                const BkOptions& opt) {
  return bk_endpoint_variation(m, n, b, theta, std::vector<IncreasingEvent>{event}, g_seed, replicas, seed, opt)
      .front();
}

void MultiPointSpec::validate(int m, int n) const {
  if (tuples.empty()) throw InvalidInput("multipoint: no tuples");
  for (const auto& t : tuples) {
    if (!in_multipoint_domain(m, n, MultipointCase{w, t.a, t.ell}))
      throw InvalidInput("multipoint: tuple outside the admissible set");
    for (int l : t.ell)
      if (l > 0 && l < (n - w) - (m - w) + 1)
        throw InvalidInput("multipoint: right end (m," + std::to_string(l) +
                           ") has no line-ensemble vertex; needs l >= n-m+1");
  }
}

std::vector<BkVerdict> bk_multipoint(int m, int n, double theta, const MultiPointSpec& spec,
                                     const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                     std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  check_common(m, n, theta, replicas, "bk_multipoint");
  spec.validate(m, n);
  const int w = spec.w;
  const auto coords = coordinates(events);
  require_coords(
      coords, [&](int p, int q) { return p >= 1 && p <= static_cast<int>(spec.tuples.size()) && q == 1; },
      "bk_multipoint");
  const DensityModel model(m, n, theta);
  const WeightGrid pilot = sample_grid(m, n, law(theta), g_seed);
  const LineEnsemble top = build_ensemble(pilot);
  const auto has_zero_end = [](const PointTuple& t) {
    return std::any_of(t.ell.begin(), t.ell.end(), [](int l) { return l == 0; });
  };

  const LhsFn lhs = [&](const WeightGrid& x, std::size_t, std::vector<double>& out) {
    const LineEnsemble sub = build_ensemble(x);
    const IncrementField inc = build_increments(sub);
    std::unique_ptr<BasicIncrementField<ExtendedReal>> deep;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const PointTuple& t = spec.tuples[coords[c].first - 1];
      if (has_zero_end(t)) continue;
      std::vector<Vertex> s, e;
      for (std::size_t k = 0; k < t.a.size(); ++k) {
        s.push_back(lift_start(t.a[k] - w, n - w));
        e.push_back(lift_right_end(m - w, t.ell[k]));
      }
      const DetResult d = s_partition(inc, s, e);
      if (!d.degenerate && d.rel_error <= 1e-8) {
        out[c] = log_value(d.value);
        continue;
      }
      if (!deep)
        deep = std::make_unique<BasicIncrementField<ExtendedReal>>(
            build_ensemble_as(ScalarGrid<ExtendedReal>(x)));
      out[c] = log_value(ScalarTraits<ExtendedReal>::to_lognum(s_partition(*deep, s, e).value));
    }
    return band_log_weight(model, top, w, sub);
  };
  const RhsFn rhs = [&](std::size_t r, std::vector<double>& out) {
    const WeightGrid y = sample_grid(m, n, law(theta), replica_seed(seed, kRhsTag, r));
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const PointTuple& t = spec.tuples[coords[c].first - 1];
      if (has_zero_end(t)) continue;
      EndpointSpec es;
      for (std::size_t k = 0; k < t.a.size(); ++k) {
        es.starts.push_back({t.a[k], 1});
        es.ends.push_back({m, t.ell[k]});
      }
      DetResult d = t_disjoint(y, es);
      if (d.degenerate || d.rel_error > 1e-8)
        d.value = ScalarTraits<ExtendedReal>::to_lognum(t_disjoint_as(ScalarGrid<ExtendedReal>(y), es).value);
      out[c] = log_value(d.value);
    }
  };
  return run_experiment("bk_multipoint", events, coords, replicas, seed, {band_tilt(model, top, w), theta, lhs}, rhs,
                        opt);
}

BkVerdict bk_multipoint(int m, int n, double theta, const MultiPointSpec& spec, const IncreasingEvent& event,
                        std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed, const BkOptions& opt) {
  return bk_multipoint(m, n, theta, spec, std::vector<IncreasingEvent>{event}, g_seed, replicas, seed, opt).front();
}

std::vector<double> t1_log_samples(int grid_m, int grid_n, double theta, Point u, Point v, std::size_t count,
                                   std::uint64_t seed, int workers) {
  if (grid_m < 1 || grid_n < 1) throw InvalidInput("t1_log_samples: empty grid");
  if (count == 0) throw InvalidInput("t1_log_samples: count must be positive");
  return parallel_map<double>(count, workers, [&](std::size_t r) {
    return log_value(t1(sample_grid(grid_m, grid_n, law(theta), replica_seed(seed, kQuantileTag, r)), u, v));
  });
}

CounterexampleResult counterexample_bernoulli(double p, double t) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("counterexample_bernoulli: need p in (0,1)");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("counterexample_bernoulli: need t > 0");
  double cond = 0.0, joint = 0.0, rhs = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<std::vector<double>> v(2, std::vector<double>(2));
    double prob = 1.0;
    for (int s = 0; s < 4; ++s) {
      const int bit = (mask >> s) & 1;
      v[s / 2][s % 2] = bit;
      prob *= bit ? p : 1.0 - p;
    }
    const WeightGrid grid = explicit_grid(v);
    const double t1v = t1(grid, {1, 1}, {2, 2}).to_double();
    const double t2v = t_k_nested(grid, {1, 1}, {2, 2}, 2).value.to_double();
    if (t1(grid, {1, 1}, {1, 1}).to_double() >= t) rhs += prob;
    if (std::fabs(t1v - 2.0) < 1e-12) {
      cond += prob;
      if (t2v / 2.0 >= t) joint += prob;
    }
  }
  CounterexampleResult r;
  r.status = "exact";
  r.lhs = joint / cond;
  r.rhs = rhs;
  r.violated = r.lhs > r.rhs;
  r.samples = 16;
  r.note = "exact enumeration of the 16 Bernoulli configurations";
  return r;
}

CounterexampleResult counterexample_uniform(double delta, double t, std::size_t samples, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("counterexample_uniform: need delta in (0, 1/2)");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("counterexample_uniform: need t > 0");
  if (samples == 0) throw InvalidInput("counterexample_uniform: need at least one sample");
  CounterexampleResult r;
  r.rhs = std::max(0.0, 1.0 - t);
  r.lhs = kNaN;
  if (t > 0.5 - delta + 1e-12) {
    r.status = "not_covered";
    r.note = "t > 1/2 - delta: outside the range where the conditional ratio is forced above t; no verdict";
    return r;
  }
  std::size_t bad = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Stream rng = Stream::at(seed, kUniformTag, s);
    std::vector<std::vector<double>> v(2, std::vector<double>(2));
    for (auto& row : v)
      for (double& x : row) x = 1.0 - delta * rng.uniform();
    const WeightGrid grid = explicit_grid(v);
    const double t1v = t1(grid, {1, 1}, {2, 2}).to_double();
    if (t1v < 2.0 - delta) continue;
    ++r.hits;
    if (t_k_nested(grid, {1, 1}, {2, 2}, 2).value.to_double() / t1v < t) ++bad;
  }
  r.samples = samples;
  if (r.hits == 0) {
    r.status = "inconclusive";
    r.note = "no sample reached T1 >= 2 - delta; increase the sample count";
  } else if (bad > 0) {
    r.status = "refuted";
    r.lhs = 1.0 - static_cast<double>(bad) / static_cast<double>(r.hits);
    r.note = std::to_string(bad) + " conditioned samples had T2/T1 < t";
  } else {
    r.status = "verified";
    r.lhs = 1.0;
    r.violated = r.lhs > r.rhs;
    r.note = "every conditioned sample had T2/T1 >= t";
  }
  return r;
}

nlohmann::ordered_json to_json(const BkVerdict& v) {
  nlohmann::ordered_json j;
  j["experiment"] = v.experiment;
  j["estimator"] = v.estimator;
  j["lhs_estimate"] = v.lhs_estimate;
  j["lhs_se"] = v.lhs_se;
  j["rhs_estimate"] = v.rhs_estimate;
  j["rhs_se"] = v.rhs_se;
  j["margin"] = v.margin;
  j["k"] = v.k;
  j["pass"] = v.pass;
  j["inconclusive"] = v.inconclusive;
  j["ess"] = v.ess;
  j["replicas"] = v.replicas;
  if (v.chains) {
    j["chains"] = v.chains;
    j["acceptance_rate"] = v.acceptance_rate;
  }
  j["warnings"] = v.warnings;
  return j;
}

nlohmann::ordered_json to_json(const CounterexampleResult& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["status"] = r.status;
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["violated"] = r.violated;
  j["samples"] = r.samples;
  j["hits"] = r.hits;
  j["note"] = r.note;
  return j;
}

void write_replica_csv(std::ostream& os, const BkVerdict& v) {
  os << "replica,log_weight,lhs,rhs\n";
  const std::size_t rows = std::max(v.lhs_indicator.size(), v.rhs_indicator.size());
  for (std::size_t r = 0; r < rows; ++r) {
    os << r << ',';
    if (r < v.log_weight.size()) os << v.log_weight[r];
    os << ',';
    if (r < v.lhs_indicator.size()) os << v.lhs_indicator[r];
    os << ',';
    if (r < v.rhs_indicator.size()) os << v.rhs_indicator[r];
    os << '\n';
  }
}

}  // namespace polylab
