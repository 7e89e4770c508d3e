#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polylab/gibbs.hpp"
#include "polylab/partition.hpp"

namespace polylab {

/// Condition X(p, q) >= exp(log_threshold) on one coordinate of a family,
/// or X(p, q) <= exp(log_threshold) when at_least is false. The experiments
/// refuse the latter.
struct EventTerm {
  int p = 2;
  int q = 1;
  double log_threshold = 0.0;
  bool at_least = true;
};

enum class EventMode { all, any };

/// Threshold conditions joined by `mode`; with only >= conditions the event
/// is increasing in every coordinate.
struct IncreasingEvent {
  std::vector<EventTerm> terms;
  EventMode mode = EventMode::all;

  /// No conditions joined by `all`: always holds.
  static IncreasingEvent full_space();
  /// No conditions joined by `any`: never holds.
  static IncreasingEvent empty();
  static IncreasingEvent threshold(int p, int q, double log_threshold);

  /// Throws InvalidInput on a decreasing or NaN condition.
  void require_increasing() const;
  /// log_value(p, q) is the log of coordinate (p, q).
  bool holds(const std::function<double(int, int)>& log_value) const;
};

/// How the conditioned side is evaluated. `line_ensemble` builds the
/// sub-ensemble and evaluates the line-ensemble path sums; `primal` uses the
/// equal single-path partition functions of the sampled grid and the top
/// line from two DP sweeps, which scales to large grids.
enum class LhsRoute { line_ensemble, primal };

/// How the conditioned law is sampled. `importance` weights independent
/// grids by the tilt; `mcmc` runs TiltedGridChain chains on the tilted law
/// and takes the standard error from the spread of per-chain means.
enum class LhsEstimator { importance, mcmc };

struct BkOptions {
  /// pass iff margin <= k (lhs_se + rhs_se).
  double k = 3.0;
  double ess_floor = 200.0;
  int workers = 1;
  bool keep_replicas = false;
  LhsRoute route = LhsRoute::line_ensemble;
  LhsEstimator estimator = LhsEstimator::importance;
  std::size_t chains = 32;
  /// Sweeps discarded at the start of every chain.
  std::size_t burn_in = 200;
};

struct BkVerdict {
  std::string experiment;
  /// "importance" or "mcmc".
  std::string estimator;
  double lhs_estimate = 0.0;
  double lhs_se = 0.0;
  double rhs_estimate = 0.0;
  double rhs_se = 0.0;
  double margin = 0.0;
  double k = 3.0;
  bool pass = false;
  /// Effective sample size of the reweighted side fell below the floor.
  bool inconclusive = false;
  double ess = 0.0;
  std::size_t replicas = 0;
  /// Chains and Metropolis acceptance rate; zero for importance sampling.
  std::size_t chains = 0;
  double acceptance_rate = 0.0;
  std::vector<std::string> warnings;
  /// Per replica, filled when BkOptions::keep_replicas is set.
  std::vector<double> log_weight, lhs_indicator, rhs_indicator;
};

/// Conditioned on the full top line g of a pilot m x n ensemble (seed g_seed),
/// compares P(family in A | g) for the family f(m)^{-1} T([(1,1),(a,1)],
/// [(m,n),(m,b)]) with P(family in A) for T1((a-1,1),(m-1,b)). Event
/// coordinates are (p, q) = (a, b) with 2 <= a <= m, 1 <= b <= n-1, and for
/// m < n also b >= n-m+1. The conditioned side is a self-normalized
/// estimate over N reweighted (m-1) x (n-1) replicas; the other side is a
/// plain mean over N independent (m-1) x (n-1) grids.
BkVerdict bk_log_gamma(int m, int n, double theta, const IncreasingEvent& event, std::uint64_t g_seed,
                       std::size_t replicas, std::uint64_t seed, const BkOptions& opt = {});
/// Several events on one set of replicas.
std::vector<BkVerdict> bk_log_gamma(int m, int n, double theta, const std::vector<IncreasingEvent>& events,
                                    std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed,
                                    const BkOptions& opt = {});

/// Family f(b)^{-1} T([(1,1),(a,1)],[(b,n),(b',n-1)]) given the top line of
/// a pilot b x n ensemble, against T1((a-1,1),(b'-1,n-1)). Coordinates are
/// (p, q) = (a, b') with 2 <= a <= b < b' <= m. The conditioned value is
/// sum over l of F_{a-1,l}(sub) times the single-path sum from (b+1,l) to
/// (b',n-1) through fresh columns b+1..m. Needs n <= b < m.
BkVerdict bk_endpoint_variation(int m, int n, int b, double theta, const IncreasingEvent& event,
                                std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed,
                                const BkOptions& opt = {});
std::vector<BkVerdict> bk_endpoint_variation(int m, int n, int b, double theta,
                                             const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                             std::size_t replicas, std::uint64_t seed, const BkOptions& opt = {});

/// One point of the multipoint family: starts (a_r, 1), ends (m, l_r).
struct PointTuple {
  std::vector<int> a;
  std::vector<int> ell;
};

/// w padding paths and the tuples of the family.
struct MultiPointSpec {
  int w = 1;
  std::vector<PointTuple> tuples;
  /// Throws InvalidInput when a tuple is outside the admissible set or its
  /// right end is not a vertex of the (m-w) x (n-w) line-ensemble graph.
  void validate(int m, int n) const;
};

/// Family T([(1,1)^w,(a,1)],[(m,n)^w,(m,l)]) / T_w((1,1),(m,n)) given the top
/// w lines of a pilot m x n ensemble, against T([(a,1)],[(m,l)]) on fresh
/// m x n grids. Event coordinates are (p, q) = (tuple index from 1, 1). The
/// conditioned side reweights (m-w) x (n-w) ensembles by band_log_weight;
/// it always uses the line-ensemble route.
BkVerdict bk_multipoint(int m, int n, double theta, const MultiPointSpec& spec, const IncreasingEvent& event,
                        std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed, const BkOptions& opt = {});
std::vector<BkVerdict> bk_multipoint(int m, int n, double theta, const MultiPointSpec& spec,
                                     const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                     std::size_t replicas, std::uint64_t seed, const BkOptions& opt = {});

/// log T1(u, v) on `count` independent inverse-gamma(theta) grids of size
/// grid_m x grid_n, for placing thresholds at empirical quantiles.
std::vector<double> t1_log_samples(int grid_m, int grid_n, double theta, Point u, Point v, std::size_t count,
                                   std::uint64_t seed, int workers = 1);

struct CounterexampleResult {
  /// exact, verified, refuted, inconclusive or not_covered.
  std::string status;
  /// NaN when there is no verdict.
  double lhs = 0.0;
  double rhs = 0.0;
  bool violated = false;
  std::size_t samples = 0;
  /// Samples inside the conditioning set.
  std::size_t hits = 0;
  std::string note;
};

/// 2 x 2 Bernoulli(p) grid, all 16 configurations enumerated:
/// lhs = P(T2/2 >= t | T1((1,1),(2,2)) = 2), rhs = P(X(1,1) >= t).
CounterexampleResult counterexample_bernoulli(double p, double t);

/// 2 x 2 uniform[0,1] grid conditioned on T1((1,1),(2,2)) >= 2 - delta:
/// rhs = 1 - t; lhs = 1 is checked by sampling weights uniformly on
/// [1-delta, 1]^4 and requiring T2/T1 >= t on every sample in the
/// conditioning set. Reports not_covered when t > 1/2 - delta.
CounterexampleResult counterexample_uniform(double delta, double t, std::size_t samples, std::uint64_t seed);

nlohmann::ordered_json to_json(const BkVerdict& v);
nlohmann::ordered_json to_json(const CounterexampleResult& r);
/// Columns: replica, log_weight, lhs, rhs; a cell is blank past the end of
/// its side. Empty unless replicas were kept.
void write_replica_csv(std::ostream& os, const BkVerdict& v);

}  // namespace polylab
