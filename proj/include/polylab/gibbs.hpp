#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polylab/environment.hpp"
#include "polylab/grsk.hpp"
#include "polylab/rng.hpp"

namespace polylab {

/// Law of the line ensemble of an m x n inverse-gamma(theta) grid.
struct DensityModel {
  int m = 2;
  int n = 2;
  double theta = 2.0;

  DensityModel() = default;
  DensityModel(int m, int n, double theta);
  void validate() const;
};

/// Top-line values g(1..m+n), stored as logs, with g(m) = g(m+1).
class ConditioningProfile {
 public:
  ConditioningProfile(int m, int n, std::vector<double> log_g);
  /// The realized top line of a full m x n ensemble.
  static ConditioningProfile from_ensemble(const LineEnsemble& full);
  /// The same top line computed from single-path partition functions.
  static ConditioningProfile from_grid(const WeightGrid& grid);

  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  /// 1-based.
  double log_g(int i) const { return log_g_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<double>& log_values() const noexcept { return log_g_; }

 private:
  int m_, n_;
  std::vector<double> log_g_;
};

/// log z_1(i), i = 1..m+n, of the grid's ensemble: log T1((1,1),(i,n)) for
/// i <= m and log T1((1,i-m),(m,n)) after.
std::vector<double> top_line_log(const WeightGrid& grid);

/// Top line of the ensemble of one freshly sampled m x n grid.
ConditioningProfile pilot_profile(const DensityModel& model, std::uint64_t seed);

/// One term of the log density: ratio adds -coef z(i,j)/z(i2,j2), log adds
/// coef log z(i,j), reciprocal adds -coef / z(i,j).
struct DensityTerm {
  enum class Kind { ratio, log, reciprocal };
  Kind kind = Kind::log;
  int i = 1, j = 1;
  int i2 = 0, j2 = 0;
  double coef = 1.0;
};

/// Terms of log_density_unnorm (joint = false) or log_joint_density (joint = true).
std::vector<DensityTerm> density_terms(const DensityModel& model, bool joint);

/// Log of the unnormalized density expression for {z_j(i)} on J[m,n]: the
/// four ratio sums, -sum over J of log z_j(i) (glued pairs counted twice)
/// and -theta sum_j log z_j(m). Ratio terms that would involve a line below
/// min(m,n) are absent. Throws InvalidInput on a shape or gluing mismatch.
double log_density_unnorm(const DensityModel& model, const LineEnsemble& values);

/// Entry (column, line) of the lowest line's boundary term: (n, L) when
/// m >= n and (n+1, L) otherwise, with L = min(m,n).
std::pair<int, int> boundary_entry(const DensityModel& model);

/// Log of the normalizable joint density with respect to Lebesgue measure
/// on the free coordinates (one per glued pair), up to a constant:
/// log_density_unnorm + sum_j log z_j(m) - 1/z at boundary_entry.
double log_joint_density(const DensityModel& model, const LineEnsemble& values);

/// Top-line part of log_joint_density with the glued value g(m) = g(m+1)
/// integrated out, up to a constant: the ratio terms not involving g(m),
/// -sum of log g(i) over i outside {m, m+1}, and -theta log(g(m-1) + g(m+2)).
double top_line_log_factor(const DensityModel& model, const ConditioningProfile& g);

/// -sum_{i<m} z_1(i)/g(i) - sum_{m<=i<=m+n-2} z_1(i)/g(i+2) for an ensemble
/// on J[m-1, n-1]; the unnormalized log reweighting factor.
double gamma_log_weight(const LineEnsemble& sub, const ConditioningProfile& g);
/// The same from the sub-ensemble's top line alone (m+n-2 log values).
double gamma_log_weight(const std::vector<double>& sub_top, const ConditioningProfile& g);

/// Sum of the ratio terms of log_joint_density that pair a line <= w with a
/// line > w, reading lines <= w from `top` (shape J[m,n]) and lines > w from
/// `sub` (shape J[m-w, n-w], entry (i,j) standing for (i+w, j+w)). The
/// conditional law of the lower lines given the top w lines is the law of
/// an (m-w) x (n-w) ensemble reweighted by its exponential; for w = 1 it
/// equals gamma_log_weight.
double band_log_weight(const DensityModel& model, const LineEnsemble& top, int w, const LineEnsemble& sub);

/// Real-valued functional of an ensemble on J[m-1, n-1].
using Functional = std::function<double(const LineEnsemble&)>;

/// Indicator of {F_{a,b} >= exp(log_c)} on the given ensemble.
Functional f_at_least(int a, int b, double log_c);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  /// Replicas behind the estimate (accepted ones for rejection).
  std::size_t samples = 0;
  std::size_t proposals = 0;
  double ess = 0.0;
  double acceptance_rate = 1.0;
  std::vector<std::string> warnings;
};

struct IsOptions {
  /// Effective sample sizes below this add a degenerate-weights warning.
  double ess_floor = 200.0;
  int workers = 1;
};

/// E[phi(sub) | Z_1 = g] by self-normalized importance sampling: sub is the
/// ensemble of an independent (m-1) x (n-1) grid weighted by exp(gamma_log_weight).
std::vector<Estimate> conditional_expectation_is(const DensityModel& model, const ConditioningProfile& g,
                                                 const std::vector<Functional>& phis, std::size_t replicas,
                                                 std::uint64_t seed, const IsOptions& opt = {});

/// Per-replica log weights and functional values behind conditional_expectation_is.
struct IsTrace {
  std::vector<double> log_weight;
  std::vector<std::vector<double>> phi;
};
IsTrace is_trace(const DensityModel& model, const ConditioningProfile& g, const std::vector<Functional>& phis,
                 std::size_t replicas, std::uint64_t seed, int workers = 1);

Estimate conditional_expectation_is(const DensityModel& model, const ConditioningProfile& g, const Functional& phi,
                                    std::size_t replicas, std::uint64_t seed, const IsOptions& opt = {});

/// E[phi(sub)] without conditioning, on the same replicas as the IS estimator.
std::vector<Estimate> unconditioned_expectation(const DensityModel& model, const std::vector<Functional>& phis,
                                                std::size_t replicas, std::uint64_t seed, const IsOptions& opt = {});

/// E[phi(sub) | Z_1(i) in [g(i), g(i)(1+eps)] for i outside {m, m+1}] by
/// importance sampling: those top-line values are drawn log-uniformly in
/// the window and weighted by top_line_log_factor, the log-uniform Jacobian
/// and the reweighting factor. Given the rest of the top line, the
/// sub-ensemble does not depend on g(m), so that column is left free.
std::vector<Estimate> windowed_expectation_is(const DensityModel& model, const ConditioningProfile& g, double eps,
                                              const std::vector<Functional>& phis, std::size_t replicas,
                                              std::uint64_t seed, const IsOptions& opt = {});

struct RejectionOptions {
  /// Stop at the first chunk boundary with at least this many acceptances;
  /// 0 uses all proposals.
  std::size_t min_accepted = 0;
  std::size_t chunk = 8192;
  int workers = 1;
};

/// The same conditional expectation by sampling full m x n grids and
/// keeping those whose top line falls in the multiplicative window at every
/// column outside {m, m+1}; phi is
/// evaluated on the accepted ensembles with the top line removed. Throws
/// EstimationFailure when nothing is accepted.
std::vector<Estimate> conditional_expectation_rejection(const DensityModel& model, const ConditioningProfile& g,
                                                        double eps, const std::vector<Functional>& phis,
                                                        std::size_t max_proposals, std::uint64_t seed,
                                                        const RejectionOptions& opt = {});
Estimate conditional_expectation_rejection(const DensityModel& model, const ConditioningProfile& g, double eps,
                                           const Functional& phi, std::size_t max_proposals, std::uint64_t seed,
                                           const RejectionOptions& opt = {});

/// Independent ensembles of m x n inverse-gamma grids.
std::vector<LineEnsemble> forward_ensembles(const DensityModel& model, std::size_t count, std::uint64_t seed,
                                            int workers = 1);

struct McmcOptions {
  std::size_t burn_in = 5000;
  std::size_t thin = 1;
  double initial_scale = 0.5;
  double target_acceptance = 0.3;
  /// Adapt per-coordinate scales during burn-in.
  bool tune = true;
};

/// Metropolis-within-Gibbs targeting log_joint_density, in log coordinates of
/// the free entries of J[m,n]; a glued pair (m, j) / (m+1, j) moves as one
/// coordinate.
class McmcChain {
 public:
  McmcChain(const DensityModel& model, LineEnsemble start, double scale, std::uint64_t seed);

  /// One Gaussian proposal per free coordinate, then one common shift of
  /// all of them. proposals() and accepted() count the per-coordinate moves.
  void sweep();
  /// Multiplies each coordinate's scale by exp(acceptance - target) over
  /// the sweeps since the previous call.
  void adapt(double target);

  const LineEnsemble& state() const noexcept { return state_; }
  double log_target() const noexcept { return log_target_; }
  std::size_t proposals() const noexcept { return proposals_; }
  std::size_t accepted() const noexcept { return accepted_; }
  double mean_scale() const;
  std::size_t free_coordinates() const noexcept { return coords_.size(); }

 private:
  void set(std::size_t c, double u);
  double evaluate() const;

  DensityModel model_;
  LineEnsemble state_;
  std::vector<std::pair<int, int>> coords_;
  std::vector<double> scale_;
  std::vector<std::size_t> window_prop_, window_acc_;
  Stream rng_;
  double log_target_;
  std::size_t proposals_ = 0, accepted_ = 0;
};

struct McmcResult {
  std::vector<LineEnsemble> samples;
  double acceptance_rate = 0.0;
  /// Lag-1 autocorrelation of log z_1(m) along the kept samples.
  double autocorrelation = 0.0;
  double mean_scale = 0.0;
  /// Set when no kept sample differs from the starting state.
  bool zero_displacement = false;
};

/// Starts from a forward sample, runs burn_in sweeps (tuning if enabled),
/// then keeps every thin-th of the next `steps` sweeps.
McmcResult mcmc_sample(const DensityModel& model, std::size_t steps, std::uint64_t seed, const McmcOptions& opt = {});

/// Reweighting exp(-sum_i c_i z_1(i)) of an ensemble on J[m, n] through its
/// top line, i = 1..m+n, stored as log c_i (-inf for an absent term).
struct TopLineTilt {
  int m = 1;
  int n = 1;
  std::vector<double> log_c;
};

/// The tilt equal to gamma_log_weight, on J[g.m()-1, g.n()-1].
TopLineTilt gamma_tilt(const ConditioningProfile& g);
/// The tilt equal to band_log_weight for the given top lines, on J[m-w, n-w].
TopLineTilt band_tilt(const DensityModel& model, const LineEnsemble& top, int w);
/// -sum_i c_i exp(top_log[i-1]).
double tilt_log_weight(const TopLineTilt& tilt, const std::vector<double>& top_log);

/// Metropolis sampler for an m x n inverse-gamma(theta) grid whose law is
/// reweighted by a top-line tilt. Each site in turn proposes a fresh
/// inverse-gamma weight. The tilt is linear in every single weight, so a
/// sweep costs O(mn): backward path sums are refreshed once per sweep and
/// forward ones are carried along the sweep.
class TiltedGridChain {
 public:
  /// Starts from an untilted grid drawn with `seed`.
  TiltedGridChain(TopLineTilt tilt, double theta, std::uint64_t seed);

  void sweep();
  WeightGrid grid() const;
  /// Current value of the tilt's log weight.
  double log_weight() const;
  std::size_t proposals() const noexcept { return proposals_; }
  std::size_t accepted() const noexcept { return accepted_; }

 private:
  std::size_t at(int i, int j) const noexcept { return static_cast<std::size_t>(j - 1) * tilt_.m + (i - 1); }

  TopLineTilt tilt_;
  double theta_;
  Stream rng_;
  std::vector<double> log_x_;
  std::size_t proposals_ = 0, accepted_ = 0;
};

}  // namespace polylab
