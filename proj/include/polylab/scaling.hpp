#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polylab/bk.hpp"

namespace polylab {

/// Point (x, s; y, t) of the rescaled field, s < t.
struct QueryPoint {
  double x = 0.0;
  double s = 0.0;
  double y = 0.0;
  double t = 1.0;
};

/// Starts (x1, s), (x2, s) and ends (y1, t), (y2, t - 1/n) of the rescaled
/// two-path field.
struct K2Query {
  double x1 = 0.0;
  double x2 = 1.0;
  double y1 = 0.0;
  double y2 = 1.0;
  double s = 0.0;
  double t = 1.0;
};

/// Sampling plan at one scaling level. The lattice point of (x, s) is
/// (ns + 2 sqrt(n) x, ns) with inverse-gamma(2 sqrt(n)) weights; ns and nt
/// must be integers and the column coordinate is interpolated linearly.
struct RescaledFieldSpec {
  int n = 16;
  std::vector<QueryPoint> region;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  /// Largest allowed n (t - s) and 2 sqrt(n) |y - x| over the queries.
  double budget = 4096.0;
  /// All weights equal to 1, for checking the deterministic factors.
  bool unit_weights = false;
  int workers = 1;

  double theta() const;
  void validate() const;
};

/// Log samples, log_values[point][replica]; -inf where the field vanishes.
struct FieldSamples {
  int n = 0;
  std::vector<std::vector<double>> log_values;
  /// Per point: replicas where a determinant could not be resolved even in
  /// extended precision (two-path field only).
  std::vector<std::size_t> degenerate;
};

/// log of n^{1/2} (2^{-1}(2 sqrt(n) - 1))^steps.
double z_n_log_factor(int n, long steps);
/// log of n (2^{-1}(2 sqrt(n) - 1))^steps.
double k2_n_log_factor(int n, long steps);

/// The rescaled single-path field at every point of spec.region. Off-lattice
/// columns are interpolated bilinearly in the linear domain between the four
/// surrounding lattice values of the rescaled field. Throws BudgetExceeded
/// when a query is over the budget.
FieldSamples sample_z_n(const RescaledFieldSpec& spec);

/// The rescaled two-path field T([(p1,ns),(p2,ns)];[(r1,nt),(r2,nt-1)]) n
/// c^steps, interpolated multilinearly in the four column coordinates.
/// Needs x1 <= x2, y1 <= y2 and t >= s + 1/n.
FieldSamples sample_k2_n(const RescaledFieldSpec& spec, const std::vector<K2Query>& queries);
FieldSamples sample_k2_n(const RescaledFieldSpec& spec, const K2Query& query);

struct LevelSummary {
  int n = 0;
  /// Per query point, over the finite log values.
  std::vector<double> mean, variance;
  /// Per query point, the 5/25/50/75/95% quantiles.
  std::vector<std::vector<double>> quantiles;
};

struct ConvergenceReport {
  std::vector<LevelSummary> levels;
  /// ks[k][p]: two-sample KS distance between levels k and k+1 at point p.
  std::vector<std::vector<double>> ks;
  /// Per point: set when the KS sequence fails to decrease strictly.
  std::vector<bool> non_decreasing;
  /// The same after multiplying level n by 2 sqrt(n) - 1, the reciprocal
  /// mean weight. With that factor E of the field tends to the heat kernel
  /// (pi t)^{-1/2} exp(-(y-x)^2 / t); without it the log field drifts by
  /// -1/2 log n.
  std::vector<std::vector<double>> ks_vertex_factor;
  std::vector<bool> non_decreasing_vertex_factor;
  /// KS trends are soft diagnostics.
  std::vector<std::string> warnings;
};

/// Needs at least two levels sharing one region and 1000 replicas each.
ConvergenceReport convergence_diagnostic(const std::vector<RescaledFieldSpec>& levels);

/// Placement of the finite-n comparison behind the continuum statement, in
/// diffusive units: starts (0, 0) and (x2, 0), the conditioning top line at
/// time t, and right ends (y, t - 1/n) for y in `ends`, each y > 0.
struct SurrogateGeometry {
  double t = 1.0;
  double x2 = 1.0;
  std::vector<double> ends{0.5, 1.0};
};

/// Lattice parameters of bk_endpoint_variation for a surrogate geometry:
/// rows = b = nt, a = 1 + 2 sqrt(n) x2, b'_k = b + 2 sqrt(n) y_k (all
/// rounded to the nearest integer), m = the largest b'.
struct SurrogateLattice {
  int rows = 0;
  int b = 0;
  int a = 0;
  int m = 0;
  std::vector<int> b_prime;
};
SurrogateLattice surrogate_lattice(int n, const SurrogateGeometry& geometry);

/// bk_endpoint_variation at theta = 2 sqrt(n) on the surrogate lattice.
/// Event coordinates are (k, 1) for the k-th end, with thresholds on the log
/// of the rescaled value n^{1/2} c^steps T1, steps being the lattice length
/// of the unconditioned path; the same shift applies to both sides.
BkVerdict prelimit_bk_surrogate(int n, const SurrogateGeometry& geometry, const IncreasingEvent& event,
                                std::uint64_t g_seed, std::size_t replicas, std::uint64_t seed,
                                const BkOptions& opt = {});
std::vector<BkVerdict> prelimit_bk_surrogate(int n, const SurrogateGeometry& geometry,
                                             const std::vector<IncreasingEvent>& events, std::uint64_t g_seed,
                                             std::size_t replicas, std::uint64_t seed, const BkOptions& opt = {});

/// log of the rescaled value at end k (1-based) of the unconditioned side
/// on `count` fresh grids, for placing thresholds at quantiles.
std::vector<double> surrogate_rhs_log_samples(int n, const SurrogateGeometry& geometry, int k, std::size_t count,
                                              std::uint64_t seed, int workers = 1);

nlohmann::ordered_json to_json(const ConvergenceReport& r);
/// Columns: n, point, replica, value (log of the field).
void write_samples_csv(std::ostream& os, const FieldSamples& s);

}  // namespace polylab
