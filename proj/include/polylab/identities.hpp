#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polylab/environment.hpp"
#include "polylab/grsk.hpp"
#include "polylab/partition.hpp"

namespace polylab {

struct IdentityFailure {
  std::string inputs;
  LogNum lhs;
  LogNum rhs;
};

/// Residuals are |log|lhs| - log|rhs||; a sign mismatch, or one side zero
/// while the other is not, is a failure regardless of tolerance.
struct IdentityReport {
  std::string name;
  double tolerance = 1e-8;
  std::size_t cases = 0;
  std::size_t zero_agreements = 0;
  std::size_t failure_count = 0;
  /// Case evaluations repeated at a higher precision tier.
  std::size_t extended_reruns = 0;
  double max_residual = 0.0;
  std::vector<IdentityFailure> failures;  ///< first few failures only

  bool passed() const noexcept { return failure_count == 0; }
  void merge(const IdentityReport& other);
};

struct IdentityOptions {
  double tol = 1e-8;
  Precision precision = Precision::adaptive;
  /// `standard` evaluates in LogNum only; `extended` starts at ExtendedReal
  /// and `adaptive` at LogNum, and both escalate a case (finally to DeepReal)
  /// while a determinant's relative error bound exceeds this.
  double max_rel_error = 1e-11;
  std::size_t max_failures_kept = 20;
};

/// LGV determinant against direct enumeration.
IdentityReport check_lgv(const WeightGrid& grid, const EndpointSpec& spec, const IdentityOptions& opt = {});

/// T([(a_i,1)], [top ends (b_1..b_ell, n), right ends (m, b_{ell+1}..b_k)])
/// against S with lifted starts and ends (b, n), (m+b, b).
IdentityReport check_extended_invariance(const WeightGrid& grid, int k, int ell, const std::vector<int>& a,
                                         const std::vector<int>& b, const IdentityOptions& opt = {});

/// Cross-line sum for T1((a,1),(m,b)) and its partial sums from every j.
IdentityReport check_cross_line(const WeightGrid& grid, int a, int b, const IdentityOptions& opt = {});

/// T1((a,1),(m,b)) = F_{a,b}; when 2 <= a and b <= n-1 also the two-path
/// ratio over T1((1,1),(m,n)) against F_{a-1,b} on the sub-ensemble.
IdentityReport check_corollary_ratio(const WeightGrid& grid, int a, int b, const IdentityOptions& opt = {});

/// w padding paths: T([(1,1)^w,(a,1)],[(m,n)^w,(m,ell)]) / T_w((1,1),(m,n))
/// against the k-path S on the ensemble with the top w lines removed.
IdentityReport check_multipoint_ratio(const WeightGrid& grid, int w, const std::vector<int>& a,
                                      const std::vector<int>& ell, const IdentityOptions& opt = {});

struct ExtendedCase {
  int k = 1;
  int ell = 0;
  std::vector<int> a;
  std::vector<int> b;
};
/// Every (k, ell, a, b) with k <= kmax whose right ends are vertices.
std::vector<ExtendedCase> extended_invariance_cases(int m, int n, int kmax);

struct MultipointCase {
  int w = 1;
  std::vector<int> a;
  std::vector<int> ell;
};
/// Every tuple with w < a_1 < .. < a_k <= m, n - w > ell_1 > .. > ell_k >= 0, k <= kmax.
std::vector<MultipointCase> multipoint_cases(int m, int n, int w, int kmax);
bool in_multipoint_domain(int m, int n, const MultipointCase& c) noexcept;

/// Exhaustive checks on one grid; these share per-grid tables across cases.
IdentityReport check_extended_invariance_all(const WeightGrid& grid, int kmax, const IdentityOptions& opt = {});
IdentityReport check_cross_line_all(const WeightGrid& grid, const IdentityOptions& opt = {});
IdentityReport check_corollary_all(const WeightGrid& grid, const IdentityOptions& opt = {});
IdentityReport check_multipoint_all(const WeightGrid& grid, int wmax, int kmax, const IdentityOptions& opt = {});

/// Weights log-uniform over [1e-6, 1e6]; odd seeds use only the two extremes
/// times a factor in [1/2, 2].
WeightGrid adversarial_grid(int m, int n, std::uint64_t seed);

enum class GridFamily { ig_half, ig_two, ig_eight, uniform, adversarial };
inline constexpr int kGridFamilies = 5;
GridFamily family_for(std::size_t index) noexcept;
const char* to_string(GridFamily f);
WeightGrid family_grid(GridFamily f, int m, int n, std::uint64_t seed);

/// Random planar-ordered k-path endpoint family inside an m x n grid.
EndpointSpec random_endpoint_spec(int m, int n, int k, std::uint64_t seed);

struct SuiteConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  IdentityOptions options;
};

/// `grids` random grids of shapes up to 5x5, one random spec per k = 1..3.
IdentityReport run_lgv_suite(std::size_t grids, const SuiteConfig& cfg);
/// Exhaustive cases, kmax 5, on every shape 2 <= m <= 6, 2 <= n <= 5 for each seed.
IdentityReport run_extended_invariance_suite(std::size_t seeds, const SuiteConfig& cfg);
/// All (a, b, j) on 5x4 grids.
IdentityReport run_cross_line_suite(std::size_t seeds, const SuiteConfig& cfg);
/// Corollary j = 1, 2 and multipoint w <= 2 on 5x4 grids.
IdentityReport run_ratio_suite(std::size_t seeds, const SuiteConfig& cfg);

}  // namespace polylab
