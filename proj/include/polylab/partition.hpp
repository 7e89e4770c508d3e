#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polylab/environment.hpp"
#include "polylab/lognum.hpp"
#include "polylab/scalar.hpp"

namespace polylab {

struct Point {
  int i = 1;  ///< column
  int j = 1;  ///< row
  friend bool operator==(Point a, Point b) noexcept { return a.i == b.i && a.j == b.j; }
};

std::string to_string(Point p);

/// Endpoints of a k-path family; path r runs from starts[r] to ends[r].
struct EndpointSpec {
  std::vector<Point> starts;
  std::vector<Point> ends;
  std::size_t k() const noexcept { return starts.size(); }
};

/// True if consecutive points move weakly east and weakly south and never
/// repeat. For both starts and ends this forces every path from u_r to
/// v_s (r < s) to meet every path from u_s to v_r, so only the identity
/// permutation survives in the LGV expansion.
bool planar_ordered(const std::vector<Point>& pts) noexcept;

/// Throws InvalidInput when the spec is empty, unbalanced, outside the grid
/// or not planar ordered.
void validate_spec(const WeightGrid& grid, const EndpointSpec& spec);

/// Grid weights converted to the scalar S once, for repeated DP sweeps.
template <class S>
class ScalarGrid {
 public:
  explicit ScalarGrid(const WeightGrid& g);
  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  const S& operator()(int i, int j) const noexcept { return w_[static_cast<std::size_t>(j - 1) * m_ + (i - 1)]; }

 private:
  int m_, n_;
  std::vector<S> w_;
};

/// Dense m x n table addressed like the grid.
template <class S>
struct Table {
  int m = 0, n = 0;
  std::vector<S> v;
  Table() = default;
  Table(int m_, int n_) : m(m_), n(n_), v(static_cast<std::size_t>(m_) * n_, ScalarTraits<S>::zero()) {}
  S& operator()(int i, int j) { return v[static_cast<std::size_t>(j - 1) * m + (i - 1)]; }
  const S& operator()(int i, int j) const { return v[static_cast<std::size_t>(j - 1) * m + (i - 1)]; }
};

/// T1(u, w) for every w in the grid (zero unless w >= u).
template <class S>
Table<S> t1_forward(const ScalarGrid<S>& g, Point u);
/// T1(w, v) for every w in the grid (zero unless w <= v).
template <class S>
Table<S> t1_backward(const ScalarGrid<S>& g, Point v);

/// Single-path partition function, rolling-column DP over the rectangle [u, v].
template <class S>
S t1_as(const ScalarGrid<S>& g, Point u, Point v);
LogNum t1(const WeightGrid& grid, Point u, Point v);

/// Vertex-disjoint k-path partition function as det(T1(u_r, v_s)).
template <class S>
BasicDetResult<S> t_disjoint_as(const ScalarGrid<S>& g, const EndpointSpec& spec,
                                double pivot_threshold = ScalarTraits<S>::kPivotThreshold);
DetResult t_disjoint(const WeightGrid& grid, const EndpointSpec& spec,
                     double pivot_threshold = kDefaultPivotThreshold);

/// Starts u + (r-1, 0), ends v + (r-k, 0), r = 1..k.
EndpointSpec nested_spec(Point u, Point v, int k);
DetResult t_k_nested(const WeightGrid& grid, Point u, Point v, int k);

struct EnumerationBudget {
  int max_cells = 36;
  int max_paths = 3;
  std::uint64_t max_steps = 200'000'000;
};

/// Direct enumeration of all vertex-disjoint path tuples. Throws
/// BudgetExceeded when the instance is larger than the budget allows.
LogNum brute_force_disjoint(const WeightGrid& grid, const EndpointSpec& spec,
                            const EnumerationBudget& budget = {});

}  // namespace polylab
