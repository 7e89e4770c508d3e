#pragma once

#include <string>
#include <vector>

#include "polylab/environment.hpp"
#include "polylab/partition.hpp"
#include "polylab/scalar.hpp"

namespace polylab {

/// J[m,n] = J1 u J2: column i in [1, m+n], line j counted from the top.
class IndexSet {
 public:
  IndexSet(int m, int n);

  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  int lines() const noexcept { return m_ < n_ ? m_ : n_; }
  int columns() const noexcept { return m_ + n_; }

  bool in_j1(int i, int j) const noexcept { return i >= 1 && i <= m_ && j >= 1 && j <= std::min(i, n_); }
  bool in_j2(int i, int j) const noexcept {
    return i > m_ && i <= m_ + n_ && j >= 1 && j <= std::min(m_ + n_ + 1 - i, m_);
  }
  bool contains(int i, int j) const noexcept { return in_j1(i, j) || in_j2(i, j); }
  /// Number of lines present at column i.
  int height(int i) const noexcept;
  std::size_t size() const noexcept;
  /// Members in column-major order, lines ascending within a column.
  std::vector<std::pair<int, int>> members() const;

  friend bool operator==(const IndexSet& a, const IndexSet& b) noexcept { return a.m_ == b.m_ && a.n_ == b.n_; }

 private:
  int m_, n_;
};

/// Values z_j(i) on J[m,n].
template <class S>
class BasicLineEnsemble {
 public:
  explicit BasicLineEnsemble(IndexSet idx);

  const IndexSet& index() const noexcept { return idx_; }
  int m() const noexcept { return idx_.m(); }
  int n() const noexcept { return idx_.n(); }
  const S& z(int i, int j) const;
  S& z(int i, int j);

  /// Some determinant behind a value lost its significant digits.
  bool degenerate = false;
  /// Smallest normalized pivot met while building the values.
  double min_pivot = 1.0;
  /// Bound on the relative error of any value, from the determinant bounds.
  double rel_error = 0.0;

 private:
  std::size_t slot(int i, int j) const;
  IndexSet idx_;
  std::vector<S> z_;
};

using LineEnsemble = BasicLineEnsemble<LogNum>;

/// z_j(i) = T_j / T_{j-1} over (1,1) -> (i,n) on J1 and (1,i-m) -> (m,n) on J2.
template <class S>
BasicLineEnsemble<S> build_ensemble_as(const ScalarGrid<S>& g);
/// LogNum ensemble; recomputed in ExtendedReal (then DeepReal) and rounded
/// when the determinant error bound exceeds max_rel_error. Throws
/// Unsupported when the grid carries a zero weight.
LineEnsemble build_ensemble(const WeightGrid& grid, double max_rel_error = 1e-10);

/// Max |log z_j(m) - log z_j(m+1)| over the glued lines.
double gluing_residual(const LineEnsemble& ens);

/// {z_{j+1}(i+1)} on J[m-1, n-1].
template <class S>
BasicLineEnsemble<S> virtual_sub_ensemble(const BasicLineEnsemble<S>& ens);
/// w-fold virtual_sub_ensemble: {z_{j+w}(i+w)} on J[m-w, n-w].
template <class S>
BasicLineEnsemble<S> strip_top_lines(const BasicLineEnsemble<S>& ens, int w);

LineEnsemble to_lognum(const BasicLineEnsemble<ExtendedReal>& e);

/// JSON object {m, n, entries: [{i, j, logz}]}.
std::string ensemble_to_json(const LineEnsemble& ens);
LineEnsemble ensemble_from_json(const std::string& text);

/// Vertex of the joint graph V[m,n] in flipped coordinates: y = n + 1 - line.
/// Columns 1..m are the left part, m+1..m+n the right part; the auxiliary
/// vertex between columns m and m+1 is stored with i = m and aux = true.
struct Vertex {
  int i = 1;
  int j = 1;
  bool aux = false;
  friend bool operator==(Vertex a, Vertex b) noexcept { return a.i == b.i && a.j == b.j && a.aux == b.aux; }
};

std::string to_string(Vertex v);

/// (x,1)^up = (x, max(n - x + 1, 1)).
Vertex lift_start(int x, int n);
/// (m,b)^right = (m + b, b).
Vertex lift_right_end(int m, int b);

/// Y weights on V[m,n] and the joint DAG: up-right on the left part,
/// down-right on the right part, crossing only through (m,j) -> aux -> (m+1,j).
template <class S>
class BasicIncrementField {
 public:
  explicit BasicIncrementField(const BasicLineEnsemble<S>& ens);

  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  bool contains(Vertex v) const noexcept;
  const S& y(Vertex v) const;
  const std::vector<Vertex>& topological_order() const noexcept { return order_; }
  std::vector<Vertex> successors(Vertex v) const;
  std::vector<Vertex> predecessors(Vertex v) const;

  /// S(u, w) for every vertex w, indexed by slot(w); zero where unreachable.
  std::vector<S> paths_from(Vertex u) const;
  std::size_t slot(Vertex v) const noexcept;
  std::size_t slot_count() const noexcept { return y_.size(); }

 private:
  int m_, n_;
  std::vector<S> y_;
  std::vector<char> present_;
  std::vector<Vertex> order_;
};

using IncrementField = BasicIncrementField<LogNum>;

template <class S>
BasicIncrementField<S> build_increments(const BasicLineEnsemble<S>& ens) {
  return BasicIncrementField<S>(ens);
}

/// Consecutive vertices move weakly east and south on the left part and
/// weakly west and south on the right part; a family may pass from the
/// left part to the right part once.
bool s_planar_ordered(const std::vector<Vertex>& v, int m) noexcept;

/// k = 1 by DP in topological order, k > 1 as det of single-path values.
template <class S>
BasicDetResult<S> s_partition(const BasicIncrementField<S>& inc, const std::vector<Vertex>& starts,
                              const std::vector<Vertex>& ends);

/// Direct enumeration of disjoint path pairs on the joint graph, k <= 2.
LogNum s_brute_force(const IncrementField& inc, const std::vector<Vertex>& starts,
                     const std::vector<Vertex>& ends);

/// S from (a,1)^up to (m,b)^right. Throws InvalidInput when either lifted
/// point is not a vertex (the right end is missing when b <= n - m).
template <class S>
S f_function(const BasicIncrementField<S>& inc, int a, int b);
LogNum f_function(const LineEnsemble& ens, int a, int b);

}  // namespace polylab
