#include "polylab/partition.hpp"

#include <algorithm>
#include <cstdint>

#include "polylab/errors.hpp"

namespace polylab {

std::string to_string(Point p) { return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")"; }

bool planar_ordered(const std::vector<Point>& pts) noexcept {
  for (std::size_t r = 1; r < pts.size(); ++r) {
    const Point a = pts[r - 1], b = pts[r];
    if (b.i < a.i || b.j > a.j || a == b) return false;
  }
  return true;
}

void validate_spec(const WeightGrid& grid, const EndpointSpec& spec) {
  if (spec.starts.empty() || spec.starts.size() != spec.ends.size())
    throw InvalidInput("endpoint spec needs k >= 1 starts and k ends");
  for (const auto* pts : {&spec.starts, &spec.ends}) {
    for (Point p : *pts) {
      if (!grid.contains(p.i, p.j)) throw InvalidInput("point " + to_string(p) + " outside grid");
    }
    if (!planar_ordered(*pts)) throw InvalidInput("endpoints are not planar ordered");
  }
}

template <class S>
ScalarGrid<S>::ScalarGrid(const WeightGrid& g) : m_(g.m()), n_(g.n()) {
  w_.reserve(static_cast<std::size_t>(m_) * n_);
  for (int j = 1; j <= n_; ++j)
    for (int i = 1; i <= m_; ++i) w_.push_back(ScalarTraits<S>::from_lognum(g(i, j)));
}

template <class S>
Table<S> t1_forward(const ScalarGrid<S>& g, Point u) {
  Table<S> t(g.m(), g.n());
  const S zero = ScalarTraits<S>::zero();
  for (int j = u.j; j <= g.n(); ++j) {
    for (int i = u.i; i <= g.m(); ++i) {
      if (i == u.i && j == u.j) {
        t(i, j) = g(i, j);
        continue;
      }
      const S left = i > u.i ? t(i - 1, j) : zero;
      const S down = j > u.j ? t(i, j - 1) : zero;
      t(i, j) = g(i, j) * (left + down);
    }
  }
  return t;
}

template <class S>
Table<S> t1_backward(const ScalarGrid<S>& g, Point v) {
  Table<S> t(g.m(), g.n());
  const S zero = ScalarTraits<S>::zero();
  for (int j = v.j; j >= 1; --j) {
    for (int i = v.i; i >= 1; --i) {
      if (i == v.i && j == v.j) {
        t(i, j) = g(i, j);
        continue;
      }
      const S right = i < v.i ? t(i + 1, j) : zero;
      const S up = j < v.j ? t(i, j + 1) : zero;
      t(i, j) = g(i, j) * (right + up);
    }
  }
  return t;
}

template <class S>
S t1_as(const ScalarGrid<S>& g, Point u, Point v) {
  if (u.i < 1 || u.j < 1 || u.i > g.m() || u.j > g.n() || v.i < 1 || v.j < 1 || v.i > g.m() ||
      v.j > g.n())
    throw InvalidInput("t1: endpoint outside grid");
  const S zero = ScalarTraits<S>::zero();
  if (v.i < u.i || v.j < u.j) return zero;
  // col[j - u.j] holds T1(u, (i, j)) for the current column i.
  std::vector<S> col(static_cast<std::size_t>(v.j - u.j + 1), zero);
  for (int i = u.i; i <= v.i; ++i) {
    S below = zero;
    for (int j = u.j; j <= v.j; ++j) {
      S& c = col[j - u.j];
      S in = c + below;
      if (i == u.i && j == u.j) in = ScalarTraits<S>::one();
      c = g(i, j) * in;
      below = c;
    }
  }
  return col.back();
}

LogNum t1(const WeightGrid& grid, Point u, Point v) { return t1_as(ScalarGrid<LogNum>(grid), u, v); }

template <class S>
BasicDetResult<S> t_disjoint_as(const ScalarGrid<S>& g, const EndpointSpec& spec,
                                double pivot_threshold) {
  const std::size_t k = spec.k();
  SquareMatrix<S> mat(k, ScalarTraits<S>::zero());
  for (std::size_t r = 0; r < k; ++r) {
    const Table<S> fw = t1_forward(g, spec.starts[r]);
    for (std::size_t s = 0; s < k; ++s) mat(r, s) = fw(spec.ends[s].i, spec.ends[s].j);
  }
  return ScalarTraits<S>::det(mat, pivot_threshold);
}

DetResult t_disjoint(const WeightGrid& grid, const EndpointSpec& spec, double pivot_threshold) {
  validate_spec(grid, spec);
  return t_disjoint_as(ScalarGrid<LogNum>(grid), spec, pivot_threshold);
}

EndpointSpec nested_spec(Point u, Point v, int k) {
  if (k < 1) throw InvalidInput("k must be positive");
  EndpointSpec s;
  for (int r = 1; r <= k; ++r) {
    s.starts.push_back({u.i + r - 1, u.j});
    s.ends.push_back({v.i - k + r, v.j});
  }
  return s;
}

DetResult t_k_nested(const WeightGrid& grid, Point u, Point v, int k) {
  const EndpointSpec s = nested_spec(u, v, k);
  // Shifted endpoints falling off the grid leave no disjoint family.
  for (std::size_t r = 0; r < s.k(); ++r) {
    if (!grid.contains(s.starts[r].i, s.starts[r].j) || !grid.contains(s.ends[r].i, s.ends[r].j)) {
      if (!grid.contains(u.i, u.j) || !grid.contains(v.i, v.j))
        throw InvalidInput("t_k_nested: endpoint outside grid");
      return DetResult{};
    }
  }
  return t_disjoint(grid, s);
}

namespace {

struct Enumerator {
  const WeightGrid& grid;
  const EndpointSpec& spec;
  std::uint64_t max_steps;
  std::uint64_t steps = 0;
  std::uint64_t occupied = 0;
  LogNum total;

  int bit(int i, int j) const { return (j - 1) * grid.m() + (i - 1); }

  void path(std::size_t r, int i, int j, LogNum acc) {
    if (++steps > max_steps) throw BudgetExceeded("brute_force_disjoint: step budget exhausted");
    const std::uint64_t b = std::uint64_t{1} << bit(i, j);
    if (occupied & b) return;
    acc *= grid(i, j);
    if (acc.is_zero()) return;
    const Point v = spec.ends[r];
    occupied |= b;
    if (i == v.i && j == v.j) {
      if (r + 1 == spec.k()) {
        total += acc;
      } else {
        const Point u = spec.starts[r + 1];
        path(r + 1, u.i, u.j, acc);
      }
    } else {
      if (i < v.i) path(r, i + 1, j, acc);
      if (j < v.j) path(r, i, j + 1, acc);
    }
    occupied &= ~b;
  }
};

}  // namespace

LogNum brute_force_disjoint(const WeightGrid& grid, const EndpointSpec& spec,
                            const EnumerationBudget& budget) {
  if (grid.m() * grid.n() > std::min(budget.max_cells, 64))
    throw BudgetExceeded("brute_force_disjoint: grid has more cells than the budget allows");
  if (static_cast<int>(spec.k()) > budget.max_paths)
    throw BudgetExceeded("brute_force_disjoint: too many paths for the budget");
  if (spec.starts.empty() || spec.starts.size() != spec.ends.size())
    throw InvalidInput("endpoint spec needs k >= 1 starts and k ends");
  for (std::size_t r = 0; r < spec.k(); ++r) {
    const Point u = spec.starts[r], v = spec.ends[r];
    if (!grid.contains(u.i, u.j) || !grid.contains(v.i, v.j)) throw InvalidInput("point outside grid");
    if (v.i < u.i || v.j < u.j) return LogNum::zero();
  }
  Enumerator e{grid, spec, budget.max_steps, 0, 0, LogNum::zero()};
  e.path(0, spec.starts[0].i, spec.starts[0].j, LogNum::one());
  return e.total;
}

template class ScalarGrid<LogNum>;
template class ScalarGrid<ExtendedReal>;
template class ScalarGrid<DeepReal>;
template Table<LogNum> t1_forward(const ScalarGrid<LogNum>&, Point);
template Table<ExtendedReal> t1_forward(const ScalarGrid<ExtendedReal>&, Point);
template Table<DeepReal> t1_forward(const ScalarGrid<DeepReal>&, Point);
template Table<LogNum> t1_backward(const ScalarGrid<LogNum>&, Point);
template Table<ExtendedReal> t1_backward(const ScalarGrid<ExtendedReal>&, Point);
template Table<DeepReal> t1_backward(const ScalarGrid<DeepReal>&, Point);
template LogNum t1_as(const ScalarGrid<LogNum>&, Point, Point);
template ExtendedReal t1_as(const ScalarGrid<ExtendedReal>&, Point, Point);
template DeepReal t1_as(const ScalarGrid<DeepReal>&, Point, Point);
template BasicDetResult<LogNum> t_disjoint_as(const ScalarGrid<LogNum>&, const EndpointSpec&, double);
template BasicDetResult<ExtendedReal> t_disjoint_as(const ScalarGrid<ExtendedReal>&, const EndpointSpec&,
                                                    double);
template BasicDetResult<DeepReal> t_disjoint_as(const ScalarGrid<DeepReal>&, const EndpointSpec&,
                                                    double);

}  // namespace polylab
