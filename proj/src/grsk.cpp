#include "polylab/grsk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "polylab/errors.hpp"

namespace polylab {

IndexSet::IndexSet(int m, int n) : m_(m), n_(n) {
  if (m < 1 || n < 1) throw InvalidInput("index set dimensions must be positive");
}

int IndexSet::height(int i) const noexcept {
  if (i >= 1 && i <= m_) return std::min(i, n_);
  if (i > m_ && i <= m_ + n_) return std::min(m_ + n_ + 1 - i, m_);
  return 0;
}

std::size_t IndexSet::size() const noexcept {
  std::size_t s = 0;
  for (int i = 1; i <= columns(); ++i) s += static_cast<std::size_t>(height(i));
  return s;
}

std::vector<std::pair<int, int>> IndexSet::members() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(size());
  for (int i = 1; i <= columns(); ++i)
    for (int j = 1; j <= height(i); ++j) out.emplace_back(i, j);
  return out;
}

template <class S>
BasicLineEnsemble<S>::BasicLineEnsemble(IndexSet idx)
    : idx_(idx), z_(static_cast<std::size_t>(idx.columns()) * idx.lines(), ScalarTraits<S>::zero()) {}

template <class S>
std::size_t BasicLineEnsemble<S>::slot(int i, int j) const {
  if (!idx_.contains(i, j))
    throw InvalidInput("(" + std::to_string(i) + "," + std::to_string(j) + ") is not in J[" +
                       std::to_string(idx_.m()) + "," + std::to_string(idx_.n()) + "]");
  return static_cast<std::size_t>(i - 1) * idx_.lines() + (j - 1);
}

template <class S>
const S& BasicLineEnsemble<S>::z(int i, int j) const {
  return z_[slot(i, j)];
}

template <class S>
S& BasicLineEnsemble<S>::z(int i, int j) {
  return z_[slot(i, j)];
}

template <class S>
BasicLineEnsemble<S> build_ensemble_as(const ScalarGrid<S>& g) {
  const int m = g.m(), n = g.n();
  const IndexSet idx(m, n);
  const int L = idx.lines();
  BasicLineEnsemble<S> ens(idx);

  // fw[r] = T1((r,1), .), bw[r] = T1(., (m-r+1, n)).
  std::vector<Table<S>> fw, bw;
  for (int r = 1; r <= L; ++r) {
    fw.push_back(t1_forward(g, Point{r, 1}));
    bw.push_back(t1_backward(g, Point{m - r + 1, n}));
  }

  auto ratio_column = [&](int col, int lines, auto entry) {
    S prev = ScalarTraits<S>::one();
    double prev_err = 0.0;
    for (int j = 1; j <= lines; ++j) {
      SquareMatrix<S> mat(static_cast<std::size_t>(j));
      for (int r = 0; r < j; ++r)
        for (int s = 0; s < j; ++s) mat(r, s) = entry(j, r, s);
      const BasicDetResult<S> d = ScalarTraits<S>::det(mat);
      ens.degenerate |= d.degenerate;
      ens.min_pivot = std::min(ens.min_pivot, d.min_pivot);
      ens.rel_error = std::max(ens.rel_error, d.rel_error + prev_err);
      ens.z(col, j) = d.value / prev;
      prev = d.value;
      prev_err = d.rel_error;
    }
  };

  for (int i = 1; i <= m; ++i) {
    // T_j((1,1),(i,n)): starts (r,1), ends (i-j+1+s, n).
    ratio_column(i, idx.height(i), [&](int j, int r, int s) { return fw[r](i - j + 1 + s, n); });
  }
  for (int i = m + 1; i <= m + n; ++i) {
    const int row = i - m;
    // T_j((1,row),(m,n)): starts (1+r, row), ends (m-j+1+s, n) = bw[j-1-s].
    ratio_column(i, idx.height(i), [&](int j, int r, int s) { return bw[j - 1 - s](1 + r, row); });
  }
  return ens;
}

namespace {

template <class S>
LineEnsemble rounded(const BasicLineEnsemble<S>& e) {
  LineEnsemble out(e.index());
  for (auto [i, j] : e.index().members()) out.z(i, j) = ScalarTraits<S>::to_lognum(e.z(i, j));
  out.degenerate = e.degenerate;
  out.min_pivot = e.min_pivot;
  out.rel_error = e.rel_error;
  return out;
}

}  // namespace

LineEnsemble build_ensemble(const WeightGrid& grid, double max_rel_error) {
  if (grid.has_zero()) throw Unsupported("line ensemble needs strictly positive weights");
  LineEnsemble ens = build_ensemble_as(ScalarGrid<LogNum>(grid));
  if (ens.rel_error <= max_rel_error) return ens;
  const auto ext = build_ensemble_as(ScalarGrid<ExtendedReal>(grid));
  if (ext.rel_error <= max_rel_error * 1e-30) return rounded(ext);
  return rounded(build_ensemble_as(ScalarGrid<DeepReal>(grid)));
}

double gluing_residual(const LineEnsemble& ens) {
  double r = 0.0;
  const int m = ens.m();
  for (int j = 1; j <= ens.index().lines(); ++j) r = std::max(r, std::fabs(ens.z(m, j).logmag() - ens.z(m + 1, j).logmag()));
  return r;
}

template <class S>
BasicLineEnsemble<S> virtual_sub_ensemble(const BasicLineEnsemble<S>& ens) {
  if (ens.m() < 2 || ens.n() < 2) throw InvalidInput("virtual sub-ensemble needs m, n >= 2");
  BasicLineEnsemble<S> sub(IndexSet(ens.m() - 1, ens.n() - 1));
  for (auto [i, j] : sub.index().members()) sub.z(i, j) = ens.z(i + 1, j + 1);
  sub.degenerate = ens.degenerate;
  sub.min_pivot = ens.min_pivot;
  sub.rel_error = ens.rel_error;
  return sub;
}

template <class S>
BasicLineEnsemble<S> strip_top_lines(const BasicLineEnsemble<S>& ens, int w) {
  if (w < 0 || w >= std::min(ens.m(), ens.n())) throw InvalidInput("strip_top_lines: need 0 <= w < min(m,n)");
  BasicLineEnsemble<S> out = ens;
  for (int r = 0; r < w; ++r) out = virtual_sub_ensemble(out);
  return out;
}

LineEnsemble to_lognum(const BasicLineEnsemble<ExtendedReal>& e) { return rounded(e); }

std::string ensemble_to_json(const LineEnsemble& ens) {
  nlohmann::ordered_json j;
  j["m"] = ens.m();
  j["n"] = ens.n();
  j["entries"] = nlohmann::ordered_json::array();
  for (auto [i, l] : ens.index().members()) {
    const LogNum& z = ens.z(i, l);
    nlohmann::ordered_json e;
    e["i"] = i;
    e["j"] = l;
    e["logz"] = z.is_zero() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(z.logmag());
    j["entries"].push_back(e);
  }
  return j.dump();
}

LineEnsemble ensemble_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  LineEnsemble ens(IndexSet(j.at("m").get<int>(), j.at("n").get<int>()));
  std::size_t seen = 0;
  for (const auto& e : j.at("entries")) {
    const auto& lz = e.at("logz");
    ens.z(e.at("i").get<int>(), e.at("j").get<int>()) = lz.is_null() ? LogNum::zero() : LogNum::from_log(lz.get<double>());
    ++seen;
  }
  if (seen != ens.index().size()) throw InvalidInput("ensemble JSON does not cover J[m,n]");
  return ens;
}

std::string to_string(Vertex v) {
  if (v.aux) return "(" + std::to_string(v.i) + "+1/2," + std::to_string(v.j) + ")";
  return "(" + std::to_string(v.i) + "," + std::to_string(v.j) + ")";
}

Vertex lift_start(int x, int n) { return Vertex{x, std::max(n - x + 1, 1), false}; }

Vertex lift_right_end(int m, int b) { return Vertex{m + b, b, false}; }

template <class S>
BasicIncrementField<S>::BasicIncrementField(const BasicLineEnsemble<S>& ens) : m_(ens.m()), n_(ens.n()) {
  const IndexSet& idx = ens.index();
  const std::size_t total = static_cast<std::size_t>(m_) * n_ + n_ + static_cast<std::size_t>(n_) * n_;
  y_.assign(total, ScalarTraits<S>::zero());
  present_.assign(total, 0);
  const S one = ScalarTraits<S>::one();

  for (int i = 1; i <= m_; ++i) {
    for (int y = 1; y <= n_; ++y) {
      const int l = n_ + 1 - y;
      if (!idx.in_j1(i, l)) continue;
      const Vertex v{i, y, false};
      const S den = idx.in_j1(i - 1, l) ? ens.z(i - 1, l) : one;
      y_[slot(v)] = ens.z(i, l) / den;
      present_[slot(v)] = 1;
      order_.push_back(v);
    }
  }
  for (int y = 1; y <= n_; ++y) {
    const int l = n_ + 1 - y;
    if (!idx.in_j1(m_, l)) continue;
    const Vertex v{m_, y, true};
    y_[slot(v)] = one / ens.z(m_, l);
    present_[slot(v)] = 1;
    order_.push_back(v);
  }
  for (int i = m_ + 1; i <= m_ + n_; ++i) {
    for (int y = n_; y >= 1; --y) {
      const int l = n_ + 1 - y;
      if (!idx.in_j2(i, l)) continue;
      const Vertex v{i, y, false};
      const S den = idx.in_j2(i + 1, l) ? ens.z(i + 1, l) : one;
      y_[slot(v)] = ens.z(i, l) / den;
      present_[slot(v)] = 1;
      order_.push_back(v);
    }
  }
}

template <class S>
std::size_t BasicIncrementField<S>::slot(Vertex v) const noexcept {
  const std::size_t mn = static_cast<std::size_t>(m_) * n_;
  if (v.aux) return mn + (v.j - 1);
  if (v.i <= m_) return static_cast<std::size_t>(v.i - 1) * n_ + (v.j - 1);
  return mn + n_ + static_cast<std::size_t>(v.i - m_ - 1) * n_ + (v.j - 1);
}

template <class S>
bool BasicIncrementField<S>::contains(Vertex v) const noexcept {
  if (v.j < 1 || v.j > n_) return false;
  if (v.aux) {
    if (v.i != m_) return false;
  } else if (v.i < 1 || v.i > m_ + n_) {
    return false;
  }
  return present_[slot(v)] != 0;
}

template <class S>
const S& BasicIncrementField<S>::y(Vertex v) const {
  if (!contains(v)) throw InvalidInput("vertex " + to_string(v) + " is not in V[m,n]");
  return y_[slot(v)];
}

template <class S>
std::vector<Vertex> BasicIncrementField<S>::successors(Vertex v) const {
  std::vector<Vertex> out;
  if (!contains(v)) return out;
  auto add = [&](Vertex w) {
    if (contains(w)) out.push_back(w);
  };
  if (v.aux) {
    add({m_ + 1, v.j, false});
  } else if (v.i < m_) {
    add({v.i + 1, v.j, false});
    add({v.i, v.j + 1, false});
  } else if (v.i == m_) {
    add({m_, v.j, true});
    add({v.i, v.j + 1, false});
  } else {
    add({v.i + 1, v.j, false});
    add({v.i, v.j - 1, false});
  }
  return out;
}

template <class S>
std::vector<Vertex> BasicIncrementField<S>::predecessors(Vertex v) const {
  std::vector<Vertex> out;
  if (!contains(v)) return out;
  auto add = [&](Vertex w) {
    if (contains(w)) out.push_back(w);
  };
  if (v.aux) {
    add({m_, v.j, false});
  } else if (v.i <= m_) {
    add({v.i - 1, v.j, false});
    add({v.i, v.j - 1, false});
  } else {
    add(v.i == m_ + 1 ? Vertex{m_, v.j, true} : Vertex{v.i - 1, v.j, false});
    add({v.i, v.j + 1, false});
  }
  return out;
}

template <class S>
std::vector<S> BasicIncrementField<S>::paths_from(Vertex u) const {
  if (!contains(u)) throw InvalidInput("vertex " + to_string(u) + " is not in V[m,n]");
  std::vector<S> val(y_.size(), ScalarTraits<S>::zero());
  std::vector<char> reached(y_.size(), 0);
  bool started = false;
  for (const Vertex& w : order_) {
    const std::size_t s = slot(w);
    if (!started) {
      if (!(w == u)) continue;
      started = true;
      val[s] = y_[s];
      reached[s] = 1;
      continue;
    }
    S acc = ScalarTraits<S>::zero();
    bool any = false;
    for (const Vertex& p : predecessors(w)) {
      const std::size_t ps = slot(p);
      if (!reached[ps]) continue;
      if (any)
        acc = acc + val[ps];
      else
        acc = val[ps];
      any = true;
    }
    if (any) {
      val[s] = y_[s] * acc;
      reached[s] = 1;
    }
  }
  return val;
}

bool s_planar_ordered(const std::vector<Vertex>& v, int m) noexcept {
  auto right = [m](Vertex x) { return !x.aux && x.i > m; };
  for (std::size_t r = 1; r < v.size(); ++r) {
    const Vertex p = v[r - 1], q = v[r];
    if (p == q) return false;
    if (right(p) && !right(q)) return false;
    if (right(p) && right(q)) {
      if (q.i > p.i || q.j > p.j) return false;
    } else if (!right(p) && !right(q)) {
      if (q.i < p.i || q.j > p.j || (p.aux && !q.aux) || (p.aux && q.aux && q.j == p.j)) return false;
    } else if (q.j > p.j) {
      return false;
    }
  }
  return true;
}

template <class S>
BasicDetResult<S> s_partition(const BasicIncrementField<S>& inc, const std::vector<Vertex>& starts,
                              const std::vector<Vertex>& ends) {
  if (starts.empty() || starts.size() != ends.size()) throw InvalidInput("s_partition needs k >= 1 starts and k ends");
  for (const auto* pts : {&starts, &ends}) {
    for (const Vertex& v : *pts)
      if (!inc.contains(v)) throw InvalidInput("vertex " + to_string(v) + " is not in V[m,n]");
    if (!s_planar_ordered(*pts, inc.m())) throw InvalidInput("s_partition: endpoints are not planar ordered");
  }
  const std::size_t k = starts.size();
  SquareMatrix<S> mat(k, ScalarTraits<S>::zero());
  for (std::size_t r = 0; r < k; ++r) {
    const std::vector<S> from = inc.paths_from(starts[r]);
    for (std::size_t s = 0; s < k; ++s) mat(r, s) = from[inc.slot(ends[s])];
  }
  if (k == 1) {
    BasicDetResult<S> out;
    out.value = mat(0, 0);
    return out;
  }
  return ScalarTraits<S>::det(mat);
}

namespace {

struct DagEnumerator {
  const IncrementField& inc;
  const std::vector<Vertex>& starts;
  const std::vector<Vertex>& ends;
  std::vector<char> used;
  LogNum total;

  void walk(std::size_t r, Vertex v, LogNum acc) {
    const std::size_t s = inc.slot(v);
    if (used[s]) return;
    used[s] = 1;
    acc *= inc.y(v);
    if (v == ends[r]) {
      if (r + 1 == starts.size())
        total += acc;
      else
        walk(r + 1, starts[r + 1], acc);
    } else {
      for (const Vertex& w : inc.successors(v)) walk(r, w, acc);
    }
    used[s] = 0;
  }
};

}  // namespace

LogNum s_brute_force(const IncrementField& inc, const std::vector<Vertex>& starts, const std::vector<Vertex>& ends) {
  if (starts.empty() || starts.size() != ends.size() || starts.size() > 2)
    throw InvalidInput("s_brute_force handles one or two paths");
  for (const auto* pts : {&starts, &ends})
    for (const Vertex& v : *pts)
      if (!inc.contains(v)) throw InvalidInput("vertex " + to_string(v) + " is not in V[m,n]");
  DagEnumerator e{inc, starts, ends, std::vector<char>(inc.slot_count(), 0), LogNum::zero()};
  e.walk(0, starts[0], LogNum::one());
  return e.total;
}

template <class S>
S f_function(const BasicIncrementField<S>& inc, int a, int b) {
  const int m = inc.m(), n = inc.n();
  if (a < 1 || a > m || b < 1 || b > n) throw InvalidInput("f_function: need 1 <= a <= m and 1 <= b <= n");
  const Vertex u = lift_start(a, n), v = lift_right_end(m, b);
  if (!inc.contains(v))
    throw InvalidInput("f_function: " + to_string(v) + " is not a vertex (b <= n - m)");
  return s_partition(inc, {u}, {v}).value;
}

LogNum f_function(const LineEnsemble& ens, int a, int b) { return f_function(build_increments(ens), a, b); }

template class BasicLineEnsemble<LogNum>;
template class BasicLineEnsemble<ExtendedReal>;
template class BasicLineEnsemble<DeepReal>;
template class BasicIncrementField<LogNum>;
template class BasicIncrementField<ExtendedReal>;
template class BasicIncrementField<DeepReal>;
template BasicLineEnsemble<LogNum> build_ensemble_as(const ScalarGrid<LogNum>&);
template BasicLineEnsemble<ExtendedReal> build_ensemble_as(const ScalarGrid<ExtendedReal>&);
template BasicLineEnsemble<DeepReal> build_ensemble_as(const ScalarGrid<DeepReal>&);
template BasicLineEnsemble<LogNum> virtual_sub_ensemble(const BasicLineEnsemble<LogNum>&);
template BasicLineEnsemble<ExtendedReal> virtual_sub_ensemble(const BasicLineEnsemble<ExtendedReal>&);
template BasicLineEnsemble<DeepReal> virtual_sub_ensemble(const BasicLineEnsemble<DeepReal>&);
template BasicLineEnsemble<LogNum> strip_top_lines(const BasicLineEnsemble<LogNum>&, int);
template BasicLineEnsemble<ExtendedReal> strip_top_lines(const BasicLineEnsemble<ExtendedReal>&, int);
template BasicLineEnsemble<DeepReal> strip_top_lines(const BasicLineEnsemble<DeepReal>&, int);
template BasicDetResult<LogNum> s_partition(const BasicIncrementField<LogNum>&, const std::vector<Vertex>&,
                                            const std::vector<Vertex>&);
template BasicDetResult<ExtendedReal> s_partition(const BasicIncrementField<ExtendedReal>&,
                                                  const std::vector<Vertex>&, const std::vector<Vertex>&);
template BasicDetResult<DeepReal> s_partition(const BasicIncrementField<DeepReal>&,
                                                  const std::vector<Vertex>&, const std::vector<Vertex>&);
template LogNum f_function(const BasicIncrementField<LogNum>&, int, int);
template ExtendedReal f_function(const BasicIncrementField<ExtendedReal>&, int, int);
template DeepReal f_function(const BasicIncrementField<DeepReal>&, int, int);

}  // namespace polylab
