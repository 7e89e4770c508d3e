#include "polylab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "polylab/errors.hpp"
#include "polylab/parallel.hpp"
#include "polylab/rng.hpp"

namespace polylab {

void IdentityReport::merge(const IdentityReport& o) {
  cases += o.cases;
  zero_agreements += o.zero_agreements;
  failure_count += o.failure_count;
  extended_reruns += o.extended_reruns;
  max_residual = std::max(max_residual, o.max_residual);
  for (const auto& f : o.failures) {
    if (failures.size() >= 20) break;
    failures.push_back(f);
  }
}

namespace {

std::string join(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t r = 0; r < v.size(); ++r) s += (r ? "," : "") + std::to_string(v[r]);
  return s + "]";
}

/// One side of an identity. `zero` means no admissible path family exists;
/// it is decided combinatorially, never from the size of a value.
template <class S>
struct Side {
  S v{};
  bool zero = true;

  static Side none() { return Side{ScalarTraits<S>::zero(), true}; }
};

template <class S>
Side<S> operator*(const Side<S>& a, const Side<S>& b) {
  if (a.zero || b.zero) return Side<S>::none();
  return Side<S>{a.v * b.v, false};
}

template <class S>
Side<S> operator/(const Side<S>& a, const Side<S>& b) {
  if (b.zero) throw EstimationFailure("identity denominator has no admissible path family");
  if (a.zero) return Side<S>::none();
  return Side<S>{a.v / b.v, false};
}

template <class S>
Side<S> operator+(const Side<S>& a, const Side<S>& b) {
  if (a.zero) return b;
  if (b.zero) return a;
  return Side<S>{a.v + b.v, false};
}

/// A value that must be positive came out non-positive: cancellation has
/// consumed every digit of the current scalar type.
struct NeedsMorePrecision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comparisons are staged per case so that a case can be discarded and
/// recomputed at higher precision.
class Recorder {
 public:
  Recorder(std::string name, const IdentityOptions& opt) : opt_(opt) {
    rep_.name = std::move(name);
    rep_.tolerance = opt.tol;
  }

  template <class S>
  void compare(const Side<S>& l, const Side<S>& r, const std::string& inputs) {
    Pending p{l.zero, r.zero, 0.0, false, {}, {}, {}};
    if (!(l.zero && r.zero)) {
      const bool same_sign = !l.zero && !r.zero && (ScalarTraits<S>::zero() < l.v) == (ScalarTraits<S>::zero() < r.v);
      if (same_sign) {
        p.residual = std::fabs(l.zero ? 0.0 : ScalarTraits<S>::log_ratio(abs_of(l.v), abs_of(r.v)));
        p.bad = !(p.residual <= opt_.tol);
      } else {
        p.bad = true;
      }
      if (p.bad) {
        p.l = l.zero ? LogNum::zero() : ScalarTraits<S>::to_lognum(l.v);
        p.r = r.zero ? LogNum::zero() : ScalarTraits<S>::to_lognum(r.v);
        p.inputs = inputs;
      }
    }
    pending_.push_back(std::move(p));
  }

  void discard() { pending_.clear(); }

  void commit() {
    for (Pending& p : pending_) {
      ++rep_.cases;
      if (p.lzero && p.rzero) {
        ++rep_.zero_agreements;
        continue;
      }
      rep_.max_residual = std::max(rep_.max_residual, p.residual);
      if (p.bad) record_failure({std::move(p.inputs), p.l, p.r});
    }
    pending_.clear();
  }

  /// A case that could not be evaluated at any available precision.
  void fail(const std::string& inputs) {
    pending_.clear();
    ++rep_.cases;
    record_failure({inputs, LogNum::zero(), LogNum::zero()});
  }

  void count_rerun() { ++rep_.extended_reruns; }

  IdentityReport take() { return std::move(rep_); }

 private:
  struct Pending {
    bool lzero, rzero;
    double residual;
    bool bad;
    LogNum l, r;
    std::string inputs;
  };

  template <class S>
  static S abs_of(const S& x) {
    if constexpr (std::is_same_v<S, LogNum>) {
      return x.sign() < 0 ? -x : x;
    } else {
      return boost::multiprecision::abs(x);
    }
  }

  void record_failure(IdentityFailure f) {
    ++rep_.failure_count;
    if (rep_.failures.size() < opt_.max_failures_kept) rep_.failures.push_back(std::move(f));
  }

  IdentityOptions opt_;
  IdentityReport rep_;
  std::vector<Pending> pending_;
};

template <class S, class B>
S round_to(const B& x) {
  if constexpr (std::is_same_v<S, LogNum>) {
    return ScalarTraits<B>::to_lognum(x);
  } else {
    return static_cast<S>(x);
  }
}

/// The line ensemble of one grid at a precision no tier can outrun: built
/// in ExtendedReal, or in DeepReal when the ExtendedReal bound is too loose
/// or a DeepReal tier asks for it.
class EnsembleSource {
 public:
  explicit EnsembleSource(const WeightGrid& grid) : grid_(grid) {}

  template <class S>
  BasicLineEnsemble<S> get() {
    if constexpr (!std::is_same_v<S, DeepReal>) {
      if (!ext_) ext_ = std::make_unique<BasicLineEnsemble<ExtendedReal>>(build_ensemble_as(ScalarGrid<ExtendedReal>(grid_)));
      if (ext_->rel_error <= kExtendedEnough) return convert<S>(*ext_);
    }
    if (!deep_) deep_ = std::make_unique<BasicLineEnsemble<DeepReal>>(build_ensemble_as(ScalarGrid<DeepReal>(grid_)));
    return convert<S>(*deep_);
  }

 private:
  static constexpr double kExtendedEnough = 1e-40;

  template <class S, class B>
  static BasicLineEnsemble<S> convert(const BasicLineEnsemble<B>& e) {
    BasicLineEnsemble<S> out(e.index());
    for (auto [i, j] : e.index().members()) out.z(i, j) = round_to<S>(e.z(i, j));
    return out;
  }

  const WeightGrid& grid_;
  std::unique_ptr<BasicLineEnsemble<ExtendedReal>> ext_;
  std::unique_ptr<BasicLineEnsemble<DeepReal>> deep_;
};

WeightGrid ones_like(const WeightGrid& g) {
  return explicit_grid(std::vector<std::vector<double>>(g.n(), std::vector<double>(g.m(), 1.0)));
}

/// Per-grid tables shared by all identity cases: single-path tables from
/// every bottom-row start, the ensemble and its stripped versions, and S
/// tables from lifted starts. In counting mode all weights and increments
/// are 1, so T and S count admissible path families. Otherwise the ensemble
/// is rounded from a more precise one, so that its own cancellation never
/// limits a tier.
template <class S>
class Context {
 public:
  Context(const WeightGrid& grid, const Context<LogNum>* counter, EnsembleSource* source = nullptr)
      : source_(source),
        counting_(counter == nullptr),
        grid_(counting_ ? ones_like(grid) : grid),
        g_(grid_),
        m_(grid.m()),
        n_(grid.n()),
        counter_(counter) {}

  int m() const { return m_; }
  int n() const { return n_; }
  /// Largest relative error bound among determinants used since begin_case().
  double case_error() const { return case_error_; }
  void begin_case() { case_error_ = 0.0; }

  /// Disjoint-path function; every start must be on row 1.
  Side<S> T(const std::vector<Point>& starts, const std::vector<Point>& ends) const {
    for (const Point& e : ends)
      if (!grid_.contains(e.i, e.j)) return Side<S>::none();
    if (counter_ && counter_->raw_T(starts, ends).to_double() < 0.5) return Side<S>::none();
    return checked(raw_T(starts, ends));
  }

  Side<S> T_nested(int k) const {
    const EndpointSpec sp = nested_spec({1, 1}, {m_, n_}, k);
    return T(sp.starts, sp.ends);
  }

  /// S on the ensemble with the top w lines removed.
  Side<S> Sfun(int w, const std::vector<Vertex>& starts, const std::vector<Vertex>& ends) const {
    const Level& lv = level(w);
    for (const auto* pts : {&starts, &ends})
      for (const Vertex& v : *pts)
        if (!lv.inc->contains(v)) return Side<S>::none();
    if (counter_ && counter_->raw_S(w, starts, ends).to_double() < 0.5) return Side<S>::none();
    return checked(raw_S(w, starts, ends));
  }

  bool has_vertex(int w, Vertex v) const { return level(w).inc->contains(v); }

  S raw_T(const std::vector<Point>& starts, const std::vector<Point>& ends) const {
    const std::size_t k = starts.size();
    SquareMatrix<S> mat(k, ScalarTraits<S>::zero());
    for (std::size_t r = 0; r < k; ++r) {
      const Table<S>& t = forward(starts[r]);
      for (std::size_t s = 0; s < k; ++s) mat(r, s) = t(ends[s].i, ends[s].j);
    }
    return det(mat);
  }

  S raw_S(int w, const std::vector<Vertex>& starts, const std::vector<Vertex>& ends) const {
    const Level& lv = level(w);
    const std::size_t k = starts.size();
    SquareMatrix<S> mat(k, ScalarTraits<S>::zero());
    for (std::size_t r = 0; r < k; ++r) {
      const std::vector<S>& from = paths_from(lv, starts[r]);
      for (std::size_t s = 0; s < k; ++s) mat(r, s) = from[lv.inc->slot(ends[s])];
    }
    if (k == 1) return mat(0, 0);
    return det(mat);
  }

 private:
  struct Level {
    std::unique_ptr<BasicLineEnsemble<S>> ens;
    std::unique_ptr<BasicIncrementField<S>> inc;
    mutable std::map<std::pair<int, std::pair<int, int>>, std::vector<S>> from;
  };

  Side<S> checked(const S& v) const {
    if (!(ScalarTraits<S>::zero() < v)) throw NeedsMorePrecision("non-positive value for an admissible family");
    return Side<S>{v, false};
  }

  S det(const SquareMatrix<S>& mat) const {
    const BasicDetResult<S> d = ScalarTraits<S>::det(mat, 0.0);
    case_error_ = std::max(case_error_, d.rel_error);
    return d.value;
  }

  const Table<S>& forward(Point u) const {
    if (u.j != 1) throw InvalidInput("identity context: starts must lie on row 1");
    auto it = fw_.find(u.i);
    if (it == fw_.end()) it = fw_.emplace(u.i, t1_forward(g_, u)).first;
    return it->second;
  }

  const Level& level(int w) const {
    while (static_cast<int>(levels_.size()) <= w) {
      Level lv;
      if (levels_.empty()) {
        if (counting_) {
          lv.ens = std::make_unique<BasicLineEnsemble<S>>(IndexSet(m_, n_));
          for (auto [i, j] : lv.ens->index().members()) lv.ens->z(i, j) = ScalarTraits<S>::one();
        } else {
          lv.ens = std::make_unique<BasicLineEnsemble<S>>(source_->get<S>());
        }
      } else {
        lv.ens = std::make_unique<BasicLineEnsemble<S>>(virtual_sub_ensemble(*levels_.back().ens));
      }
      lv.inc = std::make_unique<BasicIncrementField<S>>(*lv.ens);
      levels_.push_back(std::move(lv));
    }
    return levels_[w];
  }

  const std::vector<S>& paths_from(const Level& lv, Vertex v) const {
    const auto key = std::make_pair(v.aux ? 1 : 0, std::make_pair(v.i, v.j));
    auto it = lv.from.find(key);
    if (it == lv.from.end()) it = lv.from.emplace(key, lv.inc->paths_from(v)).first;
    return it->second;
  }

  EnsembleSource* source_;
  bool counting_;
  WeightGrid grid_;
  ScalarGrid<S> g_;
  int m_, n_;
  const Context<LogNum>* counter_;
  mutable std::map<int, Table<S>> fw_;
  mutable std::vector<Level> levels_;
  mutable double case_error_ = 0.0;
};

std::vector<Point> bottom_starts(const std::vector<int>& a) {
  std::vector<Point> s;
  for (int x : a) s.push_back({x, 1});
  return s;
}

std::vector<Point> padding_starts(int count) {
  std::vector<Point> s;
  for (int r = 1; r <= count; ++r) s.push_back({r, 1});
  return s;
}

/// (m,n)^count = [(m,n), ..., (m,n-count+1)].
std::vector<Point> padding_ends(int m, int n, int count) {
  std::vector<Point> s;
  for (int r = 0; r < count; ++r) s.push_back({m, n - r});
  return s;
}

void validate_extended(int m, int n, int k, int ell, const std::vector<int>& a, const std::vector<int>& b) {
  if (k < 1 || ell < 0 || ell > k || static_cast<int>(a.size()) != k || static_cast<int>(b.size()) != k)
    throw InvalidInput("extended invariance: need k >= 1, 0 <= ell <= k and k values of a and b");
  for (int r = 0; r < k; ++r) {
    if (a[r] < 1 || a[r] > m || (r > 0 && a[r] <= a[r - 1])) throw InvalidInput("extended invariance: a must increase within [1,m]");
  }
  for (int r = 0; r < ell; ++r) {
    if (b[r] < 1 || b[r] > m || (r > 0 && b[r] <= b[r - 1])) throw InvalidInput("extended invariance: top ends must increase within [1,m]");
  }
  for (int r = ell; r < k; ++r) {
    if (b[r] < 1 || b[r] >= n || (r > ell && b[r] >= b[r - 1])) throw InvalidInput("extended invariance: right ends must decrease within [1,n)");
  }
}

template <class S>
void extended_case(Context<S>& ctx, Recorder& rec, int k, int ell, const std::vector<int>& a, const std::vector<int>& b) {
  const int m = ctx.m(), n = ctx.n();
  std::vector<Point> ends;
  std::vector<Vertex> vstarts, vends;
  for (int r = 0; r < k; ++r) vstarts.push_back(lift_start(a[r], n));
  for (int r = 0; r < ell; ++r) {
    ends.push_back({b[r], n});
    vends.push_back({b[r], n});
  }
  for (int r = ell; r < k; ++r) {
    ends.push_back({m, b[r]});
    vends.push_back(lift_right_end(m, b[r]));
  }
  const Side<S> lhs = ctx.T(bottom_starts(a), ends);
  const Side<S> rhs = ctx.Sfun(0, vstarts, vends);
  rec.compare(lhs, rhs, "k=" + std::to_string(k) + " ell=" + std::to_string(ell) + " a=" + join(a) + " b=" + join(b));
}

template <class S>
void cross_line_case(Context<S>& ctx, Recorder& rec, int a, int b) {
  const int m = ctx.m(), n = ctx.n();
  const int kmax = std::min(a, n - b + 1);
  std::vector<Side<S>> nested(kmax + 1);
  nested[0] = Side<S>{ScalarTraits<S>::one(), false};
  for (int k = 1; k <= kmax; ++k) nested[k] = ctx.T_nested(k);
  std::vector<Side<S>> term(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    std::vector<Point> s1 = padding_starts(k - 1);
    s1.push_back({a, 1});
    const Side<S> first = ctx.T(s1, padding_ends(m, n, k));
    std::vector<Point> e2 = padding_ends(m, n, k - 1);
    e2.push_back({m, b});
    const Side<S> second = ctx.T(padding_starts(k), e2);
    term[k] = first * second / (nested[k] * nested[k - 1]);
  }
  for (int j = 1; j <= kmax; ++j) {
    std::vector<Point> s = padding_starts(j - 1);
    s.push_back({a, 1});
    std::vector<Point> e = padding_ends(m, n, j - 1);
    e.push_back({m, b});
    const Side<S> lhs = ctx.T(s, e) / nested[j - 1];
    Side<S> rhs = Side<S>::none();
    for (int k = j; k <= kmax; ++k) rhs = rhs + term[k];
    rec.compare(lhs, rhs, "a=" + std::to_string(a) + " b=" + std::to_string(b) + " j=" + std::to_string(j));
  }
}

template <class S>
void corollary_case(Context<S>& ctx, Recorder& rec, int a, int b) {
  const int m = ctx.m(), n = ctx.n();
  const std::string tag = "a=" + std::to_string(a) + " b=" + std::to_string(b);
  if (ctx.has_vertex(0, lift_right_end(m, b))) {
    rec.compare(ctx.T({{a, 1}}, {{m, b}}), ctx.Sfun(0, {lift_start(a, n)}, {lift_right_end(m, b)}), "j=1 " + tag);
  }
  if (a >= 2 && b <= n - 1 && m >= 2 && n >= 2 && ctx.has_vertex(1, lift_right_end(m - 1, b))) {
    const Side<S> lhs = ctx.T({{1, 1}, {a, 1}}, {{m, n}, {m, b}}) / ctx.T({{1, 1}}, {{m, n}});
    const Side<S> rhs = ctx.Sfun(1, {lift_start(a - 1, n - 1)}, {lift_right_end(m - 1, b)});
    rec.compare(lhs, rhs, "j=2 " + tag);
  }
}

template <class S>
void multipoint_case(Context<S>& ctx, Recorder& rec, const MultipointCase& c) {
  const int m = ctx.m(), n = ctx.n(), w = c.w;
  std::vector<Point> starts = padding_starts(w), ends = padding_ends(m, n, w);
  std::vector<Vertex> vs, ve;
  for (std::size_t r = 0; r < c.a.size(); ++r) {
    starts.push_back({c.a[r], 1});
    ends.push_back({m, c.ell[r]});
    vs.push_back(lift_start(c.a[r] - w, n - w));
    ve.push_back(lift_right_end(m - w, c.ell[r]));
  }
  const Side<S> lhs = ctx.T(starts, ends) / ctx.T_nested(w);
  const Side<S> rhs = ctx.Sfun(w, vs, ve);
  rec.compare(lhs, rhs, "w=" + std::to_string(w) + " a=" + join(c.a) + " ell=" + join(c.ell));
}

template <class S>
struct Tier {
  std::unique_ptr<Context<S>> ctx;
};

/// Runs case(ctx, rec, index) for every index. Under adaptive precision a
/// case starts in LogNum and moves to ExtendedReal, then DeepReal, while
/// some determinant it used has an error bound above opt.max_rel_error.
template <class F>
IdentityReport dispatch(const WeightGrid& grid, const std::string& name, const IdentityOptions& opt, std::size_t count,
                        F&& run_case) {
  if (grid.has_zero()) throw Unsupported(name + ": grid has zero weights");
  const Context<LogNum> counter(grid, nullptr);
  EnsembleSource source(grid);
  Recorder rec(name, opt);
  Tier<LogNum> t0;
  Tier<ExtendedReal> t1;
  Tier<DeepReal> t2;
  const int first = opt.precision == Precision::extended ? 1 : 0;
  const int last = opt.precision == Precision::standard ? 0 : 2;

  for (std::size_t idx = 0; idx < count; ++idx) {
    std::string error;
    auto attempt = [&](auto& tier, int level) {
      if (!tier.ctx) tier.ctx = std::make_unique<std::remove_reference_t<decltype(*tier.ctx)>>(grid, &counter, &source);
      tier.ctx->begin_case();
      try {
        run_case(*tier.ctx, rec, idx);
      } catch (const NeedsMorePrecision& e) {
        error = e.what();
        rec.discard();
        return false;
      } catch (const std::domain_error& e) {
        error = e.what();
        rec.discard();
        return false;
      }
      if (level < last && !(tier.ctx->case_error() <= opt.max_rel_error)) {
        rec.discard();
        return false;
      }
      rec.commit();
      return true;
    };
    bool done = false;
    for (int level = first; level <= last && !done; ++level) {
      if (level > first) rec.count_rerun();
      if (level == 0) done = attempt(t0, level);
      if (level == 1) done = attempt(t1, level);
      if (level == 2) done = attempt(t2, level);
    }
    if (!done) rec.fail("case " + std::to_string(idx) + ": " + error);
  }
  return rec.take();
}

bool right_end_ok(int m, int n, int b) { return b >= n + 1 - m; }

void for_each_subset(int lo, int hi, int size, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == size) {
      f(cur);
      return;
    }
    for (int x = start; x <= hi; ++x) {
      cur.push_back(x);
      rec(x + 1);
      cur.pop_back();
    }
  };
  rec(lo);
}

}  // namespace

IdentityReport check_lgv(const WeightGrid& grid, const EndpointSpec& spec, const IdentityOptions& opt) {
  validate_spec(grid, spec);
  Recorder rec("lgv", opt);
  std::string tag = "starts=";
  for (Point p : spec.starts) tag += to_string(p);
  tag += " ends=";
  for (Point p : spec.ends) tag += to_string(p);
  const LogNum bf = brute_force_disjoint(grid, spec);
  const bool admissible = t_disjoint(ones_like(grid), spec, 0.0).value.to_double() >= 0.5;
  const Side<LogNum> rhs{bf, bf.is_zero()};
  if (!admissible) {
    rec.compare(Side<LogNum>::none(), rhs, tag);
    rec.commit();
    return rec.take();
  }
  if (opt.precision != Precision::extended) {
    const DetResult d = t_disjoint(grid, spec, 0.0);
    const bool trusted = d.value.sign() > 0 && d.rel_error <= opt.max_rel_error;
    if (opt.precision == Precision::standard || trusted) {
      rec.compare(Side<LogNum>{d.value, false}, rhs, tag);
      rec.commit();
      return rec.take();
    }
  }
  const ExtendedReal v = t_disjoint_as(ScalarGrid<ExtendedReal>(grid), spec, 0.0).value;
  rec.compare(Side<ExtendedReal>{v, false}, Side<ExtendedReal>{ScalarTraits<ExtendedReal>::from_lognum(bf), bf.is_zero()}, tag);
  rec.commit();
  if (opt.precision == Precision::adaptive) rec.count_rerun();
  return rec.take();
}

IdentityReport check_extended_invariance(const WeightGrid& grid, int k, int ell, const std::vector<int>& a,
                                         const std::vector<int>& b, const IdentityOptions& opt) {
  validate_extended(grid.m(), grid.n(), k, ell, a, b);
  for (int r = ell; r < k; ++r)
    if (!right_end_ok(grid.m(), grid.n(), b[r])) throw InvalidInput("extended invariance: right end (m,b) has no lift when b <= n - m");
  return dispatch(grid, "extended_invariance", opt, 1,
                  [&](auto& ctx, Recorder& rec, std::size_t) { extended_case(ctx, rec, k, ell, a, b); });
}

IdentityReport check_cross_line(const WeightGrid& grid, int a, int b, const IdentityOptions& opt) {
  if (a < 1 || a > grid.m() || b < 1 || b > grid.n()) throw InvalidInput("cross-line: need 1 <= a <= m, 1 <= b <= n");
  return dispatch(grid, "cross_line", opt, 1, [&](auto& ctx, Recorder& rec, std::size_t) { cross_line_case(ctx, rec, a, b); });
}

IdentityReport check_corollary_ratio(const WeightGrid& grid, int a, int b, const IdentityOptions& opt) {
  if (a < 1 || a > grid.m() || b < 1 || b > grid.n()) throw InvalidInput("corollary: need 1 <= a <= m, 1 <= b <= n");
  return dispatch(grid, "corollary_ratio", opt, 1, [&](auto& ctx, Recorder& rec, std::size_t) { corollary_case(ctx, rec, a, b); });
}

bool in_multipoint_domain(int m, int n, const MultipointCase& c) noexcept {
  if (c.w < 1 || c.w >= std::min(m, n) || c.a.empty() || c.a.size() != c.ell.size()) return false;
  for (std::size_t r = 0; r < c.a.size(); ++r) {
    if (c.a[r] <= c.w || c.a[r] > m || (r > 0 && c.a[r] <= c.a[r - 1])) return false;
    if (c.ell[r] < 0 || c.ell[r] >= n - c.w || (r > 0 && c.ell[r] >= c.ell[r - 1])) return false;
  }
  return true;
}

IdentityReport check_multipoint_ratio(const WeightGrid& grid, int w, const std::vector<int>& a, const std::vector<int>& ell,
                                      const IdentityOptions& opt) {
  const MultipointCase c{w, a, ell};
  if (!in_multipoint_domain(grid.m(), grid.n(), c)) throw InvalidInput("multipoint: tuple outside the admissible set");
  return dispatch(grid, "multipoint_ratio", opt, 1, [&](auto& ctx, Recorder& rec, std::size_t) { multipoint_case(ctx, rec, c); });
}

std::vector<ExtendedCase> extended_invariance_cases(int m, int n, int kmax) {
  std::vector<ExtendedCase> out;
  for (int k = 1; k <= kmax; ++k) {
    for_each_subset(1, m, k, [&](const std::vector<int>& a) {
      for (int ell = 0; ell <= k; ++ell) {
        for_each_subset(1, m, ell, [&](const std::vector<int>& top) {
          const int lo = std::max(1, n + 1 - m);
          for_each_subset(lo, n - 1, k - ell, [&](const std::vector<int>& right_inc) {
            ExtendedCase c{k, ell, a, top};
            for (auto it = right_inc.rbegin(); it != right_inc.rend(); ++it) c.b.push_back(*it);
            out.push_back(std::move(c));
          });
        });
      }
    });
  }
  return out;
}

std::vector<MultipointCase> multipoint_cases(int m, int n, int w, int kmax) {
  std::vector<MultipointCase> out;
  for (int k = 1; k <= kmax; ++k) {
    for_each_subset(w + 1, m, k, [&](const std::vector<int>& a) {
      for_each_subset(0, n - w - 1, k, [&](const std::vector<int>& ell_inc) {
        MultipointCase c{w, a, {}};
        for (auto it = ell_inc.rbegin(); it != ell_inc.rend(); ++it) c.ell.push_back(*it);
        out.push_back(std::move(c));
      });
    });
  }
  return out;
}

IdentityReport check_extended_invariance_all(const WeightGrid& grid, int kmax, const IdentityOptions& opt) {
  const auto cases = extended_invariance_cases(grid.m(), grid.n(), kmax);
  return dispatch(grid, "extended_invariance", opt, cases.size(), [&](auto& ctx, Recorder& rec, std::size_t i) {
    extended_case(ctx, rec, cases[i].k, cases[i].ell, cases[i].a, cases[i].b);
  });
}

IdentityReport check_cross_line_all(const WeightGrid& grid, const IdentityOptions& opt) {
  const int n = grid.n();
  return dispatch(grid, "cross_line", opt, static_cast<std::size_t>(grid.m() * n),
                  [&](auto& ctx, Recorder& rec, std::size_t i) { cross_line_case(ctx, rec, 1 + int(i) / n, 1 + int(i) % n); });
}

IdentityReport check_corollary_all(const WeightGrid& grid, const IdentityOptions& opt) {
  const int n = grid.n();
  return dispatch(grid, "corollary_ratio", opt, static_cast<std::size_t>(grid.m() * n),
                  [&](auto& ctx, Recorder& rec, std::size_t i) { corollary_case(ctx, rec, 1 + int(i) / n, 1 + int(i) % n); });
}

IdentityReport check_multipoint_all(const WeightGrid& grid, int wmax, int kmax, const IdentityOptions& opt) {
  std::vector<MultipointCase> cases;
  for (int w = 1; w <= std::min(wmax, std::min(grid.m(), grid.n()) - 1); ++w)
    for (auto& c : multipoint_cases(grid.m(), grid.n(), w, kmax)) cases.push_back(std::move(c));
  return dispatch(grid, "multipoint_ratio", opt, cases.size(),
                  [&](auto& ctx, Recorder& rec, std::size_t i) { multipoint_case(ctx, rec, cases[i]); });
}

WeightGrid adversarial_grid(int m, int n, std::uint64_t seed) {
  std::vector<std::vector<double>> v(n, std::vector<double>(m));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      Stream s = Stream::at(seed, static_cast<std::uint64_t>(i + 1), static_cast<std::uint64_t>(j + 1), 0xad);
      double decades;
      if (seed % 2 == 0) {
        decades = -6.0 + 12.0 * s.uniform();
      } else {
        decades = (s.uniform() < 0.5 ? -6.0 : 6.0) + std::log10(0.5 + 1.5 * s.uniform());
        decades = std::clamp(decades, -6.0, 6.0);
      }
      v[j][i] = std::pow(10.0, decades);
    }
  return explicit_grid(v);
}

GridFamily family_for(std::size_t index) noexcept { return static_cast<GridFamily>(index % kGridFamilies); }

const char* to_string(GridFamily f) {
  switch (f) {
    case GridFamily::ig_half: return "inverse-gamma(0.5)";
    case GridFamily::ig_two: return "inverse-gamma(2)";
    case GridFamily::ig_eight: return "inverse-gamma(8)";
    case GridFamily::uniform: return "uniform01";
    case GridFamily::adversarial: return "adversarial";
  }
  return "?";
}

WeightGrid family_grid(GridFamily f, int m, int n, std::uint64_t seed) {
  switch (f) {
    case GridFamily::ig_half: return sample_grid(m, n, DistributionSpec::inverse_gamma(0.5), seed);
    case GridFamily::ig_two: return sample_grid(m, n, DistributionSpec::inverse_gamma(2.0), seed);
    case GridFamily::ig_eight: return sample_grid(m, n, DistributionSpec::inverse_gamma(8.0), seed);
    case GridFamily::uniform: return sample_grid(m, n, DistributionSpec::uniform01(), seed);
    case GridFamily::adversarial: return adversarial_grid(m, n, seed);
  }
  throw InvalidInput("unknown grid family");
}

EndpointSpec random_endpoint_spec(int m, int n, int k, std::uint64_t seed) {
  Stream rng(seed);
  auto pick = [&](std::vector<Point>& out, bool low) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      out.clear();
      // Bias starts toward the lower-left and ends toward the upper-right so
      // that most families are non-empty.
      Point p{1 + static_cast<int>(rng.next_u64() % (low ? std::max(1, m / 2) : m)),
              low ? n - static_cast<int>(rng.next_u64() % n) : 1 + static_cast<int>(rng.next_u64() % n)};
      if (!low) p.j = n - static_cast<int>(rng.next_u64() % std::max(1, n / 2));
      out.push_back(p);
      for (int r = 1; r < k; ++r) {
        Point q{p.i + static_cast<int>(rng.next_u64() % 2), p.j - static_cast<int>(rng.next_u64() % 2)};
        if (q == p) (rng.next_u64() & 1) ? ++q.i : --q.j;
        p = q;
        out.push_back(p);
      }
      bool ok = true;
      for (Point q : out) ok &= q.i >= 1 && q.i <= m && q.j >= 1 && q.j <= n;
      if (ok) return true;
    }
    return false;
  };
  EndpointSpec s;
  if (!pick(s.starts, true) || !pick(s.ends, false)) return {};
  return s;
}

IdentityReport run_lgv_suite(std::size_t grids, const SuiteConfig& cfg) {
  const auto parts = parallel_map<IdentityReport>(grids, cfg.workers, [&](std::size_t g) {
    const std::uint64_t s = replica_seed(cfg.seed, 0x1a, g);
    Stream shape(s);
    const int m = 1 + static_cast<int>(shape.next_u64() % 5), n = 1 + static_cast<int>(shape.next_u64() % 5);
    const WeightGrid grid = family_grid(family_for(g), m, n, s);
    IdentityReport rep;
    rep.name = "lgv";
    rep.tolerance = cfg.options.tol;
    for (int k = 1; k <= 3; ++k) {
      const EndpointSpec spec = random_endpoint_spec(m, n, k, hash_combine(s, k));
      if (spec.starts.empty()) continue;
      rep.merge(check_lgv(grid, spec, cfg.options));
    }
    return rep;
  });
  IdentityReport out;
  out.name = "lgv";
  out.tolerance = cfg.options.tol;
  for (const auto& p : parts) out.merge(p);
  return out;
}

namespace {

template <class F>
IdentityReport run_seeds(const std::string& name, std::size_t count, const SuiteConfig& cfg, F&& per_seed) {
  const auto parts = parallel_map<IdentityReport>(count, cfg.workers, per_seed);
  IdentityReport out;
  out.name = name;
  out.tolerance = cfg.options.tol;
  for (const auto& p : parts) out.merge(p);
  return out;
}

}  // namespace

IdentityReport run_extended_invariance_suite(std::size_t seeds, const SuiteConfig& cfg) {
  return run_seeds("extended_invariance", seeds, cfg, [&](std::size_t s) {
    IdentityReport rep;
    int shape = 0;
    for (int m = 2; m <= 6; ++m)
      for (int n = 2; n <= 5; ++n, ++shape) {
        const std::uint64_t gs = replica_seed(cfg.seed, 0x2b, s * 64 + shape);
        rep.merge(check_extended_invariance_all(family_grid(family_for(s + shape), m, n, gs), 5, cfg.options));
      }
    return rep;
  });
}

IdentityReport run_cross_line_suite(std::size_t seeds, const SuiteConfig& cfg) {
  return run_seeds("cross_line", seeds, cfg, [&](std::size_t s) {
    return check_cross_line_all(family_grid(family_for(s), 5, 4, replica_seed(cfg.seed, 0x3c, s)), cfg.options);
  });
}

IdentityReport run_ratio_suite(std::size_t seeds, const SuiteConfig& cfg) {
  return run_seeds("ratio", seeds, cfg, [&](std::size_t s) {
    const WeightGrid g = family_grid(family_for(s), 5, 4, replica_seed(cfg.seed, 0x4d, s));
    IdentityReport rep = check_corollary_all(g, cfg.options);
    rep.merge(check_multipoint_all(g, 2, 3, cfg.options));
    return rep;
  });
}

}  // namespace polylab
