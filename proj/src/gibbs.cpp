#include "polylab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polylab/errors.hpp"
#include "polylab/parallel.hpp"
#include "polylab/partition.hpp"
#include "polylab/stats.hpp"

namespace polylab {

namespace {

constexpr std::uint64_t kSubTag = 0x51;
constexpr std::uint64_t kWindowTag = 0x52;
constexpr std::uint64_t kRejectTag = 0x53;
constexpr std::uint64_t kForwardTag = 0x54;
constexpr std::uint64_t kChainTag = 0x55;

double lz(const LineEnsemble& e, int i, int j) { return e.z(i, j).logmag(); }

void require_shape(const LineEnsemble& e, int m, int n, const char* what) {
  if (e.m() != m || e.n() != n)
    throw InvalidInput(std::string(what) + ": expected ensemble on J[" + std::to_string(m) + "," + std::to_string(n) +
                       "], got J[" + std::to_string(e.m()) + "," + std::to_string(e.n()) + "]");
}

void require_glued(const LineEnsemble& e) {
  if (gluing_residual(e) > 1e-9) throw InvalidInput("ensemble violates z_j(m) = z_j(m+1)");
}

DistributionSpec law(const DensityModel& model) { return DistributionSpec::inverse_gamma(model.theta); }

LineEnsemble sub_sample(const DensityModel& model, std::uint64_t seed, std::size_t r) {
  return build_ensemble(sample_grid(model.m - 1, model.n - 1, law(model), replica_seed(seed, kSubTag, r)));
}

Estimate from_weighted(const WeightedEstimate& w, std::size_t replicas, const IsOptions& opt) {
  Estimate e;
  e.value = w.value;
  e.standard_error = w.se;
  e.samples = replicas;
  e.proposals = replicas;
  e.ess = w.ess;
  if (w.ess < opt.ess_floor)
    e.warnings.push_back("degenerate weights: effective sample size " + std::to_string(w.ess) + " below floor " +
                         std::to_string(opt.ess_floor));
  return e;
}

std::vector<Estimate> weighted_estimates(const std::vector<double>& log_w, const std::vector<std::vector<double>>& phi,
                                         const IsOptions& opt) {
  std::vector<Estimate> out;
  for (const auto& p : phi) out.push_back(from_weighted(self_normalized(log_w, p), log_w.size(), opt));
  return out;
}

/// Columns constrained by a window; the glued pair is left free since the
/// reweighting factor never reads g(m).
bool in_window(int i, int m) { return i != m && i != m + 1; }

/// Grid weights drawn on first use from the same per-site streams as
/// sample_grid, so a proposal can be rejected after sampling only the
/// columns and rows its top line depends on.
class LazyGrid {
 public:
  LazyGrid(int m, int n, double theta, std::uint64_t seed)
      : m_(m), n_(n), theta_(theta), seed_(seed), w_(static_cast<std::size_t>(m) * n, 0.0) {}
  double operator()(int i, int j) {
    double& x = w_[static_cast<std::size_t>(j - 1) * m_ + (i - 1)];
    if (x == 0.0) x = 1.0 / Stream::at(seed_, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)).gamma(theta_);
    return x;
  }

 private:
  int m_, n_;
  double theta_;
  std::uint64_t seed_;
  std::vector<double> w_;
};

enum class Verdict { inside, outside, unresolved };

/// Window test for Z_1 in double precision: columns 1..m-1 by a forward
/// column sweep from (1,1), columns m+2..m+n by a row sweep down from row n
/// towards (m,n), alternating so a miss is found early. Overflow or
/// underflow leaves the verdict unresolved.
Verdict window_test(const ConditioningProfile& g, double width, LazyGrid& w) {
  const int m = g.m(), n = g.n();
  std::vector<double> col(n, 0.0), row(m, 0.0);
  auto outside = [&](int i, double z) {
    const double d = std::log(z) - g.log_g(i);
    return d < 0.0 || d > width;
  };
  auto unusable = [](double z) { return !(std::isnormal(z)); };
  for (int k = 1; k <= std::max(m - 1, n - 1); ++k) {
    if (k <= m - 1) {
      double below = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double prev = (k == 1 && j == 1) ? 1.0 : col[j - 1] + below;
        col[j - 1] = below = w(k, j) * prev;
      }
      if (unusable(col[n - 1])) return Verdict::unresolved;
      if (outside(k, col[n - 1])) return Verdict::outside;
    }
    if (k <= n - 1) {
      const int r = n + 1 - k;
      double right = 0.0;
      for (int i = m; i >= 1; --i) {
        const double next = (r == n && i == m) ? 1.0 : row[i - 1] + right;
        row[i - 1] = right = w(i, r) * next;
      }
      if (unusable(row[0])) return Verdict::unresolved;
      if (outside(m + r, row[0])) return Verdict::outside;
    }
  }
  return Verdict::inside;
}

void require_replicas(std::size_t n) {
  if (n == 0) throw InvalidInput("replica count must be positive");
}

void require_match(const DensityModel& model, const ConditioningProfile& g) {
  if (g.m() != model.m || g.n() != model.n) throw InvalidInput("conditioning profile does not match model dimensions");
}

}  // namespace

DensityModel::DensityModel(int m_, int n_, double theta_) : m(m_), n(n_), theta(theta_) { validate(); }

void DensityModel::validate() const {
  if (m < 2 || n < 2) throw InvalidInput("density model needs m, n >= 2");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("density model needs theta > 0");
}

ConditioningProfile::ConditioningProfile(int m, int n, std::vector<double> log_g) : m_(m), n_(n), log_g_(std::move(log_g)) {
  if (m < 2 || n < 2) throw InvalidInput("conditioning profile needs m, n >= 2");
  if (log_g_.size() != static_cast<std::size_t>(m + n))
    throw InvalidInput("conditioning profile needs m+n = " + std::to_string(m + n) + " values, got " +
                       std::to_string(log_g_.size()));
  for (double v : log_g_)
    if (!std::isfinite(v)) throw InvalidInput("conditioning profile values must be positive and finite");
  if (std::fabs(log_g_[m - 1] - log_g_[m]) > 1e-9 * std::max(1.0, std::fabs(log_g_[m - 1])))
    throw InvalidInput("conditioning profile violates g(m) = g(m+1)");
}

ConditioningProfile ConditioningProfile::from_ensemble(const LineEnsemble& full) {
  std::vector<double> v;
  for (int i = 1; i <= full.m() + full.n(); ++i) v.push_back(lz(full, i, 1));
  v[full.m()] = v[full.m() - 1];
  return ConditioningProfile(full.m(), full.n(), std::move(v));
}

std::vector<double> top_line_log(const WeightGrid& grid) {
  const int m = grid.m(), n = grid.n();
  const ScalarGrid<LogNum> sg(grid);
  const Table<LogNum> fw = t1_forward(sg, Point{1, 1});
  const Table<LogNum> bw = t1_backward(sg, Point{m, n});
  std::vector<double> out;
  for (int i = 1; i <= m; ++i) out.push_back(fw(i, n).logmag());
  for (int r = 1; r <= n; ++r) out.push_back(bw(1, r).logmag());
  return out;
}

ConditioningProfile ConditioningProfile::from_grid(const WeightGrid& grid) {
  std::vector<double> v = top_line_log(grid);
  v[grid.m()] = v[grid.m() - 1];
  return ConditioningProfile(grid.m(), grid.n(), std::move(v));
}

ConditioningProfile pilot_profile(const DensityModel& model, std::uint64_t seed) {
  model.validate();
  return ConditioningProfile::from_grid(sample_grid(model.m, model.n, law(model), seed));
}

std::vector<DensityTerm> density_terms(const DensityModel& model, bool joint) {
  model.validate();
  const int m = model.m, n = model.n;
  const IndexSet J(m, n);
  std::vector<DensityTerm> t;
  for (const auto& [i, j] : J.members()) {
    if (i <= m - 1) {
      t.push_back({DensityTerm::Kind::ratio, i, j, i + 1, j, 1.0});
      if (j <= n - 1 && J.contains(i + 1, j + 1)) t.push_back({DensityTerm::Kind::ratio, i + 1, j + 1, i, j, 1.0});
    }
    if (i >= m + 2) {
      t.push_back({DensityTerm::Kind::ratio, i, j, i - 1, j, 1.0});
      if (j <= n - 1 && J.contains(i - 1, j + 1)) t.push_back({DensityTerm::Kind::ratio, i - 1, j + 1, i, j, 1.0});
    }
    t.push_back({DensityTerm::Kind::log, i, j, 0, 0, -1.0});
  }
  for (int j = 1; j <= J.lines(); ++j)
    t.push_back({DensityTerm::Kind::log, m, j, 0, 0, -model.theta + (joint ? 1.0 : 0.0)});
  if (joint) {
    const auto [bi, bj] = boundary_entry(model);
    t.push_back({DensityTerm::Kind::reciprocal, bi, bj, 0, 0, 1.0});
  }
  return t;
}

double evaluate_terms(const std::vector<DensityTerm>& terms, const LineEnsemble& z) {
  double s = 0.0;
  for (const auto& t : terms) {
    switch (t.kind) {
      case DensityTerm::Kind::ratio: s -= t.coef * std::exp(lz(z, t.i, t.j) - lz(z, t.i2, t.j2)); break;
      case DensityTerm::Kind::log: s += t.coef * lz(z, t.i, t.j); break;
      case DensityTerm::Kind::reciprocal: s -= t.coef * std::exp(-lz(z, t.i, t.j)); break;
    }
  }
  return s;
}

double log_density_unnorm(const DensityModel& model, const LineEnsemble& z) {
  model.validate();
  require_shape(z, model.m, model.n, "log_density_unnorm");
  require_glued(z);
  return evaluate_terms(density_terms(model, false), z);
}

std::pair<int, int> boundary_entry(const DensityModel& model) {
  const int lines = std::min(model.m, model.n);
  return {model.m >= model.n ? model.n : model.n + 1, lines};
}

double log_joint_density(const DensityModel& model, const LineEnsemble& z) {
  model.validate();
  require_shape(z, model.m, model.n, "log_joint_density");
  require_glued(z);
  return evaluate_terms(density_terms(model, true), z);
}

double band_log_weight(const DensityModel& model, const LineEnsemble& top, int w, const LineEnsemble& sub) {
  require_shape(top, model.m, model.n, "band_log_weight (top)");
  if (w < 1 || w >= std::min(model.m, model.n)) throw InvalidInput("band_log_weight: need 1 <= w < min(m,n)");
  require_shape(sub, model.m - w, model.n - w, "band_log_weight (sub)");
  auto value = [&](int i, int j) { return j <= w ? lz(top, i, j) : lz(sub, i - w, j - w); };
  double s = 0.0;
  for (const auto& t : density_terms(model, true)) {
    if (t.kind != DensityTerm::Kind::ratio || (t.j <= w) == (t.j2 <= w)) continue;
    s -= t.coef * std::exp(value(t.i, t.j) - value(t.i2, t.j2));
  }
  return s;
}

double top_line_log_factor(const DensityModel& model, const ConditioningProfile& g) {
  require_match(model, g);
  const int m = model.m, n = model.n;
  double s = 0.0;
  for (int i = 1; i <= m - 2; ++i) s -= std::exp(g.log_g(i) - g.log_g(i + 1));
  for (int i = m + 3; i <= m + n; ++i) s -= std::exp(g.log_g(i) - g.log_g(i - 1));
  for (int i = 1; i <= m + n; ++i)
    if (i != m && i != m + 1) s -= g.log_g(i);
  return s - model.theta * log_add_exp(g.log_g(m - 1), g.log_g(m + 2));
}

double gamma_log_weight(const std::vector<double>& sub_top, const ConditioningProfile& g) {
  const int m = g.m(), n = g.n();
  if (sub_top.size() != static_cast<std::size_t>(m + n - 2))
    throw InvalidInput("gamma_log_weight: expected " + std::to_string(m + n - 2) + " top-line values");
  double s = 0.0;
  for (int i = 1; i <= m - 1; ++i) s -= std::exp(sub_top[i - 1] - g.log_g(i));
  for (int i = m; i <= m + n - 2; ++i) s -= std::exp(sub_top[i - 1] - g.log_g(i + 2));
  return s;
}

double gamma_log_weight(const LineEnsemble& sub, const ConditioningProfile& g) {
  require_shape(sub, g.m() - 1, g.n() - 1, "gamma_log_weight");
  std::vector<double> top;
  for (int i = 1; i <= sub.m() + sub.n(); ++i) top.push_back(lz(sub, i, 1));
  return gamma_log_weight(top, g);
}

Functional f_at_least(int a, int b, double log_c) {
  return [a, b, log_c](const LineEnsemble& e) { return f_function(e, a, b).logmag() >= log_c ? 1.0 : 0.0; };
}

IsTrace is_trace(const DensityModel& model, const ConditioningProfile& g, const std::vector<Functional>& phis,
                 std::size_t replicas, std::uint64_t seed, int workers) {
  model.validate();
  require_match(model, g);
  require_replicas(replicas);
  IsTrace tr;
  tr.log_weight.resize(replicas);
  tr.phi.assign(phis.size(), std::vector<double>(replicas));
  parallel_for(replicas, workers, [&](std::size_t r) {
    const LineEnsemble sub = sub_sample(model, seed, r);
    tr.log_weight[r] = gamma_log_weight(sub, g);
    for (std::size_t f = 0; f < phis.size(); ++f) tr.phi[f][r] = phis[f](sub);
  });
  return tr;
}

std::vector<Estimate> conditional_expectation_is(const DensityModel& model, const ConditioningProfile& g,
                                                 const std::vector<Functional>& phis, std::size_t replicas,
                                                 std::uint64_t seed, const IsOptions& opt) {
  const IsTrace tr = is_trace(model, g, phis, replicas, seed, opt.workers);
  return weighted_estimates(tr.log_weight, tr.phi, opt);
}

Estimate conditional_expectation_is(const DensityModel& model, const ConditioningProfile& g, const Functional& phi,
                                    std::size_t replicas, std::uint64_t seed, const IsOptions& opt) {
  return conditional_expectation_is(model, g, std::vector<Functional>{phi}, replicas, seed, opt).front();
}

std::vector<Estimate> unconditioned_expectation(const DensityModel& model, const std::vector<Functional>& phis,
                                                std::size_t replicas, std::uint64_t seed, const IsOptions& opt) {
  model.validate();
  require_replicas(replicas);
  std::vector<std::vector<double>> phi(phis.size(), std::vector<double>(replicas));
  parallel_for(replicas, opt.workers, [&](std::size_t r) {
    const LineEnsemble sub = sub_sample(model, seed, r);
    for (std::size_t f = 0; f < phis.size(); ++f) phi[f][r] = phis[f](sub);
  });
  std::vector<Estimate> out;
  for (const auto& p : phi) {
    const MeanSe ms = mean_se(p);
    Estimate e;
    e.value = ms.mean;
    e.standard_error = ms.se;
    e.samples = e.proposals = replicas;
    e.ess = static_cast<double>(replicas);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Estimate> windowed_expectation_is(const DensityModel& model, const ConditioningProfile& g, double eps,
                                              const std::vector<Functional>& phis, std::size_t replicas,
                                              std::uint64_t seed, const IsOptions& opt) {
  model.validate();
  require_match(model, g);
  require_replicas(replicas);
  if (!(eps > 0.0)) throw InvalidInput("window eps must be positive");
  const int m = model.m, n = model.n;
  const double width = std::log1p(eps);
  std::vector<double> log_w(replicas);
  std::vector<std::vector<double>> phi(phis.size(), std::vector<double>(replicas));
  parallel_for(replicas, opt.workers, [&](std::size_t r) {
    Stream s = Stream::at(seed, kWindowTag, r);
    std::vector<double> lg = g.log_values();
    for (int i = 1; i <= m + n; ++i)
      if (in_window(i, m)) lg[i - 1] += width * s.uniform();
    const ConditioningProfile gp(m, n, lg);
    const LineEnsemble sub = sub_sample(model, seed, r);
    double lw = top_line_log_factor(model, gp) + gamma_log_weight(sub, gp);
    for (int i = 1; i <= m + n; ++i)
      if (in_window(i, m)) lw += lg[i - 1];
    log_w[r] = lw;
    for (std::size_t f = 0; f < phis.size(); ++f) phi[f][r] = phis[f](sub);
  });
  return weighted_estimates(log_w, phi, opt);
}

std::vector<Estimate> conditional_expectation_rejection(const DensityModel& model, const ConditioningProfile& g,
                                                        double eps, const std::vector<Functional>& phis,
                                                        std::size_t max_proposals, std::uint64_t seed,
                                                        const RejectionOptions& opt) {
  model.validate();
  require_match(model, g);
  require_replicas(max_proposals);
  if (!(eps > 0.0)) throw InvalidInput("window eps must be positive");
  const int m = model.m, n = model.n;
  const double width = std::log1p(eps);
  const std::size_t chunk = std::max<std::size_t>(1, opt.chunk);

  std::vector<std::vector<double>> accepted(phis.size());
  std::size_t proposals = 0, got = 0;
  while (proposals < max_proposals) {
    const std::size_t count = std::min(chunk, max_proposals - proposals);
    std::vector<char> hit(count, 0);
    std::vector<std::vector<double>> vals(count);
    parallel_for(count, opt.workers, [&](std::size_t k) {
      const std::uint64_t ps = replica_seed(seed, kRejectTag, proposals + k);
      LazyGrid lazy(m, n, model.theta, ps);
      const Verdict v = window_test(g, width, lazy);
      if (v == Verdict::outside) return;
      const WeightGrid grid = sample_grid(m, n, law(model), ps);
      if (v == Verdict::unresolved) {
        const ScalarGrid<LogNum> sg(grid);
        const Table<LogNum> fw = t1_forward(sg, Point{1, 1});
        const Table<LogNum> bw = t1_backward(sg, Point{m, n});
        for (int i = 1; i <= m + n; ++i) {
          if (!in_window(i, m)) continue;
          const double d = (i <= m ? fw(i, n).logmag() : bw(1, i - m).logmag()) - g.log_g(i);
          if (d < 0.0 || d > width) return;
        }
      }
      hit[k] = 1;
      const LineEnsemble sub = virtual_sub_ensemble(build_ensemble(grid));
      for (const auto& phi : phis) vals[k].push_back(phi(sub));
    });
    for (std::size_t k = 0; k < count; ++k) {
      if (!hit[k]) continue;
      ++got;
      for (std::size_t f = 0; f < phis.size(); ++f) accepted[f].push_back(vals[k][f]);
    }
    proposals += count;
    if (opt.min_accepted > 0 && got >= opt.min_accepted) break;
  }
  if (got == 0)
    throw EstimationFailure("rejection sampler accepted none of " + std::to_string(proposals) +
                            " proposals; enlarge the window eps or the proposal budget");

  std::vector<Estimate> out;
  for (const auto& a : accepted) {
    const MeanSe ms = mean_se(a);
    Estimate e;
    e.value = ms.mean;
    e.standard_error = ms.se;
    e.samples = a.size();
    e.proposals = proposals;
    e.ess = static_cast<double>(a.size());
    e.acceptance_rate = static_cast<double>(a.size()) / static_cast<double>(proposals);
    if (opt.min_accepted > 0 && a.size() < opt.min_accepted)
      e.warnings.push_back("only " + std::to_string(a.size()) + " acceptances, fewer than the requested " +
                           std::to_string(opt.min_accepted));
    out.push_back(std::move(e));
  }
  return out;
}

Estimate conditional_expectation_rejection(const DensityModel& model, const ConditioningProfile& g, double eps,
                                           const Functional& phi, std::size_t max_proposals, std::uint64_t seed,
                                           const RejectionOptions& opt) {
  return conditional_expectation_rejection(model, g, eps, std::vector<Functional>{phi}, max_proposals, seed, opt)
      .front();
}

std::vector<LineEnsemble> forward_ensembles(const DensityModel& model, std::size_t count, std::uint64_t seed,
                                            int workers) {
  model.validate();
  std::vector<LineEnsemble> out(count, LineEnsemble(IndexSet(model.m, model.n)));
  parallel_for(count, workers, [&](std::size_t r) {
    out[r] = build_ensemble(sample_grid(model.m, model.n, law(model), replica_seed(seed, kForwardTag, r)));
  });
  return out;
}

McmcChain::McmcChain(const DensityModel& model, LineEnsemble start, double scale, std::uint64_t seed)
    : model_(model), state_(std::move(start)), rng_(Stream::at(seed, kChainTag)) {
  model_.validate();
  require_shape(state_, model_.m, model_.n, "McmcChain");
  if (!(scale >= 0.0)) throw InvalidInput("proposal scale must be nonnegative");
  for (const auto& [i, j] : state_.index().members())
    if (i != model_.m + 1) coords_.emplace_back(i, j);
  scale_.assign(coords_.size() + 1, scale);
  window_prop_.assign(coords_.size() + 1, 0);
  window_acc_.assign(coords_.size() + 1, 0);
  log_target_ = evaluate();
  if (!std::isfinite(log_target_)) throw InvalidInput("MCMC start has zero density");
}

double McmcChain::evaluate() const {
  double s = log_joint_density(model_, state_);
  for (const auto& [i, j] : coords_) s += lz(state_, i, j);
  return s;
}

void McmcChain::set(std::size_t c, double u) {
  const auto [i, j] = coords_[c];
  state_.z(i, j) = LogNum::from_log(u);
  if (i == model_.m) state_.z(i + 1, j) = LogNum::from_log(u);
}

void McmcChain::sweep() {
  for (std::size_t c = 0; c < coords_.size(); ++c) {
    const auto [i, j] = coords_[c];
    const double old = lz(state_, i, j);
    set(c, old + scale_[c] * rng_.normal());
    const double cand = evaluate();
    ++proposals_;
    ++window_prop_[c];
    if (std::log(rng_.uniform()) < cand - log_target_) {
      log_target_ = cand;
      ++accepted_;
      ++window_acc_[c];
    } else {
      set(c, old);
    }
  }
  // Common shift of every coordinate, along which single-site moves mix slowly.
  const std::size_t c = coords_.size();
  const double d = scale_[c] * rng_.normal();
  const LineEnsemble old = state_;
  for (std::size_t k = 0; k < c; ++k) set(k, lz(old, coords_[k].first, coords_[k].second) + d);
  const double cand = evaluate();
  ++window_prop_[c];
  if (std::log(rng_.uniform()) < cand - log_target_) {
    log_target_ = cand;
    ++window_acc_[c];
  } else {
    state_ = old;
  }
}

void McmcChain::adapt(double target) {
  for (std::size_t c = 0; c < scale_.size(); ++c) {
    if (window_prop_[c] == 0) continue;
    const double rate = static_cast<double>(window_acc_[c]) / static_cast<double>(window_prop_[c]);
    scale_[c] *= std::exp(rate - target);
    window_prop_[c] = window_acc_[c] = 0;
  }
}

double McmcChain::mean_scale() const {
  double s = 0.0;
  for (std::size_t c = 0; c < coords_.size(); ++c) s += scale_[c];
  return coords_.empty() ? 0.0 : s / static_cast<double>(coords_.size());
}

McmcResult mcmc_sample(const DensityModel& model, std::size_t steps, std::uint64_t seed, const McmcOptions& opt) {
  model.validate();
  const std::size_t thin = std::max<std::size_t>(1, opt.thin);
  LineEnsemble start = build_ensemble(sample_grid(model.m, model.n, law(model), replica_seed(seed, kChainTag, 0)));
  McmcChain chain(model, start, opt.initial_scale, seed);
  for (std::size_t t = 1; t <= opt.burn_in; ++t) {
    chain.sweep();
    if (opt.tune && t % 50 == 0) chain.adapt(opt.target_acceptance);
  }
  const std::size_t p0 = chain.proposals(), a0 = chain.accepted();

  McmcResult res;
  std::vector<double> trace;
  bool moved = false;
  for (std::size_t t = 1; t <= steps; ++t) {
    chain.sweep();
    if (t % thin) continue;
    res.samples.push_back(chain.state());
    trace.push_back(lz(chain.state(), model.m, 1));
    if (!moved)
      for (const auto& [i, j] : start.index().members())
        if (lz(chain.state(), i, j) != lz(start, i, j)) moved = true;
  }
  const std::size_t props = chain.proposals() - p0;
  res.acceptance_rate = props ? static_cast<double>(chain.accepted() - a0) / static_cast<double>(props) : 0.0;
  res.autocorrelation = lag1_autocorrelation(trace);
  res.mean_scale = chain.mean_scale();
  res.zero_displacement = !moved;
  return res;
}

TopLineTilt gamma_tilt(const ConditioningProfile& g) {
  const int m = g.m(), n = g.n();
  TopLineTilt t{m - 1, n - 1, {}};
  for (int i = 1; i <= m - 1; ++i) t.log_c.push_back(-g.log_g(i));
  for (int i = m; i <= m + n - 2; ++i) t.log_c.push_back(-g.log_g(i + 2));
  return t;
}

TopLineTilt band_tilt(const DensityModel& model, const LineEnsemble& top, int w) {
  require_shape(top, model.m, model.n, "band_tilt");
  if (w < 1 || w >= std::min(model.m, model.n)) throw InvalidInput("band_tilt: need 1 <= w < min(m,n)");
  TopLineTilt t{model.m - w, model.n - w, {}};
  t.log_c.assign(static_cast<std::size_t>(t.m + t.n), -std::numeric_limits<double>::infinity());
  for (const auto& term : density_terms(model, true)) {
    if (term.kind != DensityTerm::Kind::ratio || (term.j <= w) == (term.j2 <= w)) continue;
    if (term.j != w + 1 || term.j2 != w) throw std::logic_error("band_tilt: crossing term not of the form z_{w+1}/z_w");
    double& c = t.log_c[static_cast<std::size_t>(term.i - w - 1)];
    c = (LogNum::from_log(c) + LogNum::from_log(std::log(term.coef) - lz(top, term.i2, term.j2))).logmag();
  }
  return t;
}

double tilt_log_weight(const TopLineTilt& tilt, const std::vector<double>& top_log) {
  if (top_log.size() != tilt.log_c.size()) throw InvalidInput("tilt_log_weight: top line length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < top_log.size(); ++i) s -= std::exp(tilt.log_c[i] + top_log[i]);
  return s;
}

TiltedGridChain::TiltedGridChain(TopLineTilt tilt, double theta, std::uint64_t seed)
    : tilt_(std::move(tilt)), theta_(theta), rng_(Stream::at(seed, kChainTag, 1)) {
  if (tilt_.m < 1 || tilt_.n < 1 || tilt_.log_c.size() != static_cast<std::size_t>(tilt_.m + tilt_.n))
    throw InvalidInput("TiltedGridChain: tilt shape mismatch");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("TiltedGridChain: need theta > 0");
  const WeightGrid start = sample_grid(tilt_.m, tilt_.n, DistributionSpec::inverse_gamma(theta), seed);
  for (int j = 1; j <= tilt_.n; ++j)
    for (int i = 1; i <= tilt_.m; ++i) log_x_.push_back(start(i, j).logmag());
}

void TiltedGridChain::sweep() {
  const int m = tilt_.m, n = tilt_.n;
  const std::size_t cells = log_x_.size();
  auto c_top = [&](int i) { return LogNum::from_log(tilt_.log_c[static_cast<std::size_t>(i - 1)]); };
  auto c_left = [&](int r) { return LogNum::from_log(tilt_.log_c[static_cast<std::size_t>(m + r - 1)]); };
  // Path sums from a site, its own weight excluded: to the top row weighted
  // by the J1 coefficients, and to (m, n).
  std::vector<LogNum> to_top(cells), to_corner(cells), q(cells), p(cells);
  for (int i = m; i >= 1; --i)
    for (int j = n; j >= 1; --j) {
      LogNum a = j == n ? c_top(i) : LogNum::zero();
      LogNum b = (i == m && j == n) ? LogNum::one() : LogNum::zero();
      if (i < m) a += q[at(i + 1, j)], b += p[at(i + 1, j)];
      if (j < n) a += q[at(i, j + 1)], b += p[at(i, j + 1)];
      const LogNum x = LogNum::from_log(log_x_[at(i, j)]);
      to_top[at(i, j)] = a;
      to_corner[at(i, j)] = b;
      q[at(i, j)] = x * a;
      p[at(i, j)] = x * b;
    }
  // Path sums into a site, its own weight excluded: from (1,1), and from
  // the left column weighted by the J2 coefficients.
  std::vector<LogNum> fa(cells), fb(cells);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= n; ++j) {
      LogNum a = (i == 1 && j == 1) ? LogNum::one() : LogNum::zero();
      LogNum b = i == 1 ? c_left(j) : LogNum::zero();
      if (i > 1) a += fa[at(i - 1, j)], b += fb[at(i - 1, j)];
      if (j > 1) a += fa[at(i, j - 1)], b += fb[at(i, j - 1)];
      const double slope = (a * to_top[at(i, j)] + b * to_corner[at(i, j)]).logmag();
      double& lx = log_x_[at(i, j)];
      const double proposal = -std::log(rng_.gamma(theta_));
      const double dx = std::exp(proposal) - std::exp(lx);
      const double log_ratio = dx == 0.0 ? 0.0 : -std::copysign(std::exp(slope + std::log(std::fabs(dx))), dx);
      ++proposals_;
      if (std::log(rng_.uniform()) < log_ratio) {
        lx = proposal;
        ++accepted_;
      }
      const LogNum x = LogNum::from_log(lx);
      fa[at(i, j)] = x * a;
      fb[at(i, j)] = x * b;
    }
}

WeightGrid TiltedGridChain::grid() const {
  std::vector<LogNum> w;
  for (double lx : log_x_) w.push_back(LogNum::from_log(lx));
  return WeightGrid(tilt_.m, tilt_.n, std::move(w), DistributionSpec::inverse_gamma(theta_), 0);
}

double TiltedGridChain::log_weight() const { return tilt_log_weight(tilt_, top_line_log(grid())); }

}  // namespace polylab
