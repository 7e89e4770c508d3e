#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "cli.hpp"
#include "polylab/bk.hpp"
#include "polylab/environment.hpp"
#include "polylab/errors.hpp"
#include "polylab/gibbs.hpp"
#include "polylab/identities.hpp"
#include "polylab/parallel.hpp"
#include "polylab/scaling.hpp"
#include "polylab/stats.hpp"

namespace polylab::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kProfileTag = 0xC1;
constexpr std::uint64_t kReplicaTag = 0xC2;
constexpr std::uint64_t kQuantileTag = 0xC3;
constexpr std::uint64_t kThresholdTag = 0xC4;
constexpr std::uint64_t kForwardTag = 0xC5;
constexpr std::uint64_t kChainTag = 0xC6;
constexpr std::uint64_t kLevelTag = 0xC7;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Runs body into a fresh block; a thrown error fails the block.
Block guarded(const std::string& name, const std::function<void(Block&)>& body) {
  Block b;
  b.name = name;
  try {
    body(b);
  } catch (const std::exception& e) {
    b.pass = false;
    b.error = e.what();
    b.result = json::object();
  }
  return b;
}

void fail_all(std::vector<Block>& blocks, const std::string& what) {
  for (auto& b : blocks) {
    b.pass = false;
    b.error = what;
  }
}

// ---------------------------------------------------------------- identities

json to_json(const IdentityReport& r) {
  json j;
  j["name"] = r.name;
  j["tolerance"] = r.tolerance;
  j["cases"] = r.cases;
  j["zero_agreements"] = r.zero_agreements;
  j["failure_count"] = r.failure_count;
  j["extended_reruns"] = r.extended_reruns;
  j["max_residual"] = num(r.max_residual);
  json f = json::array();
  for (const auto& x : r.failures)
    f.push_back({{"inputs", x.inputs},
                 {"lhs_log", num(x.lhs.logmag())},
                 {"lhs_sign", x.lhs.sign()},
                 {"rhs_log", num(x.rhs.logmag())},
                 {"rhs_sign", x.rhs.sign()}});
  j["failures"] = f;
  return j;
}

std::vector<Block> run_identities(const IdentitiesParams& p, const RunConfig& cfg, std::ostream* csv) {
  SuiteConfig sc;
  sc.seed = cfg.seed;
  sc.workers = cfg.workers;
  sc.options.tol = p.tolerance;
  sc.options.precision = precision_from_string(p.precision);
  if (csv) *csv << "suite,cases,zero_agreements,failure_count,extended_reruns,max_residual\n";
  std::vector<Block> out;
  for (const auto& s : p.suites) {
    out.push_back(guarded(s, [&](Block& b) {
      IdentityReport r;
      if (s == "lgv") r = run_lgv_suite(p.lgv_grids, sc);
      else if (s == "extended_invariance") r = run_extended_invariance_suite(p.extended_seeds, sc);
      else if (s == "cross_line") r = run_cross_line_suite(p.cross_line_seeds, sc);
      else r = run_ratio_suite(p.ratio_seeds, sc);
      b.pass = r.passed() && r.cases > 0;
      if (r.cases == 0) b.warnings.push_back("no cases evaluated");
      b.result = to_json(r);
      if (csv)
        *csv << s << ',' << r.cases << ',' << r.zero_agreements << ',' << r.failure_count << ','
             << r.extended_reruns << ',' << r.max_residual << '\n';
    }));
  }
  return out;
}

// ------------------------------------------------------------------------ bk

EndpointSpec tuple_spec(int m, const TupleParams& t) {
  EndpointSpec s;
  for (std::size_t r = 0; r < t.a.size(); ++r) {
    s.starts.push_back({t.a[r], 1});
    s.ends.push_back({m, t.ell[r]});
  }
  return s;
}

/// Log values of the unconditioned side at the event coordinate.
std::vector<double> rhs_samples(const BkParams& p, const EventParams& e, std::uint64_t seed, int workers) {
  const std::size_t count = p.quantile_samples;
  if (p.experiment == "log_gamma")
    return t1_log_samples(p.m - 1, p.n - 1, p.theta, {e.p - 1, 1}, {p.m - 1, e.q}, count, seed, workers);
  if (p.experiment == "endpoint_variation")
    return t1_log_samples(p.m - 1, p.n - 1, p.theta, {e.p - 1, 1}, {e.q - 1, p.n - 1}, count, seed, workers);
  if (e.p < 1 || e.p > static_cast<int>(p.tuples.size()) || e.q != 1)
    throw InvalidInput("multipoint event coordinate must be (tuple index, 1)");
  const EndpointSpec spec = tuple_spec(p.m, p.tuples[static_cast<std::size_t>(e.p - 1)]);
  std::vector<double> out(count);
  parallel_for(count, workers, [&](std::size_t r) {
    const WeightGrid g = sample_grid(p.m, p.n, DistributionSpec::inverse_gamma(p.theta), replica_seed(seed, 0, r));
    out[r] = t_disjoint(g, spec).value.logmag();
  });
  return out;
}

std::vector<BkVerdict> run_bk_once(const BkParams& p, const std::vector<IncreasingEvent>& events,
                                   std::uint64_t g_seed, std::uint64_t seed, const BkOptions& opt) {
  if (p.experiment == "log_gamma")
    return bk_log_gamma(p.m, p.n, p.theta, events, g_seed, p.replicas, seed, opt);
  if (p.experiment == "endpoint_variation")
    return bk_endpoint_variation(p.m, p.n, p.b, p.theta, events, g_seed, p.replicas, seed, opt);
  MultiPointSpec spec;
  spec.w = p.w;
  for (const auto& t : p.tuples) spec.tuples.push_back({t.a, t.ell});
  return bk_multipoint(p.m, p.n, p.theta, spec, events, g_seed, p.replicas, seed, opt);
}

/// A BK block passes when at least one verdict is conclusive and every
/// conclusive verdict passes.
void settle_bk_block(Block& b, const std::vector<BkVerdict>& verdicts) {
  bool any_conclusive = false, all_pass = true;
  json vs = json::array();
  for (const auto& v : verdicts) {
    vs.push_back(polylab::to_json(v));
    if (v.inconclusive) {
      b.warnings.push_back(v.estimator + ": inconclusive (effective sample size " + std::to_string(v.ess) + ")");
      continue;
    }
    any_conclusive = true;
    all_pass = all_pass && v.pass;
  }
  if (!any_conclusive) b.warnings.push_back("no conclusive verdict");
  b.pass = any_conclusive && all_pass;
  b.result["verdicts"] = vs;
}

std::vector<Block> run_bk(const BkParams& p, const RunConfig& cfg, std::ostream* csv) {
  std::vector<IncreasingEvent> events;
  std::vector<json> event_json;
  std::vector<Block> out;
  try {
    for (std::size_t e = 0; e < p.events.size(); ++e) {
      const EventParams& ep = p.events[e];
      json ej{{"at", {ep.p, ep.q}}};
      double thr = 0.0;
      if (ep.quantile) {
        const auto s = rhs_samples(p, ep, replica_seed(cfg.seed, kQuantileTag, e), cfg.workers);
        thr = quantile(s, *ep.quantile);
        ej["quantile"] = *ep.quantile;
        ej["quantile_samples"] = p.quantile_samples;
      } else {
        thr = *ep.log_threshold;
      }
      if (!std::isfinite(thr)) throw InvalidInput("event threshold is not finite");
      ej["log_threshold"] = thr;
      events.push_back(IncreasingEvent::threshold(ep.p, ep.q, thr));
      event_json.push_back(ej);
    }
  } catch (const std::exception& ex) {
    Block b;
    b.name = "events";
    b.error = ex.what();
    return {b};
  }
  if (csv) *csv << "block,estimator,replica,log_weight,lhs,rhs\n";
  for (std::size_t g = 0; g < p.profiles; ++g) {
    const std::uint64_t g_seed = replica_seed(cfg.seed, kProfileTag, g);
    const std::uint64_t seed = replica_seed(cfg.seed, kReplicaTag, g);
    std::vector<Block> blocks(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      blocks[e].name = p.experiment + "/profile " + std::to_string(g) + "/event " + std::to_string(e);
      blocks[e].result["profile"] = g;
      blocks[e].result["g_seed"] = g_seed;
      blocks[e].result["replica_seed"] = seed;
      blocks[e].result["event"] = event_json[e];
    }
    std::vector<std::vector<BkVerdict>> per_event(events.size());
    try {
      for (const auto& est : p.estimators) {
        BkOptions opt;
        opt.k = p.k;
        opt.ess_floor = p.ess_floor;
        opt.workers = cfg.workers;
        opt.keep_replicas = csv != nullptr;
        opt.route = p.route == "primal" ? LhsRoute::primal : LhsRoute::line_ensemble;
        opt.estimator = est == "mcmc" ? LhsEstimator::mcmc : LhsEstimator::importance;
        opt.chains = p.chains;
        opt.burn_in = p.burn_in;
        const auto vs = run_bk_once(p, events, g_seed, seed, opt);
        for (std::size_t e = 0; e < vs.size(); ++e) per_event[e].push_back(vs[e]);
      }
      for (std::size_t e = 0; e < events.size(); ++e) settle_bk_block(blocks[e], per_event[e]);
    } catch (const std::exception& ex) {
      fail_all(blocks, ex.what());
    }
    for (std::size_t e = 0; e < blocks.size(); ++e) {
      if (csv)
        for (const auto& v : per_event[e]) {
          const std::size_t rows = std::max(v.lhs_indicator.size(), v.rhs_indicator.size());
          for (std::size_t r = 0; r < rows; ++r) {
            *csv << out.size() << ',' << v.estimator << ',' << r << ',';
            if (r < v.log_weight.size()) *csv << v.log_weight[r];
            *csv << ',';
            if (r < v.lhs_indicator.size()) *csv << v.lhs_indicator[r];
            *csv << ',';
            if (r < v.rhs_indicator.size()) *csv << v.rhs_indicator[r];
            *csv << '\n';
          }
        }
      out.push_back(std::move(blocks[e]));
    }
  }
  return out;
}

// ------------------------------------------------------------ counterexample

void settle_counterexample(Block& b, const CounterexampleResult& r, std::optional<bool> expect) {
  b.result["outcome"] = polylab::to_json(r);
  const bool verdict = r.status == "exact" || r.status == "verified" || r.status == "refuted";
  if (!verdict) b.warnings.push_back("no verdict: " + r.status);
  if (expect) b.result["expect_violated"] = *expect;
  b.pass = verdict && (!expect || r.violated == *expect);
}

std::vector<Block> run_counterexample(const CounterexampleParams& p, const RunConfig& cfg, std::ostream* csv) {
  std::vector<Block> out;
  if (csv) *csv << "block,family,status,lhs,rhs,violated,samples,hits\n";
  auto row = [&](const std::string& fam, const CounterexampleResult& r) {
    if (csv)
      *csv << out.size() << ',' << fam << ',' << r.status << ',' << r.lhs << ',' << r.rhs << ','
           << (r.violated ? 1 : 0) << ',' << r.samples << ',' << r.hits << '\n';
  };
  for (const auto& c : p.bernoulli) {
    out.push_back(guarded("bernoulli p=" + json(c.p).dump() + " t=" + json(c.t).dump(), [&](Block& b) {
      b.result["p"] = c.p;
      b.result["t"] = c.t;
      const auto r = counterexample_bernoulli(c.p, c.t);
      settle_counterexample(b, r, c.expect_violated);
      row("bernoulli", r);
    }));
  }
  for (std::size_t i = 0; i < p.uniform.size(); ++i) {
    const auto& c = p.uniform[i];
    out.push_back(guarded("uniform delta=" + json(c.delta).dump() + " t=" + json(c.t).dump(), [&](Block& b) {
      b.result["delta"] = c.delta;
      b.result["t"] = c.t;
      const auto r = counterexample_uniform(c.delta, c.t, c.samples, replica_seed(cfg.seed, kReplicaTag, i));
      settle_counterexample(b, r, c.expect_violated);
      row("uniform", r);
    }));
  }
  return out;
}

// --------------------------------------------------------------- gibbs-check

/// Smallest x with weighted CDF >= q.
double weighted_quantile(const std::vector<double>& x, const std::vector<double>& log_w, double q) {
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const double top = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += w[i] = std::exp(log_w[i] - top);
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += w[i];
    if (cum >= q * total) return x[i];
  }
  return x[order.back()];
}

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"se", e.standard_error}, {"samples", e.samples}, {"ess", num(e.ess)}};
}

Block reweighting_block(const ReweightingParams& p, std::size_t index, const RunConfig& cfg, std::ostream* csv) {
  return guarded("reweighting/profile " + std::to_string(index), [&](Block& b) {
    const DensityModel model(p.m, p.n, p.theta);
    const DensityModel sub(p.m - 1, p.n - 1, p.theta);
    const std::uint64_t g_seed = replica_seed(cfg.seed, kProfileTag, index);
    const ConditioningProfile g = pilot_profile(model, g_seed);

    // Five indicators {F_{a,b} >= c}, with c at quantiles of the conditioned
    // law estimated by an independent importance-sampling pilot.
    const int ma = p.m - 1, nb = p.n - 1;
    const std::vector<std::tuple<int, int, double>> shape{
        {1, 1, 0.5}, {ma, 1, 0.5}, {ma, nb, 0.5}, {1, nb, 0.5}, {1, 1, 0.25}};
    std::vector<Functional> raw;
    for (const auto& [a, bb, q] : shape)
      raw.push_back([a = a, bb = bb](const LineEnsemble& e) { return f_function(e, a, bb).logmag(); });
    const IsTrace pilot =
        is_trace(model, g, raw, p.threshold_samples, replica_seed(cfg.seed, kThresholdTag, index), cfg.workers);
    std::vector<Functional> phis;
    json fj = json::array();
    for (std::size_t k = 0; k < shape.size(); ++k) {
      const auto& [a, bb, q] = shape[k];
      const double thr = weighted_quantile(pilot.phi[k], pilot.log_weight, q);
      phis.push_back(f_at_least(a, bb, thr));
      fj.push_back({{"a", a}, {"b", bb}, {"quantile", q}, {"log_threshold", thr}});
    }
    IsOptions io;
    io.workers = cfg.workers;
    const std::uint64_t s = replica_seed(cfg.seed, kReplicaTag, index);
    const auto wis = windowed_expectation_is(model, g, p.eps, phis, p.replicas, s, io);
    const auto exact = conditional_expectation_is(model, g, phis, p.replicas, s, io);
    RejectionOptions ro;
    ro.min_accepted = p.min_accepted;
    ro.workers = cfg.workers;
    const auto rej = conditional_expectation_rejection(model, g, p.eps, phis, p.max_proposals,
                                                       replica_seed(cfg.seed, kForwardTag, index), ro);
    bool ok = rej.front().samples >= p.min_accepted;
    if (!ok) b.warnings.push_back("rejection stopped below the acceptance target");
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const double se = std::hypot(wis[k].standard_error, rej[k].standard_error);
      const double diff = wis[k].value - rej[k].value;
      const bool agree = std::fabs(diff) <= p.k * se;
      ok = ok && agree;
      fj[k]["windowed_is"] = estimate_json(wis[k]);
      fj[k]["rejection"] = estimate_json(rej[k]);
      fj[k]["exact_is"] = estimate_json(exact[k]);
      fj[k]["z"] = se > 0.0 ? json(diff / se) : json(nullptr);
      fj[k]["agree"] = agree;
      for (const auto& w : wis[k].warnings) b.warnings.push_back("windowed IS: " + w);
      if (csv) {
        *csv << b.name << ',' << k << ",windowed_is," << wis[k].value << ',' << wis[k].standard_error << '\n';
        *csv << b.name << ',' << k << ",rejection," << rej[k].value << ',' << rej[k].standard_error << '\n';
        *csv << b.name << ',' << k << ",exact_is," << exact[k].value << ',' << exact[k].standard_error << '\n';
      }
    }
    b.result["g_seed"] = g_seed;
    b.result["log_g"] = g.log_values();
    b.result["eps"] = p.eps;
    b.result["accepted"] = rej.front().samples;
    b.result["proposals"] = rej.front().proposals;
    b.result["functionals"] = fj;
    b.pass = ok;
  });
}

Block moments_block(const MomentsParams& p, std::size_t index, const RunConfig& cfg, std::ostream* csv) {
  const auto [m, n] = p.shapes[index];
  return guarded("moments/" + std::to_string(m) + "x" + std::to_string(n), [&](Block& b) {
    const DensityModel model(m, n, p.theta);
    McmcOptions mo;
    mo.burn_in = p.burn_in;
    mo.thin = p.thin;
    const McmcResult mc = mcmc_sample(model, p.steps, replica_seed(cfg.seed, kChainTag, index), mo);
    const auto fw = forward_ensembles(model, p.forward, replica_seed(cfg.seed, kForwardTag, index), cfg.workers);
    if (mc.zero_displacement) b.warnings.push_back("chain never moved");
    bool ok = !mc.samples.empty() && !mc.zero_displacement;
    json coords = json::array();
    for (const auto& [i, j] : fw.front().index().members()) {
      json cj{{"i", i}, {"j", j}};
      for (int power : {1, 2}) {
        std::vector<double> a, c;
        for (const auto& e : fw) a.push_back(std::pow(e.z(i, j).logmag(), power));
        for (const auto& e : mc.samples) c.push_back(std::pow(e.z(i, j).logmag(), power));
        const MeanSe fa = mean_se(a), mb = batch_means(c, p.batches);
        const double se = std::hypot(fa.se, mb.se);
        const bool agree = std::fabs(fa.mean - mb.mean) <= p.k * se;
        ok = ok && agree;
        const std::string key = power == 1 ? "mean_log" : "second_moment_log";
        cj[key] = {{"forward", fa.mean},
                   {"forward_se", fa.se},
                   {"mcmc", mb.mean},
                   {"mcmc_se", mb.se},
                   {"z", se > 0.0 ? json((mb.mean - fa.mean) / se) : json(nullptr)},
                   {"agree", agree}};
        if (csv) {
          const std::string item = "z(" + std::to_string(i) + "." + std::to_string(j) + ")";
          *csv << b.name << ',' << item << ",forward_" << key << ',' << fa.mean << ',' << fa.se << '\n';
          *csv << b.name << ',' << item << ",mcmc_" << key << ',' << mb.mean << ',' << mb.se << '\n';
        }
      }
      coords.push_back(cj);
    }
    b.result["m"] = m;
    b.result["n"] = n;
    b.result["theta"] = p.theta;
    b.result["kept_samples"] = mc.samples.size();
    b.result["acceptance_rate"] = mc.acceptance_rate;
    b.result["autocorrelation"] = num(mc.autocorrelation);
    b.result["coordinates"] = coords;
    b.pass = ok;
  });
}

std::vector<Block> run_gibbs(const GibbsCheckParams& p, const RunConfig& cfg, std::ostream* csv) {
  if (csv) *csv << "block,item,quantity,estimate,se\n";
  std::vector<Block> out;
  if (p.reweighting)
    for (std::size_t i = 0; i < p.reweighting->profiles; ++i) out.push_back(reweighting_block(*p.reweighting, i, cfg, csv));
  if (p.moments)
    for (std::size_t i = 0; i < p.moments->shapes.size(); ++i) out.push_back(moments_block(*p.moments, i, cfg, csv));
  return out;
}

// -------------------------------------------------------------------- scaling

std::vector<RescaledFieldSpec> level_specs(const ConvergenceParams& p, const RunConfig& cfg) {
  std::vector<RescaledFieldSpec> specs;
  for (std::size_t l = 0; l < p.levels.size(); ++l) {
    RescaledFieldSpec s;
    s.n = p.levels[l];
    for (const auto& q : p.points) s.region.push_back({q.x, q.s, q.y, q.t});
    s.replicas = p.replicas;
    s.seed = replica_seed(cfg.seed, kLevelTag, l);
    s.budget = p.budget;
    s.workers = cfg.workers;
    specs.push_back(s);
  }
  return specs;
}

std::vector<Block> run_scaling(const ScalingParams& p, const RunConfig& cfg, std::ostream* csv) {
  std::vector<Block> out;
  if (p.convergence) {
    const auto specs = level_specs(*p.convergence, cfg);
    out.push_back(guarded("convergence", [&](Block& b) {
      const ConvergenceReport r = convergence_diagnostic(specs);
      b.result = polylab::to_json(r);
      b.warnings = r.warnings;
      b.pass = true;
    }));
    if (csv) {
      *csv << "n,point,replica,value\n";
      for (const auto& s : specs) {
        std::ostringstream one;
        write_samples_csv(one, sample_z_n(s));
        const std::string text = one.str();
        *csv << text.substr(text.find('\n') + 1);
      }
    }
  }
  if (p.surrogate) {
    const SurrogateParams& sp = *p.surrogate;
    SurrogateGeometry geo;
    geo.t = sp.t;
    geo.x2 = sp.x2;
    geo.ends = sp.ends;
    for (std::size_t l = 0; l < sp.levels.size(); ++l) {
      const int n = sp.levels[l];
      std::vector<Block> blocks(sp.events.size());
      std::vector<IncreasingEvent> events;
      try {
        const SurrogateLattice lat = surrogate_lattice(n, geo);
        for (std::size_t e = 0; e < sp.events.size(); ++e) {
          const auto [end, q] = sp.events[e];
          blocks[e].name = "surrogate/n=" + std::to_string(n) + "/event " + std::to_string(e);
          const auto s = surrogate_rhs_log_samples(n, geo, end, sp.quantile_samples,
                                                   replica_seed(cfg.seed, kQuantileTag, l * 64 + e), cfg.workers);
          const double thr = quantile(s, q);
          events.push_back(IncreasingEvent::threshold(end, 1, thr));
          blocks[e].result["n"] = n;
          blocks[e].result["lattice"] = {{"rows", lat.rows}, {"a", lat.a}, {"b", lat.b}, {"m", lat.m},
                                         {"b_prime", lat.b_prime}};
          blocks[e].result["event"] = {{"end", end}, {"y", sp.ends[static_cast<std::size_t>(end - 1)]},
                                       {"quantile", q}, {"log_threshold", thr}};
        }
        BkOptions opt;
        opt.k = sp.k;
        opt.ess_floor = sp.ess_floor;
        opt.workers = cfg.workers;
        opt.route = LhsRoute::primal;
        opt.estimator = sp.estimator == "mcmc" ? LhsEstimator::mcmc : LhsEstimator::importance;
        opt.chains = sp.chains;
        opt.burn_in = sp.burn_in;
        const auto vs = prelimit_bk_surrogate(n, geo, events, replica_seed(cfg.seed, kProfileTag, l), sp.replicas,
                                              replica_seed(cfg.seed, kReplicaTag, l), opt);
        for (std::size_t e = 0; e < vs.size(); ++e) settle_bk_block(blocks[e], {vs[e]});
      } catch (const std::exception& ex) {
        for (std::size_t e = 0; e < blocks.size(); ++e)
          if (blocks[e].name.empty()) blocks[e].name = "surrogate/n=" + std::to_string(n) + "/event " + std::to_string(e);
        fail_all(blocks, ex.what());
      }
      for (auto& b : blocks) out.push_back(std::move(b));
    }
  }
  return out;
}

json params_json(const Params& params) {
  return std::visit(
      Overloaded{
          [](const IdentitiesParams& p) {
            return json{{"suites", p.suites},
                        {"lgv_grids", p.lgv_grids},
                        {"extended_seeds", p.extended_seeds},
                        {"cross_line_seeds", p.cross_line_seeds},
                        {"ratio_seeds", p.ratio_seeds},
                        {"tolerance", p.tolerance},
                        {"precision", p.precision}};
          },
          [](const BkParams& p) {
            json j{{"experiment", p.experiment}, {"m", p.m}, {"n", p.n}};
            if (p.experiment == "endpoint_variation") j["b"] = p.b;
            j["theta"] = p.theta;
            j["replicas"] = p.replicas;
            j["profiles"] = p.profiles;
            j["estimators"] = p.estimators;
            j["route"] = p.route;
            j["chains"] = p.chains;
            j["burn_in"] = p.burn_in;
            j["k"] = p.k;
            j["ess_floor"] = p.ess_floor;
            j["quantile_samples"] = p.quantile_samples;
            if (p.experiment == "multipoint") {
              j["w"] = p.w;
              json t = json::array();
              for (const auto& x : p.tuples) t.push_back({{"a", x.a}, {"ell", x.ell}});
              j["tuples"] = t;
            }
            json ev = json::array();
            for (const auto& e : p.events) {
              json x{{"at", {e.p, e.q}}};
              if (e.quantile) x["quantile"] = *e.quantile;
              if (e.log_threshold) x["log_threshold"] = *e.log_threshold;
              ev.push_back(x);
            }
            j["events"] = ev;
            return j;
          },
          [](const CounterexampleParams& p) {
            json b = json::array(), u = json::array();
            for (const auto& c : p.bernoulli) {
              json x{{"p", c.p}, {"t", c.t}};
              if (c.expect_violated) x["expect_violated"] = *c.expect_violated;
              b.push_back(x);
            }
            for (const auto& c : p.uniform) {
              json x{{"delta", c.delta}, {"t", c.t}, {"samples", c.samples}};
              if (c.expect_violated) x["expect_violated"] = *c.expect_violated;
              u.push_back(x);
            }
            return json{{"bernoulli", b}, {"uniform", u}};
          },
          [](const GibbsCheckParams& p) {
            json j = json::object();
            if (p.reweighting) {
              const auto& r = *p.reweighting;
              j["reweighting"] = {{"m", r.m},
                                  {"n", r.n},
                                  {"theta", r.theta},
                                  {"profiles", r.profiles},
                                  {"replicas", r.replicas},
                                  {"min_accepted", r.min_accepted},
                                  {"eps", r.eps},
                                  {"max_proposals", r.max_proposals},
                                  {"threshold_samples", r.threshold_samples},
                                  {"k", r.k}};
            }
            if (p.moments) {
              const auto& r = *p.moments;
              json shapes = json::array();
              for (const auto& [m, n] : r.shapes) shapes.push_back({m, n});
              j["moments"] = {{"shapes", shapes},   {"theta", r.theta},     {"steps", r.steps},
                              {"thin", r.thin},     {"burn_in", r.burn_in}, {"forward", r.forward},
                              {"batches", r.batches}, {"k", r.k}};
            }
            return j;
          },
          [](const ScalingParams& p) {
            json j = json::object();
            if (p.convergence) {
              const auto& c = *p.convergence;
              json pts = json::array();
              for (const auto& q : c.points) pts.push_back({{"x", q.x}, {"s", q.s}, {"y", q.y}, {"t", q.t}});
              j["convergence"] = {{"levels", c.levels}, {"points", pts}, {"replicas", c.replicas}, {"budget", c.budget}};
            }
            if (p.surrogate) {
              const auto& s = *p.surrogate;
              json ev = json::array();
              for (const auto& [end, q] : s.events) ev.push_back({{"end", end}, {"quantile", q}});
              j["surrogate"] = {{"levels", s.levels},
                                {"t", s.t},
                                {"x2", s.x2},
                                {"ends", s.ends},
                                {"events", ev},
                                {"replicas", s.replicas},
                                {"quantile_samples", s.quantile_samples},
                                {"estimator", s.estimator},
                                {"chains", s.chains},
                                {"burn_in", s.burn_in},
                                {"k", s.k},
                                {"ess_floor", s.ess_floor}};
            }
            return j;
          }},
      params);
}

}  // namespace

json config_echo(const RunConfig& cfg) {
  return {{"command", to_string(cfg.command)}, {"seed", cfg.seed}, {"params", params_json(cfg.params)}};
}

bool RunReport::pass() const {
  if (blocks.empty()) return false;
  for (const auto& b : blocks)
    if (!b.pass) return false;
  return true;
}

RunReport run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = config_echo(cfg);
  std::ostringstream csv;
  std::ostream* sink = cfg.dump_csv ? &csv : nullptr;
  rep.blocks = std::visit(Overloaded{[&](const IdentitiesParams& p) { return run_identities(p, cfg, sink); },
                                     [&](const BkParams& p) { return run_bk(p, cfg, sink); },
                                     [&](const CounterexampleParams& p) { return run_counterexample(p, cfg, sink); },
                                     [&](const GibbsCheckParams& p) { return run_gibbs(p, cfg, sink); },
                                     [&](const ScalingParams& p) { return run_scaling(p, cfg, sink); }},
                          cfg.params);
  rep.csv = csv.str();
  rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

json to_json(const Block& b) {
  json j{{"name", b.name}, {"pass", b.pass}};
  if (b.error) j["error"] = *b.error;
  j["warnings"] = b.warnings;
  j["result"] = b.result;
  return j;
}

json to_json(const RunReport& r) {
  json blocks = json::array();
  std::size_t passed = 0;
  for (const auto& b : r.blocks) {
    blocks.push_back(to_json(b));
    passed += b.pass ? 1 : 0;
  }
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config", r.config},
          {"wall_time_seconds", r.wall_time_seconds},
          {"blocks", blocks},
          {"summary", {{"blocks", r.blocks.size()}, {"passed", passed}}},
          {"pass", r.pass()}};
}

}  // namespace polylab::cli
