#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cli.hpp"
#include "polylab/errors.hpp"

namespace polylab::cli {
namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return origin;
  return origin + ":" + std::to_string(m.line + 1);
}

/// Strict view of a YAML mapping: every key must be read before finish().
class MapReader {
 public:
  MapReader(YAML::Node node, std::string path, std::string origin)
      : node_(std::move(node)), path_(std::move(path)), origin_(std::move(origin)) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      fail(node_, path_.empty() ? "configuration must be a mapping" : "'" + path_ + "' must be a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    throw ConfigError(where(origin_, at) + ": " + msg);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) { return static_cast<bool>(child(key)); }

  /// The value at `key`, or an invalid node when absent or null.
  YAML::Node child(const std::string& key) {
    known_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    YAML::Node v = map[key];
    if (!v || v.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return v;
  }

  template <class T>
  T scalar(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v, "key '" + key + "' must be a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "key '" + key + "' has invalid value '" + v.Scalar() + "'");
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const YAML::Node v = child(key);
    if (!v) return;
    out = scalar<T>(v, key_path(key));
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    const YAML::Node v = child(key);
    if (!v) return;
    out = scalar<T>(v, key_path(key));
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) {
    const YAML::Node v = child(key);
    if (!v) return;
    if (!v.IsSequence()) fail(v, "key '" + key_path(key) + "' must be a list");
    out.clear();
    for (const auto& e : v) out.push_back(scalar<T>(e, key_path(key)));
  }

  /// Calls each(reader) for every mapping in the list at `key`.
  template <class F>
  bool each(const std::string& key, F&& f) {
    const YAML::Node v = child(key);
    if (!v) return false;
    if (!v.IsSequence()) fail(v, "key '" + key_path(key) + "' must be a list");
    std::size_t i = 0;
    for (const auto& e : v) {
      MapReader r(e, key_path(key) + "[" + std::to_string(i++) + "]", origin_);
      f(r);
      r.finish();
    }
    return true;
  }

  MapReader sub(const std::string& key) { return MapReader(child(key), key_path(key), origin_); }

  void require(bool ok, const std::string& key, const std::string& msg) {
    if (ok) return;
    const YAML::Node at = child(key);
    fail(at ? at : node_, "key '" + key_path(key) + "' " + msg);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.Scalar();
      if (!known_.count(k)) fail(kv.first, "unknown key '" + key_path(k) + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_, origin_;
  std::set<std::string> known_;
};

template <class T>
bool one_of(const T& v, std::initializer_list<T> allowed) {
  for (const auto& a : allowed)
    if (v == a) return true;
  return false;
}

IdentitiesParams read_identities(MapReader& r) {
  IdentitiesParams p;
  r.get_list("suites", p.suites);
  for (const auto& s : p.suites)
    r.require(one_of<std::string>(s, {"lgv", "extended_invariance", "cross_line", "ratio"}), "suites",
              "has unknown suite '" + s + "'");
  r.get("lgv_grids", p.lgv_grids);
  r.get("extended_seeds", p.extended_seeds);
  r.get("cross_line_seeds", p.cross_line_seeds);
  r.get("ratio_seeds", p.ratio_seeds);
  r.get("tolerance", p.tolerance);
  r.require(p.tolerance > 0.0, "tolerance", "must be positive");
  r.get("precision", p.precision);
  r.require(one_of<std::string>(p.precision, {"adaptive", "standard", "extended"}), "precision",
            "must be adaptive, standard or extended");
  return p;
}

BkParams read_bk(MapReader& r) {
  BkParams p;
  r.get("experiment", p.experiment);
  r.require(one_of<std::string>(p.experiment, {"log_gamma", "endpoint_variation", "multipoint"}), "experiment",
            "must be log_gamma, endpoint_variation or multipoint");
  r.get("m", p.m);
  r.get("n", p.n);
  r.get("b", p.b);
  r.get("theta", p.theta);
  r.require(p.theta > 0.0, "theta", "must be positive");
  r.get("replicas", p.replicas);
  r.require(p.replicas >= 2, "replicas", "must be at least 2");
  r.get("profiles", p.profiles);
  r.require(p.profiles >= 1, "profiles", "must be at least 1");
  r.get_list("estimators", p.estimators);
  r.require(!p.estimators.empty(), "estimators", "must not be empty");
  for (const auto& e : p.estimators)
    r.require(one_of<std::string>(e, {"importance", "mcmc"}), "estimators", "has unknown estimator '" + e + "'");
  r.get("route", p.route);
  r.require(one_of<std::string>(p.route, {"primal", "line_ensemble"}), "route", "must be primal or line_ensemble");
  r.get("chains", p.chains);
  r.get("burn_in", p.burn_in);
  r.get("k", p.k);
  r.get("ess_floor", p.ess_floor);
  r.get("quantile_samples", p.quantile_samples);
  r.require(p.quantile_samples >= 2, "quantile_samples", "must be at least 2");
  r.get("w", p.w);
  r.each("tuples", [&](MapReader& t) {
    TupleParams tp;
    t.get_list("a", tp.a);
    t.get_list("ell", tp.ell);
    t.require(!tp.a.empty() && tp.a.size() == tp.ell.size(), "a", "and 'ell' must be non-empty and of equal length");
    p.tuples.push_back(tp);
  });
  if (p.experiment == "multipoint") r.require(!p.tuples.empty(), "tuples", "is required for multipoint");
  if (p.experiment == "endpoint_variation") r.require(p.b > 0, "b", "is required for endpoint_variation");
  const bool given = r.each("events", [&](MapReader& e) {
    EventParams ep;
    std::vector<int> at;
    e.get_list("at", at);
    e.require(at.size() == 2, "at", "must be a pair [p, q]");
    ep.p = at[0];
    ep.q = at[1];
    e.get("quantile", ep.quantile);
    e.get("log_threshold", ep.log_threshold);
    e.require(ep.quantile.has_value() != ep.log_threshold.has_value(), "quantile",
              "or 'log_threshold' must be given, not both");
    if (ep.quantile) e.require(*ep.quantile >= 0.0 && *ep.quantile <= 1.0, "quantile", "must lie in [0, 1]");
    p.events.push_back(ep);
  });
  if (!given) {
    const bool mp = p.experiment == "multipoint", ev = p.experiment == "endpoint_variation";
    const int p0 = mp ? 1 : (ev ? 2 : p.m / 2 + 1);
    const int q0 = mp ? 1 : (ev ? p.m : p.n / 2);
    for (double q : {0.25, 0.5, 0.75}) p.events.push_back({p0, q0, q, std::nullopt});
  }
  return p;
}

CounterexampleParams read_counterexample(MapReader& r) {
  CounterexampleParams p;
  const bool b = r.each("bernoulli", [&](MapReader& c) {
    BernoulliCase bc;
    c.get("p", bc.p);
    c.get("t", bc.t);
    c.get("expect_violated", bc.expect_violated);
    p.bernoulli.push_back(bc);
  });
  const bool u = r.each("uniform", [&](MapReader& c) {
    UniformCase uc;
    c.get("delta", uc.delta);
    c.get("t", uc.t);
    c.get("samples", uc.samples);
    c.get("expect_violated", uc.expect_violated);
    p.uniform.push_back(uc);
  });
  if (!b && !u) {
    p.bernoulli.push_back({0.5, 0.5, true});
    p.uniform.push_back({0.1, 0.4, 100000, true});
  }
  return p;
}

ReweightingParams read_reweighting(MapReader r) {
  ReweightingParams p;
  r.get("m", p.m);
  r.get("n", p.n);
  r.get("theta", p.theta);
  r.get("profiles", p.profiles);
  r.get("replicas", p.replicas);
  r.get("min_accepted", p.min_accepted);
  r.get("eps", p.eps);
  r.require(p.eps > 0.0, "eps", "must be positive");
  r.get("max_proposals", p.max_proposals);
  r.get("threshold_samples", p.threshold_samples);
  r.require(p.threshold_samples >= 2, "threshold_samples", "must be at least 2");
  r.get("k", p.k);
  r.finish();
  return p;
}

MomentsParams read_moments(MapReader r) {
  MomentsParams p;
  if (r.has("shapes")) {
    const YAML::Node v = r.child("shapes");
    if (!v.IsSequence()) r.fail(v, "key 'shapes' must be a list of [m, n] pairs");
    p.shapes.clear();
    for (const auto& e : v) {
      if (!e.IsSequence() || e.size() != 2) r.fail(e, "every shape must be a pair [m, n]");
      p.shapes.emplace_back(r.scalar<int>(e[0], "shapes"), r.scalar<int>(e[1], "shapes"));
    }
  }
  r.get("theta", p.theta);
  r.get("steps", p.steps);
  r.get("thin", p.thin);
  r.require(p.thin >= 1, "thin", "must be at least 1");
  r.get("burn_in", p.burn_in);
  r.get("forward", p.forward);
  r.require(p.forward >= 2, "forward", "must be at least 2");
  r.get("batches", p.batches);
  r.require(p.batches >= 2, "batches", "must be at least 2");
  r.get("k", p.k);
  r.finish();
  return p;
}

GibbsCheckParams read_gibbs(MapReader& r) {
  GibbsCheckParams p;
  if (r.has("reweighting")) p.reweighting = read_reweighting(r.sub("reweighting"));
  if (r.has("moments")) p.moments = read_moments(r.sub("moments"));
  if (!p.reweighting && !p.moments) {
    p.reweighting = ReweightingParams{};
    p.moments = MomentsParams{};
  }
  return p;
}

ConvergenceParams read_convergence(MapReader r) {
  ConvergenceParams p;
  r.get_list("levels", p.levels);
  r.require(p.levels.size() >= 2, "levels", "needs at least two levels");
  if (r.each("points", [&](MapReader& q) {
        PointParams pp;
        q.get("x", pp.x);
        q.get("s", pp.s);
        q.get("y", pp.y);
        q.get("t", pp.t);
        p.points.push_back(pp);
      })) {
    p.points.erase(p.points.begin());
  }
  r.require(!p.points.empty(), "points", "must not be empty");
  r.get("replicas", p.replicas);
  r.get("budget", p.budget);
  r.finish();
  return p;
}

SurrogateParams read_surrogate(MapReader r) {
  SurrogateParams p;
  r.get_list("levels", p.levels);
  r.require(!p.levels.empty(), "levels", "must not be empty");
  r.get("t", p.t);
  r.get("x2", p.x2);
  r.get_list("ends", p.ends);
  r.require(!p.ends.empty(), "ends", "must not be empty");
  std::vector<std::pair<int, double>> events;
  if (r.each("events", [&](MapReader& e) {
        int end = 1;
        double q = 0.5;
        e.get("end", end);
        e.get("quantile", q);
        e.require(q >= 0.0 && q <= 1.0, "quantile", "must lie in [0, 1]");
        e.require(end >= 1 && end <= static_cast<int>(p.ends.size()), "end", "must index one of 'ends'");
        events.emplace_back(end, q);
      }))
    p.events = events;
  r.get("replicas", p.replicas);
  r.get("quantile_samples", p.quantile_samples);
  r.require(p.quantile_samples >= 2, "quantile_samples", "must be at least 2");
  r.get("estimator", p.estimator);
  r.require(one_of<std::string>(p.estimator, {"importance", "mcmc"}), "estimator", "must be importance or mcmc");
  r.get("chains", p.chains);
  r.get("burn_in", p.burn_in);
  r.get("k", p.k);
  r.get("ess_floor", p.ess_floor);
  r.finish();
  return p;
}

ScalingParams read_scaling(MapReader& r) {
  ScalingParams p;
  if (r.has("convergence")) p.convergence = read_convergence(r.sub("convergence"));
  if (r.has("surrogate")) p.surrogate = read_surrogate(r.sub("surrogate"));
  if (!p.convergence && !p.surrogate) {
    p.convergence = ConvergenceParams{};
    p.surrogate = SurrogateParams{};
  }
  return p;
}

Params read_params(Command c, MapReader& r) {
  switch (c) {
    case Command::identities: return read_identities(r);
    case Command::bk: return read_bk(r);
    case Command::counterexample: return read_counterexample(r);
    case Command::gibbs_check: return read_gibbs(r);
    case Command::scaling: return read_scaling(r);
  }
  throw ConfigError("unknown command");
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::identities: return "identities";
    case Command::bk: return "bk";
    case Command::counterexample: return "counterexample";
    case Command::gibbs_check: return "gibbs-check";
    case Command::scaling: return "scaling";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::identities, Command::bk, Command::counterexample, Command::gibbs_check, Command::scaling})
    if (name == to_string(c)) return c;
  throw ConfigError("unknown command '" + name + "'");
}

std::uint64_t default_seed() {
  const char* env = std::getenv("POLYLAB_SEED");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 0);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("POLYLAB_SEED is not an unsigned integer: '") + env + "'");
}

RunConfig load_config(Command command, const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  MapReader r(root, "", origin);
  RunConfig cfg;
  cfg.command = command;
  std::string name;
  r.get("command", name);
  if (!name.empty() && name != to_string(command))
    r.fail(r.child("command"), std::string("config is for command '") + name + "', not '" + to_string(command) + "'");
  cfg.seed = default_seed();
  r.get("seed", cfg.seed);
  r.get("out", cfg.out);
  r.get("workers", cfg.workers);
  r.require(cfg.workers >= 0, "workers", "must be non-negative");
  r.get("dump_csv", cfg.dump_csv);
  MapReader pr = r.sub("params");
  cfg.params = read_params(command, pr);
  pr.finish();
  r.finish();
  return cfg;
}

RunConfig load_config_file(Command command, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(command, ss.str(), path);
}

}  // namespace polylab::cli
