#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace polylab::cli {

inline constexpr const char* kToolName = "polylab";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Command { identities, bk, counterexample, gibbs_check, scaling };

const char* to_string(Command c);
/// Throws ConfigError on an unknown name.
Command parse_command(const std::string& name);

struct IdentitiesParams {
  std::vector<std::string> suites{"lgv", "extended_invariance", "cross_line", "ratio"};
  std::size_t lgv_grids = 1000;
  std::size_t extended_seeds = 200;
  std::size_t cross_line_seeds = 500;
  std::size_t ratio_seeds = 500;
  double tolerance = 1e-8;
  std::string precision = "adaptive";
};

/// One threshold event on coordinate (p, q). Exactly one of quantile and
/// log_threshold is set; a quantile is placed on the unconditioned side's
/// empirical distribution at that coordinate.
struct EventParams {
  int p = 2;
  int q = 1;
  std::optional<double> quantile;
  std::optional<double> log_threshold;
};

struct TupleParams {
  std::vector<int> a;
  std::vector<int> ell;
};

struct BkParams {
  std::string experiment = "log_gamma";
  int m = 6;
  int n = 6;
  int b = 0;
  double theta = 2.0;
  std::size_t replicas = 100000;
  std::size_t profiles = 10;
  std::vector<std::string> estimators{"importance", "mcmc"};
  std::string route = "primal";
  std::size_t chains = 32;
  std::size_t burn_in = 200;
  double k = 3.0;
  double ess_floor = 200.0;
  std::size_t quantile_samples = 100000;
  int w = 1;
  std::vector<TupleParams> tuples;
  std::vector<EventParams> events;
};

struct BernoulliCase {
  double p = 0.5;
  double t = 0.5;
  std::optional<bool> expect_violated;
};

struct UniformCase {
  double delta = 0.1;
  double t = 0.4;
  std::size_t samples = 100000;
  std::optional<bool> expect_violated;
};

struct CounterexampleParams {
  std::vector<BernoulliCase> bernoulli;
  std::vector<UniformCase> uniform;
};

struct ReweightingParams {
  int m = 3;
  int n = 3;
  double theta = 2.0;
  std::size_t profiles = 5;
  std::size_t replicas = 100000;
  std::size_t min_accepted = 2000;
  double eps = 0.5;
  std::size_t max_proposals = 2'000'000'000;
  std::size_t threshold_samples = 20000;
  double k = 3.0;
};

struct MomentsParams {
  std::vector<std::pair<int, int>> shapes{{2, 2}, {3, 2}};
  double theta = 2.0;
  std::size_t steps = 300000;
  std::size_t thin = 5;
  std::size_t burn_in = 5000;
  std::size_t forward = 40000;
  std::size_t batches = 25;
  double k = 3.0;
};

struct GibbsCheckParams {
  std::optional<ReweightingParams> reweighting;
  std::optional<MomentsParams> moments;
};

struct PointParams {
  double x = 0.0;
  double s = 0.0;
  double y = 0.0;
  double t = 1.0;
};

struct ConvergenceParams {
  std::vector<int> levels{16, 64, 256};
  std::vector<PointParams> points{PointParams{}};
  std::size_t replicas = 20000;
  double budget = 4096.0;
};

struct SurrogateParams {
  std::vector<int> levels{36, 100};
  double t = 1.0;
  double x2 = 1.0;
  std::vector<double> ends{0.5, 1.0};
  /// (end index from 1, quantile) pairs.
  std::vector<std::pair<int, double>> events{{1, 0.5}};
  std::size_t replicas = 4000;
  std::size_t quantile_samples = 4000;
  std::string estimator = "mcmc";
  std::size_t chains = 16;
  std::size_t burn_in = 200;
  double k = 3.0;
  double ess_floor = 200.0;
};

struct ScalingParams {
  std::optional<ConvergenceParams> convergence;
  std::optional<SurrogateParams> surrogate;
};

using Params = std::variant<IdentitiesParams, BkParams, CounterexampleParams, GibbsCheckParams, ScalingParams>;

struct RunConfig {
  Command command = Command::identities;
  Params params;
  std::uint64_t seed = 1;
  /// Report path; empty writes the report to standard output.
  std::string out;
  int workers = 1;
  bool dump_csv = false;
};

/// Default seed: POLYLAB_SEED when set and valid, else 1.
std::uint64_t default_seed();

/// Parses a YAML run manifest for `command`. Top-level keys: command, seed,
/// out, workers, dump_csv, params. Unknown keys, type errors and
/// out-of-range values throw ConfigError naming the line and key.
RunConfig load_config(Command command, const std::string& text, const std::string& origin = "<config>");
RunConfig load_config_file(Command command, const std::string& path);

/// The part of the configuration that determines the results: command,
/// seed and the parameters with defaults filled in.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

struct Block {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json result = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
  /// Set when the module threw; the block then fails.
  std::optional<std::string> error;
};

struct RunReport {
  nlohmann::ordered_json config;
  double wall_time_seconds = 0.0;
  std::vector<Block> blocks;
  /// Command-specific CSV, filled when dump_csv is set.
  std::string csv;

  /// True iff there is at least one block and every block passes.
  bool pass() const;
};

RunReport run(const RunConfig& cfg);

nlohmann::ordered_json to_json(const Block& b);
nlohmann::ordered_json to_json(const RunReport& r);

/// Full CLI: parses argv, runs, writes outputs and returns the exit code
/// (0 pass, 1 fail, 2 usage or configuration error).
int main_entry(int argc, char** argv);

}  // namespace polylab::cli
