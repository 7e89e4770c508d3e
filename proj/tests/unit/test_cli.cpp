#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "polylab/errors.hpp"

using namespace polylab;
using namespace polylab::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("polylab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text = "") const {
    const fs::path p = path_ / name;
    if (!text.empty()) std::ofstream(p) << text;
    return p.string();
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "polylab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

nlohmann::ordered_json without_wall_time(nlohmann::ordered_json j) {
  j.erase("wall_time_seconds");
  return j;
}

std::string error_of(Command c, const std::string& text) {
  try {
    load_config(c, text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSmallBk = R"(
seed: 5
params:
  m: 4
  n: 4
  replicas: 600
  profiles: 2
  quantile_samples: 500
  chains: 4
  burn_in: 20
)";

}  // namespace

TEST(Config, DefaultsFillEveryCommand) {
  const RunConfig c = load_config(Command::counterexample, "");
  const auto& p = std::get<CounterexampleParams>(c.params);
  ASSERT_EQ(p.bernoulli.size(), 1u);
  ASSERT_EQ(p.uniform.size(), 1u);
  EXPECT_EQ(p.uniform[0].samples, 100000u);
  const RunConfig gc = load_config(Command::gibbs_check, "params: {}");
  const auto& g = std::get<GibbsCheckParams>(gc.params);
  EXPECT_TRUE(g.reweighting && g.moments);
  const RunConfig sc = load_config(Command::scaling, "");
  const auto& s = std::get<ScalingParams>(sc.params);
  ASSERT_TRUE(s.convergence && s.surrogate);
  EXPECT_EQ(s.convergence->levels, (std::vector<int>{16, 64, 256}));
  const RunConfig bc = load_config(Command::bk, "");
  const auto& b = std::get<BkParams>(bc.params);
  EXPECT_EQ(b.events.size(), 3u);
}

TEST(Config, UnknownKeysNameLineAndPath) {
  EXPECT_EQ(error_of(Command::counterexample, "seed: 1\nparams:\n  bernoulli:\n    - {p: 0.5, tt: 0.5}\n"),
            "cfg.yaml:4: unknown key 'params.bernoulli[0].tt'");
  EXPECT_EQ(error_of(Command::identities, "sed: 1\n"), "cfg.yaml:1: unknown key 'sed'");
  EXPECT_EQ(error_of(Command::scaling, "params:\n  convergence:\n    level: [16, 64]\n"),
            "cfg.yaml:3: unknown key 'params.convergence.level'");
}

TEST(Config, BadValuesAndSyntax) {
  EXPECT_EQ(error_of(Command::bk, "params:\n  m: six\n"), "cfg.yaml:2: key 'params.m' has invalid value 'six'");
  EXPECT_EQ(error_of(Command::bk, "params:\n  experiment: other\n"),
            "cfg.yaml:2: key 'params.experiment' must be log_gamma, endpoint_variation or multipoint");
  EXPECT_NE(error_of(Command::bk, "seed: [1\n").find("cfg.yaml:"), std::string::npos);
  EXPECT_NE(error_of(Command::bk, "- 1\n- 2\n").find("must be a mapping"), std::string::npos);
  EXPECT_NE(error_of(Command::bk, "command: scaling\n").find("not 'bk'"), std::string::npos);
  EXPECT_NE(error_of(Command::bk, "params:\n  events:\n    - {at: [2, 1], quantile: 0.5, log_threshold: 0}\n")
                .find("not both"),
            std::string::npos);
  EXPECT_THROW(parse_command("plot"), ConfigError);
}

TEST(Config, SeedPrecedence) {
  ::unsetenv("POLYLAB_SEED");
  EXPECT_EQ(load_config(Command::counterexample, "").seed, 1u);
  ::setenv("POLYLAB_SEED", "77", 1);
  EXPECT_EQ(load_config(Command::counterexample, "").seed, 77u);
  EXPECT_EQ(load_config(Command::counterexample, "seed: 9").seed, 9u);
  ::setenv("POLYLAB_SEED", "x", 1);
  EXPECT_THROW(load_config(Command::counterexample, ""), ConfigError);
  ::unsetenv("POLYLAB_SEED");

  TempDir d;
  const std::string cfg = d.file("c.yaml", "seed: 9\nparams:\n  uniform: [{delta: 0.1, t: 0.4, samples: 1000}]\n");
  const std::string out = d.file("r.json");
  ASSERT_EQ(invoke({"counterexample", "--config", cfg, "--seed", "12", "--out", out}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out))["config"]["seed"], 12);
}

TEST(Cli, ExitCodes) {
  TempDir d;
  const std::string out = d.file("r.json");
  EXPECT_EQ(invoke({"counterexample", "--config", d.file("bad.yaml", "params: {bernoulli: [{p: 0.5, t: [}\n"),
                    "--out", out}),
            2);
  EXPECT_EQ(invoke({"counterexample", "--config", d.file("missing.yaml")}), 2);
  EXPECT_EQ(invoke({"counterexample"}), 2);
  EXPECT_EQ(invoke({"nosuch", "--config", out}), 2);
  EXPECT_EQ(invoke({"counterexample", "--config",
                    d.file("ok.yaml", "params: {bernoulli: [{p: 0.5, t: 0.5, expect_violated: true}]}\n"), "--out",
                    out}),
            0);
  EXPECT_EQ(invoke({"counterexample", "--config",
                    d.file("no.yaml", "params: {bernoulli: [{p: 0.5, t: 0.5, expect_violated: false}]}\n"), "--out",
                    out}),
            1);
}

TEST(Cli, BernoulliBlockReportsViolation) {
  TempDir d;
  const std::string out = d.file("r.json");
  ASSERT_EQ(invoke({"counterexample", "--config", d.file("c.yaml", "params: {bernoulli: [{p: 0.5, t: 0.5}]}\n"),
                    "--out", out}),
            0);
  const auto j = nlohmann::json::parse(slurp(out));
  ASSERT_EQ(j["blocks"].size(), 1u);
  const auto& o = j["blocks"][0]["result"]["outcome"];
  EXPECT_EQ(o["status"], "exact");
  EXPECT_EQ(o["lhs"], 1.0);
  EXPECT_EQ(o["rhs"], 0.5);
  EXPECT_EQ(o["violated"], true);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["tool"], kToolName);
  EXPECT_EQ(j["config"]["command"], "counterexample");
}

TEST(Cli, ModuleErrorsBecomeFailedBlocks) {
  RunConfig cfg = load_config(Command::bk, "params: {m: 1, n: 4, replicas: 10, profiles: 1, events: [{at: [2, 1], "
                                           "log_threshold: 0}]}");
  const RunReport r = run(cfg);
  ASSERT_EQ(r.blocks.size(), 1u);
  EXPECT_FALSE(r.blocks[0].pass);
  ASSERT_TRUE(r.blocks[0].error.has_value());
  EXPECT_FALSE(r.pass());
  EXPECT_TRUE(to_json(r)["blocks"][0].contains("error"));
}

TEST(Cli, PassIsDerivedFromBlocks) {
  RunReport r;
  EXPECT_FALSE(r.pass());
  r.blocks.resize(2);
  r.blocks[0].pass = r.blocks[1].pass = true;
  EXPECT_TRUE(r.pass());
  r.blocks[1].pass = false;
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(to_json(r)["pass"], false);
}

TEST(Cli, IdentitiesSuiteReport) {
  const RunConfig cfg =
      load_config(Command::identities, "seed: 1\nparams: {suites: [lgv, ratio], lgv_grids: 40, ratio_seeds: 2}");
  const RunReport r = run(cfg);
  ASSERT_EQ(r.blocks.size(), 2u);
  for (const auto& b : r.blocks) {
    EXPECT_TRUE(b.pass) << b.name;
    EXPECT_LT(b.result["max_residual"].get<double>(), 1e-8);
    EXPECT_GT(b.result["cases"].get<std::size_t>(), 0u);
  }
}

TEST(Cli, ReportsIdenticalAcrossRunsAndWorkerCounts) {
  RunConfig one = load_config(Command::bk, kSmallBk);
  RunConfig three = one;
  three.workers = 3;
  const auto a = without_wall_time(to_json(run(one))).dump();
  const auto b = without_wall_time(to_json(run(one))).dump();
  const auto c = without_wall_time(to_json(run(three))).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  RunConfig other = one;
  other.seed = 6;
  EXPECT_NE(a, without_wall_time(to_json(run(other))).dump());
}

TEST(Cli, ConfigEchoOmitsExecutionSettings) {
  RunConfig cfg = load_config(Command::bk, kSmallBk);
  const auto e = config_echo(cfg);
  EXPECT_EQ(e["seed"], 5);
  EXPECT_FALSE(e.contains("workers"));
  EXPECT_FALSE(e.contains("out"));
  EXPECT_EQ(e["params"]["m"], 4);
  EXPECT_EQ(e["params"]["events"].size(), 3u);
}

TEST(Cli, CsvDumps) {
  TempDir d;
  const std::string cfg = d.file("c.yaml", kSmallBk);
  const std::string out = d.file("r.json");
  invoke({"bk", "--config", cfg, "--out", out, "--dump-csv"});
  const std::string csv = slurp(d.file("r.csv"));
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "block,estimator,replica,log_weight,lhs,rhs");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  // 2 profiles x 3 events x 2 estimators x 600 replicas.
  EXPECT_EQ(rows, 2u * 3u * 2u * 600u);
  EXPECT_EQ(invoke({"bk", "--config", cfg, "--dump-csv"}), 2);
}
