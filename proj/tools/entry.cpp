#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "polylab/errors.hpp"

namespace polylab::cli {
namespace {

std::string csv_path(const std::string& out) {
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? out.substr(0, dot) : out) + ".csv";
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Experiments on the log-gamma polymer and its line ensemble", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool dump_csv = false;
  for (Command c : {Command::identities, Command::bk, Command::counterexample, Command::gibbs_check, Command::scaling}) {
    CLI::App* sub = app.add_subcommand(to_string(c));
    sub->add_option("--config", config_path, "YAML run manifest")->required();
    sub->add_option("--seed", seed, "Master seed (overrides the manifest)");
    sub->add_option("--out", out, "Report path; '-' or empty writes to standard output");
    sub->add_option("--workers", workers, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("--dump-csv", dump_csv, "Also write <out stem>.csv");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    const Command cmd = parse_command(app.get_subcommands().front()->get_name());
    cfg = load_config_file(cmd, config_path);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (workers) cfg.workers = *workers;
    if (dump_csv) cfg.dump_csv = true;
    if (cfg.out == "-") cfg.out.clear();
    if (cfg.dump_csv && cfg.out.empty()) throw ConfigError("--dump-csv needs an output path");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const RunReport rep = run(cfg);
  const std::string text = to_json(rep).dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out);
    if (!f || !(f << text)) {
      std::cerr << "cannot write report to '" << cfg.out << "'\n";
      return 2;
    }
    if (cfg.dump_csv) {
      std::ofstream c(csv_path(cfg.out));
      if (!c || !(c << rep.csv)) {
        std::cerr << "cannot write CSV next to '" << cfg.out << "'\n";
        return 2;
      }
    }
  }
  for (const auto& b : rep.blocks)
    std::cerr << (b.pass ? "PASS " : "FAIL ") << b.name << (b.error ? " (error: " + *b.error + ")" : "") << '\n';
  return rep.pass() ? 0 : 1;
}

}  // namespace polylab::cli
