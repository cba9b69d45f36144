// nsldp: run, sweep, report and validate experiment configs.

#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsldp/errors.hpp"
#include "nsldp/harness.hpp"
#include "nsldp/parallel.hpp"

namespace {

using nsldp::ExperimentConfig;

ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = nsldp::load_config(path);
  if (seed) cfg = nsldp::with_value(cfg, "statistics.seed", *seed);
  return cfg;
}

void print_record(const nsldp::RunRecord& rec) {
  std::cout << rec.kind << " " << rec.config_hash << " -> " << rec.output_dir << "\n";
  for (const auto& c : rec.checks)
    std::cout << "  " << (c.pass ? "pass" : "FAIL") << "  " << c.name << " (value " << c.value << ", threshold "
              << c.threshold << ")\n";
  if (!rec.error.empty()) std::cout << "  error: " << rec.error << "\n";
  std::cout << (rec.pass ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Navier-Stokes large-deviation toolkit " + nsldp::toolkit_version()};
  app.require_subcommand(1);
  app.set_version_flag("--version", nsldp::toolkit_version());

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 1;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override statistics.seed");
    cmd->add_option("-j,--workers", workers, "worker threads (0: all cores)");
  };

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  common(run_cmd);
  run_cmd->add_option("-o,--out", out, "output root (default: io.output_dir)");

  std::string axis;
  std::string values_json;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a config along one parameter axis");
  common(sweep_cmd);
  sweep_cmd->add_option("-o,--out", out, "output root (default: io.output_dir)");
  sweep_cmd->add_option("--axis", axis, "dotted parameter path, e.g. noise.epsilon")->required();
  sweep_cmd->add_option("--values", values_json, "JSON array of values")->required();

  std::vector<std::string> dirs;
  auto* report_cmd = app.add_subcommand("report", "summarize run directories of one kind");
  report_cmd->add_option("dirs", dirs, "run directories")->required();
  report_cmd->add_option("-o,--out", out, "directory for report.csv and report.txt");

  auto* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("-c,--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<std::filesystem::path> root =
        out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
    if (*run_cmd) {
      nsldp::set_default_workers(workers);
      const auto rec = nsldp::run(load(config, seed), root);
      print_record(rec);
      return rec.pass ? 0 : 1;
    }
    if (*sweep_cmd) {
      const auto values = nlohmann::json::parse(values_json);
      if (!values.is_array()) throw nsldp::ConfigError("--values must be a JSON array");
      nsldp::set_default_workers(1);
      const auto res = nsldp::sweep(load(config, seed), axis, values.get<std::vector<nlohmann::json>>(), root,
                                    workers < 1 ? int(std::max(1u, std::thread::hardware_concurrency())) : workers);
      for (const auto& m : res.members) print_record(m);
      return res.pass ? 0 : 1;
    }
    if (*report_cmd) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      const auto doc = nsldp::report(paths, root);
      std::cout << doc.text;
      return doc.pass ? 0 : 1;
    }
    if (*validate_cmd) {
      const auto cfg = nsldp::load_config(config);
      nsldp::validate(cfg);
      std::cout << "ok " << nsldp::to_string(cfg.kind) << " " << nsldp::config_hash(cfg) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
