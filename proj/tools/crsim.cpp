// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// crsim: declarative experiment configs in, deterministic result files out.
//
//   crsim run <config.json> [--seed N] [--shots N] [--out DIR] [--set k=v]...
//   crsim <experiment> <config.json> [...]   (same, forcing the experiment)
//   crsim report <result-dir>
//
// Success prints the written files plus any quality warnings and exits 0
// (flagged-quality results are still successes; the flags live in the
// manifest). Failures print one JSON object {"error": "..."} to stderr and
// exit nonzero so callers can parse diagnostics without scraping text.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crsim/io.hpp"

namespace {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "simulate", "qpt",     "additivity", "ham-tomog",
      "calibrate-phase", "low-amp", "delay-scan", "purity-scan"};
  return names;
}

int run_command(const std::string& forced_experiment, const std::string& config_path,
                const std::vector<std::string>& overrides, long long seed, long long shots,
                const std::string& out_dir) {
  crsim::Json config = crsim::load_json_file(config_path);
  for (const auto& assignment : overrides) crsim::apply_override(config, assignment);
  if (seed >= 0) config["seed"] = static_cast<std::uint64_t>(seed);
  if (shots >= 0) config["params"]["shots"] = shots;
  if (!out_dir.empty()) config["out"] = out_dir;
  if (!forced_experiment.empty()) {
    if (config.contains("experiment") && config["experiment"] != forced_experiment) {
      throw std::invalid_argument("config declares experiment '" +
                                  config["experiment"].dump() + "' but the subcommand is '" +
                                  forced_experiment + "'");
    }
    config["experiment"] = forced_experiment;
  }

  const crsim::ParsedConfig parsed = crsim::parse_config(config);
  const crsim::RunResult result = crsim::run_experiment(parsed);

  std::cout << "wrote " << parsed.out_dir << "/manifest.json\n";
  for (const auto& name : result.outputs) {
    std::cout << "wrote " << parsed.out_dir << "/" << name << '\n';
  }
  for (const auto& line : result.summary) std::cout << line << '\n';
  for (const auto& warning : result.warnings) std::cout << "warning: " << warning << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixed-frequency transmon simulator and tomography toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  long long shots = -1;
  std::vector<std::string> overrides;

  std::vector<std::pair<CLI::App*, std::string>> run_commands;
  auto add_run_command = [&](const std::string& name, const std::string& help,
                             const std::string& forced) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--shots", shots, "override params.shots");
    cmd->add_option("--out", out_dir, "override the output directory");
    cmd->add_option("--set", overrides,
                    "override one config entry as path.to.key=value (repeatable)");
    run_commands.emplace_back(cmd, forced);
  };
  add_run_command("run", "run the experiment named in the config", "");
  for (const auto& name : experiment_names()) {
    add_run_command(name, "run a '" + name + "' experiment config", name);
  }

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand("report", "summarize a result directory");
  report_cmd->add_option("dir", report_dir, "directory containing manifest.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) {
      crsim::report_directory(report_dir, std::cout);
      return 0;
    }
    for (const auto& [cmd, forced] : run_commands) {
      if (cmd->parsed()) {
        return run_command(forced, config_path, overrides, seed, shots, out_dir);
      }
    }
    throw std::logic_error("no subcommand dispatched");  // unreachable: require_subcommand(1)
  } catch (const std::exception& err) {
    nlohmann::json diagnostic;
    diagnostic["error"] = err.what();
    std::cerr << diagnostic.dump() << '\n';
    return 1;
  }
}
