// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Golden-file tests of the command-line front end. Each case invokes the
// installed binary (CRSIM_CLI_PATH, injected by the build) on a small config
// and checks the files it writes, the exit code, and the stream discipline:
// human-readable progress on stdout, one JSON diagnostic object on stderr.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

/// Runs the CLI with `args`, capturing one stream: stdout by default,
/// stderr alone when `capture_stderr` (stdout is discarded).
CliResult run_cli(const std::string& args, bool capture_stderr = false) {
  std::string cmd = std::string(CRSIM_CLI_PATH) + " " + args;
  cmd += capture_stderr ? " 2>&1 1>/dev/null" : " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    result.output.append(buffer, n);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

/// Fresh scratch directory for one test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "crsim_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) lines.push_back(line);
  return lines;
}

/// Two-qubit pair with representative generator constants; exact sampling.
Json pair_config(const fs::path& out) {
  return Json{
      {"experiment", "ham-tomog"},
      {"seed", 7},
      {"out", out.string()},
      {"device",
       {{"n", 2},
        {"omega", {5000.0, 4900.0}},
        {"alpha", {-330.0, -330.0}},
        {"coupling", Json::array({{{"i", 0}, {"j", 1}, {"j_mhz", 2.0}}})}}},
      {"params",
       {{"control", 0},
        {"target", 1},
        {"amplitude", 36.0},
        {"phase", -0.05},
        {"times", {{"start", 0.0}, {"stop", 20.0}, {"points", 240}}},
        {"stark_times", {{"start", 0.0}, {"stop", 16.0}, {"points", 1200}}},
        {"shots", 0}}}};
}

/// Single qubit with one dispersive defect; sampled delay scan.
Json delay_config(const fs::path& out) {
  return Json{{"experiment", "delay-scan"},
              {"seed", 11},
              {"out", out.string()},
              {"device",
               {{"n", 1},
                {"omega", {5000.0}},
                {"alpha", {-330.0}},
                {"frame_detuning", {0.21}},
                {"t2", {20.2}},
                {"tls", Json::array({{{"qubit", 0}, {"chi", 0.03}, {"p_excited", 0.48}}})}}},
              {"params",
               {{"qubit", 0},
                {"delays", {{"start", 0.0}, {"stop", 30.0}, {"points", 31}}},
                {"shots", 512},
                {"repetitions", 2}}}};
}

}  // namespace

TEST_CASE("ham-tomog writes the seven-label rate table") {
  const fs::path dir = scratch("ham_tomog");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, pair_config(dir / "out").dump());

  const auto run = run_cli("run " + cfg.string());
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("manifest.json") != std::string::npos);
  CHECK(run.output.find("rates.tsv") != std::string::npos);

  const auto rows = lines_of(read_file(dir / "out" / "rates.tsv"));
  REQUIRE(rows.size() == 8);  // header + seven labels
  CHECK(rows[0] == "label\trate_mhz");
  const std::vector<std::string> labels = {"IX", "IY", "IZ", "ZI", "ZX", "ZY", "ZZ"};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CHECK(rows[i + 1].substr(0, 3) == labels[i] + "\t");
  }
  // The control Stark magnitude lands on the ZI row.
  const std::string zi = rows[4].substr(3);
  CHECK(std::abs(std::stod(zi) - 3.081) < 0.02);

  // Outputs listed in the manifest all exist.
  const Json manifest = Json::parse(read_file(dir / "out" / "manifest.json"));
  for (const auto& name : manifest["outputs"]) {
    CHECK(fs::exists(dir / "out" / name.get<std::string>()));
  }
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["experiment"] == "ham-tomog");
  CHECK(manifest["config_hash"].get<std::string>().substr(0, 6) == "fnv1a:");
}

TEST_CASE("same config and seed rerun byte-identically") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, delay_config(dir / "out").dump());

  REQUIRE(run_cli("run " + cfg.string()).exit_code == 0);
  const std::string first_scan = read_file(dir / "out" / "delay_scan.tsv");
  const std::string first_manifest = read_file(dir / "out" / "manifest.json");

  fs::remove_all(dir / "out");
  REQUIRE(run_cli("run " + cfg.string()).exit_code == 0);
  CHECK(read_file(dir / "out" / "delay_scan.tsv") == first_scan);
  CHECK(read_file(dir / "out" / "manifest.json") == first_manifest);
}

TEST_CASE("manifest-embedded config re-runs to identical results") {
  const fs::path dir = scratch("round_trip");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, delay_config(dir / "first").dump());
  REQUIRE(run_cli("run " + cfg.string()).exit_code == 0);

  Json manifest = Json::parse(read_file(dir / "first" / "manifest.json"));
  Json embedded = manifest["config"];
  embedded["out"] = (dir / "second").string();
  write_file(dir / "replay.json", embedded.dump());
  REQUIRE(run_cli("run " + (dir / "replay.json").string()).exit_code == 0);

  for (const auto& name : manifest["outputs"]) {
    const std::string file = name.get<std::string>();
    CHECK(read_file(dir / "second" / file) == read_file(dir / "first" / file));
  }
}

TEST_CASE("unknown config keys are fatal with a JSON diagnostic on stderr") {
  const fs::path dir = scratch("strict");
  Json cfg = delay_config(dir / "out");
  cfg["typo_key"] = 3;
  write_file(dir / "config.json", cfg.dump());

  const auto run = run_cli("run " + (dir / "config.json").string(), true);
  CHECK(run.exit_code != 0);
  const Json diagnostic = Json::parse(run.output);
  const std::string message = diagnostic["error"].get<std::string>();
  CHECK(message.find("unknown key 'typo_key'") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  SUBCASE("nested unknown keys name their section") {
    Json nested = delay_config(dir / "out");
    nested["device"]["chi"] = 0.03;
    write_file(dir / "nested.json", nested.dump());
    const auto bad = run_cli("run " + (dir / "nested.json").string(), true);
    CHECK(bad.exit_code != 0);
    CHECK(bad.output.find("device: unknown key 'chi'") != std::string::npos);
  }
}

TEST_CASE("malformed JSON reports the line and column") {
  const fs::path dir = scratch("parse_error");
  write_file(dir / "bad.json", "{\"experiment\": \"simulate\",\n  \"seed\": oops}\n");
  const auto run = run_cli("run " + (dir / "bad.json").string(), true);
  CHECK(run.exit_code != 0);
  const Json diagnostic = Json::parse(run.output);
  const std::string message = diagnostic["error"].get<std::string>();
  CHECK(message.find("bad.json:2:") != std::string::npos);
  CHECK(message.find("parse error") != std::string::npos);
}

TEST_CASE("--seed, --shots and --set override the config") {
  const fs::path dir = scratch("overrides");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, delay_config(dir / "out").dump());

  REQUIRE(run_cli("run " + cfg.string()).exit_code == 0);
  const std::string base = read_file(dir / "out" / "delay_scan.tsv");

  SUBCASE("--seed changes the sampled data and the manifest") {
    REQUIRE(run_cli("run " + cfg.string() + " --seed 99 --out " + (dir / "seeded").string())
                .exit_code == 0);
    const Json manifest = Json::parse(read_file(dir / "seeded" / "manifest.json"));
    CHECK(manifest["seed"] == 99);
    CHECK(read_file(dir / "seeded" / "delay_scan.tsv") != base);
  }

  SUBCASE("--set rewrites a nested entry before parsing") {
    REQUIRE(run_cli("run " + cfg.string() + " --set params.repetitions=1 --out " +
                    (dir / "set").string())
                .exit_code == 0);
    const Json manifest = Json::parse(read_file(dir / "set" / "manifest.json"));
    CHECK(manifest["config"]["params"]["repetitions"] == 1);
    // One repetition: no ensemble statistics to write.
    CHECK_FALSE(fs::exists(dir / "set" / "ensemble.tsv"));
  }

  SUBCASE("--shots 0 switches to exact expectations") {
    REQUIRE(run_cli("run " + cfg.string() + " --shots 0 --out " + (dir / "exact").string())
                .exit_code == 0);
    // Exact expectations are shot-noise free: both repetitions sample the
    // same defect parameters (no respawn ranges), so rows coincide.
    const auto rows = lines_of(read_file(dir / "exact" / "delay_scan.tsv"));
    REQUIRE(rows.size() == 1 + 2 * 31);
    CHECK(rows[1].substr(rows[1].find('\t', 2)) == rows[32].substr(rows[32].find('\t', 2)));
  }
}

TEST_CASE("experiment subcommands force and validate the experiment name") {
  const fs::path dir = scratch("sugar");
  Json cfg = delay_config(dir / "out");
  cfg.erase("experiment");
  write_file(dir / "bare.json", cfg.dump());

  // A bare config runs under the experiment-named subcommand.
  CHECK(run_cli("delay-scan " + (dir / "bare.json").string()).exit_code == 0);
  CHECK(fs::exists(dir / "out" / "delay_scan.tsv"));

  // A config naming a different experiment is rejected.
  write_file(dir / "named.json", delay_config(dir / "other").dump());
  const auto clash = run_cli("qpt " + (dir / "named.json").string(), true);
  CHECK(clash.exit_code != 0);
  CHECK(clash.output.find("subcommand") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "other"));
}

TEST_CASE("report prints the tables and surfaces warnings") {
  const fs::path dir = scratch("report");
  Json cfg = pair_config(dir / "out");
  // A window much shorter than the slow conditional precession leaves the
  // fits under-resolved, which must surface as warning lines.
  cfg["params"]["times"] = {{"start", 0.0}, {"stop", 0.5}, {"points", 41}};
  cfg["params"].erase("stark_times");
  write_file(dir / "config.json", cfg.dump());
  const auto run = run_cli("run " + (dir / "config.json").string());
  REQUIRE(run.exit_code == 0);
  CHECK(run.output.find("warning:") != std::string::npos);

  const auto report = run_cli("report " + (dir / "out").string());
  CHECK(report.exit_code == 0);
  CHECK(report.output.find("experiment: ham-tomog") != std::string::npos);
  CHECK(report.output.find("seed: 7") != std::string::npos);
  CHECK(report.output.find("warning:") != std::string::npos);
  CHECK(report.output.find("-- rates.tsv --") != std::string::npos);
  CHECK(report.output.find("ZI") != std::string::npos);

  SUBCASE("missing manifest is an error") {
    fs::create_directories(dir / "empty");
    const auto missing = run_cli("report " + (dir / "empty").string(), true);
    CHECK(missing.exit_code != 0);
    CHECK(missing.output.find("manifest") != std::string::npos);
  }

  SUBCASE("corrupt manifest is an error") {
    fs::create_directories(dir / "corrupt");
    write_file(dir / "corrupt" / "manifest.json", "{}");
    const auto corrupt = run_cli("report " + (dir / "corrupt").string(), true);
    CHECK(corrupt.exit_code != 0);
    CHECK(corrupt.output.find("corrupt manifest") != std::string::npos);
  }
}

TEST_CASE("rejected providers and bad values carry their config path") {
  const fs::path dir = scratch("values");
  Json cfg = delay_config(dir / "out");

  SUBCASE("defect devices cannot run on the closed-form provider") {
    cfg["params"]["provider"] = "effective";
    write_file(dir / "config.json", cfg.dump());
    const auto run = run_cli("run " + (dir / "config.json").string(), true);
    CHECK(run.exit_code != 0);
    CHECK(run.output.find("does not model defects") != std::string::npos);
  }

  SUBCASE("seed is mandatory") {
    cfg.erase("seed");
    write_file(dir / "config.json", cfg.dump());
    const auto run = run_cli("run " + (dir / "config.json").string(), true);
    CHECK(run.exit_code != 0);
    CHECK(run.output.find("seed") != std::string::npos);
  }

  SUBCASE("type errors name the offending entry") {
    cfg["params"]["qubit"] = "zero";
    write_file(dir / "config.json", cfg.dump());
    const auto run = run_cli("run " + (dir / "config.json").string(), true);
    CHECK(run.exit_code != 0);
    CHECK(run.output.find("params.qubit") != std::string::npos);
  }
}
