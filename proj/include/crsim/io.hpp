// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Configuration and result input/output for the command-line front end:
// strict JSON experiment configs (unknown keys fatal), deterministic tabular
// result files and manifests, and the experiment dispatch that turns one
// parsed config into artifacts on disk.
//
// Determinism contract: a (config, seed) pair produces byte-identical output
// files on every run. Nothing here reads clocks, locales, or environment.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "crsim/device.hpp"

namespace crsim {

using Json = nlohmann::json;

inline constexpr const char* kCrsimVersion = "1.0.0";
inline constexpr int kResultFormatVersion = 1;

/// Reads and parses a JSON file; parse failures are rethrown as
/// std::invalid_argument with the file name, line, and column.
Json load_json_file(const std::string& path);

/// Applies one `--set path.to.key=value` override onto a config object. The
/// value text is parsed as JSON when it is valid JSON (numbers, booleans,
/// arrays, objects), else taken as a string. Intermediate objects are
/// created as needed.
void apply_override(Json& config, const std::string& assignment);

/// Strict device parser: every key must be recognized. See the grammar in
/// the repository README.
DeviceConfig device_from_json(const Json& j);

/// Inverse of device_from_json (used to embed the resolved device in the
/// manifest); device_from_json(device_to_json(cfg)) reproduces cfg.
Json device_to_json(const DeviceConfig& cfg);

/// One fully parsed experiment configuration.
struct ParsedConfig {
  std::string experiment;  // one of the run subcommands
  std::uint64_t seed = 0;
  std::string out_dir;  // output directory (config "out" or --out override)
  DeviceConfig device;
  Json params;    // experiment-specific block (strictly validated on use)
  Json resolved;  // canonical full config, as embedded in the manifest
};

/// Validates the top-level config object: required keys (experiment, seed,
/// device), known experiment name, no unknown keys. The params block is
/// validated by the experiment runner.
ParsedConfig parse_config(const Json& config);

/// FNV-1a 64-bit hash of the canonical (sorted-key) config dump, as
/// "fnv1a:<16 hex digits>".
std::string config_hash(const Json& config);

/// Outcome of run_experiment: warnings surface in the manifest (the run
/// still exits 0 -- flagged quality is not failure), outputs lists the
/// result files written, relative to the output directory.
struct RunResult {
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  /// Human-readable lines (calibration summaries etc.) for the CLI to print.
  std::vector<std::string> summary;
};

/// Executes the configured experiment against an in-process provider and
/// writes result tables plus manifest.json into config.out_dir (created if
/// missing). Throws std::invalid_argument on config errors and
/// std::runtime_error on I/O failures.
RunResult run_experiment(const ParsedConfig& config);

/// Prints a human-readable summary (experiment, seed, warnings, result
/// tables) of a result directory produced by run_experiment. Throws when
/// the manifest is missing or corrupt. Never mutates the directory.
void report_directory(const std::string& dir, std::ostream& out);

}  // namespace crsim
