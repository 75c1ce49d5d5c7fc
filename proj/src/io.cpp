// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crsim/calibration.hpp"
#include "crsim/ham_tomo.hpp"
#include "crsim/provider.hpp"
#include "crsim/qpt.hpp"
#include "crsim/tls.hpp"

namespace fs = std::filesystem;

namespace crsim {

namespace {

// ---------------------------------------------------------------------------
// Strict JSON access

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check_keys(const Json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(context + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(context + ": unknown key '" + it.key() + "'");
  }
}

const Json& field(const Json& j, const std::string& context, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(context + ": missing required key '" + key + "'");
  return *it;
}

double as_number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(what + ": expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) fail(what + ": expected an integer");
  return v.get<int>();
}

std::string as_string(const Json& v, const std::string& what) {
  if (!v.is_string()) fail(what + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_number_array(const Json& v, const std::string& what) {
  if (!v.is_array()) fail(what + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, what + " element"));
  return out;
}

std::vector<int> as_int_array(const Json& v, const std::string& what) {
  if (!v.is_array()) fail(what + ": expected an array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_int(e, what + " element"));
  return out;
}

double number_or(const Json& j, const std::string& context, const char* key, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, context + "." + key);
}

int int_or(const Json& j, const std::string& context, const char* key, int fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_int(*it, context + "." + key);
}

std::string string_or(const Json& j, const std::string& context, const char* key,
                      const std::string& fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_string(*it, context + "." + key);
}

// ---------------------------------------------------------------------------
// Deterministic formatting and table output

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

using Row = std::vector<std::string>;

void write_table(const fs::path& file, const Row& header, const std::vector<Row>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  auto emit = [&out](const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << '\t';
      out << row[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
}

// ---------------------------------------------------------------------------
// Shared experiment-parameter parsers

/// A time grid: either an explicit increasing array or
/// {"start": s, "stop": e, "points": n} expanded inclusively.
std::vector<double> times_from(const Json& v, const std::string& context) {
  if (v.is_array()) {
    const auto times = as_number_array(v, context);
    if (times.empty()) fail(context + ": empty time grid");
    return times;
  }
  check_keys(v, context, {"start", "stop", "points"});
  const double start = as_number(field(v, context, "start"), context + ".start");
  const double stop = as_number(field(v, context, "stop"), context + ".stop");
  const int points = as_int(field(v, context, "points"), context + ".points");
  if (points < 2) fail(context + ": need at least 2 points");
  if (!(stop > start) || start < 0.0) fail(context + ": need 0 <= start < stop");
  std::vector<double> times(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    times[static_cast<std::size_t>(i)] = start + (stop - start) * i / (points - 1);
  }
  return times;
}

DriveProgram drives_from(const Json& v, const std::string& context) {
  if (!v.is_array()) fail(context + ": expected an array of drives");
  DriveProgram program;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string ctx = context + "[" + std::to_string(i) + "]";
    const Json& d = v[i];
    check_keys(d, ctx,
               {"qubit", "carrier_target", "amplitude", "phase", "detuning", "xy", "hz",
                "ramp_time"});
    ConstantDrive drive;
    drive.qubit = as_int(field(d, ctx, "qubit"), ctx + ".qubit");
    drive.carrier_target = int_or(d, ctx, "carrier_target", drive.qubit);
    drive.amplitude = as_number(field(d, ctx, "amplitude"), ctx + ".amplitude");
    drive.phase = number_or(d, ctx, "phase", 0.0);
    drive.detuning = number_or(d, ctx, "detuning", 0.0);
    drive.xy = number_or(d, ctx, "xy", 1.0);
    drive.hz = number_or(d, ctx, "hz", 0.0);
    drive.ramp_time = number_or(d, ctx, "ramp_time", 0.0);
    program.drives.push_back(drive);
  }
  return program;
}

std::unique_ptr<MeasurementProvider> make_provider(const ParsedConfig& config,
                                                   const std::string& name) {
  if (name == "simulator") {
    return std::make_unique<SimulatorProvider>(config.device, config.seed);
  }
  if (name == "effective") {
    if (!config.device.tls.empty()) {
      fail("provider 'effective' does not model defects; use 'simulator' or drop device.tls");
    }
    return std::make_unique<EffectiveHamiltonianProvider>(config.device, config.seed);
  }
  fail("unknown provider '" + name + "' (expected 'simulator' or 'effective')");
}

std::unique_ptr<MeasurementProvider> provider_from(const ParsedConfig& config,
                                                   const std::string& fallback) {
  return make_provider(config, string_or(config.params, "params", "provider", fallback));
}

// ---------------------------------------------------------------------------
// Experiment runners

RunResult run_simulate(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params",
             {"register", "prep", "basis", "drives", "times", "shots", "tls_epoch", "provider"});
  ExperimentSpec spec;
  spec.register_qubits = as_int_array(field(p, "params", "register"), "params.register");
  spec.prep = as_string(field(p, "params", "prep"), "params.prep");
  spec.basis = as_string(field(p, "params", "basis"), "params.basis");
  if (p.contains("drives")) spec.drives = drives_from(p["drives"], "params.drives");
  spec.shots = int_or(p, "params", "shots", 1024);
  spec.tls_epoch = int_or(p, "params", "tls_epoch", 0);
  const auto times = times_from(field(p, "params", "times"), "params.times");

  auto provider = provider_from(config, "simulator");
  const auto records = provider->run_series(spec, times);

  Row header = {"time_us"};
  for (std::size_t i = 0; i < spec.register_qubits.size(); ++i) {
    header.push_back("q" + std::to_string(spec.register_qubits[i]) + "_" + spec.basis[i]);
  }
  header.push_back("joint_" + spec.basis);
  std::vector<Row> rows;
  for (std::size_t k = 0; k < times.size(); ++k) {
    Row row = {fmt(times[k])};
    for (std::size_t i = 0; i < spec.register_qubits.size(); ++i) {
      std::string label(spec.register_qubits.size(), 'I');
      label[i] = spec.basis[i];
      row.push_back(fmt(records[k].expectation(label)));
    }
    row.push_back(fmt(records[k].expectation(spec.basis)));
    rows.push_back(std::move(row));
  }
  write_table(out / "series.tsv", header, rows);
  return {{"series.tsv"}, {}, {}};
}

RunResult run_qpt_experiment(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params",
             {"qubits", "drives", "durations", "shots", "k_max", "std_threshold", "provider"});
  const auto qubits = as_int_array(field(p, "params", "qubits"), "params.qubits");
  DriveProgram drives;
  if (p.contains("drives")) drives = drives_from(p["drives"], "params.drives");
  const auto durations = times_from(field(p, "params", "durations"), "params.durations");
  const int shots = int_or(p, "params", "shots", 0);
  const int k_max = int_or(p, "params", "k_max", 3);
  const double std_threshold = number_or(p, "params", "std_threshold", 0.25);

  auto provider = provider_from(config, "effective");
  const auto chis = run_qpt_series(*provider, qubits, drives, durations, shots);

  RunResult result;
  std::vector<std::pair<double, RateTable>> tables;
  std::vector<Row> lambda_rows;
  for (std::size_t j = 0; j < durations.size(); ++j) {
    lambda_rows.push_back({fmt(durations[j]), fmt(chis[j].lambda0), fmt(chis[j].condition)});
    for (const auto& w : chis[j].warnings) {
      result.warnings.push_back("duration " + fmt(durations[j]) + ": " + w);
    }
    tables.emplace_back(durations[j], effective_rates(dominant_unitary(chis[j]).u, durations[j]));
  }
  write_table(out / "lambda0.tsv", {"duration_us", "lambda0", "condition"}, lambda_rows);
  result.outputs.push_back("lambda0.tsv");

  const auto resolved = resolve_branch(tables, k_max, std_threshold);
  for (const auto& w : resolved.warnings) result.warnings.push_back(w);

  std::vector<Row> per_duration;
  for (const auto& [label, ks] : resolved.corrections) {
    for (std::size_t j = 0; j < durations.size(); ++j) {
      const double principal = tables[j].second.get(label);
      const double corrected = principal + ks[j] / (2.0 * durations[j]);
      per_duration.push_back({fmt(durations[j]), label, fmt(principal), fmt(corrected)});
    }
  }
  std::sort(per_duration.begin(), per_duration.end());
  write_table(out / "rates_vs_duration.tsv",
              {"duration_us", "label", "principal_rate_mhz", "corrected_rate_mhz"},
              per_duration);
  result.outputs.push_back("rates_vs_duration.tsv");

  std::vector<Row> rate_rows;
  for (const auto& label : resolved.rates.labels()) {
    rate_rows.push_back(
        {label, fmt(resolved.rates.get(label)), fmt(resolved.per_label_std.at(label))});
  }
  write_table(out / "rates.tsv", {"label", "rate_mhz", "std_mhz"}, rate_rows);
  result.outputs.push_back("rates.tsv");
  return result;
}

RunResult run_additivity(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params",
             {"qubits", "amplitude", "durations", "shots", "k_max", "std_threshold", "provider"});
  const auto qubits = as_int_array(field(p, "params", "qubits"), "params.qubits");
  if (qubits.size() != 3) fail("params.qubits: additivity needs exactly three qubits");
  const double amplitude = as_number(field(p, "params", "amplitude"), "params.amplitude");

  AdditivityOptions options;
  if (p.contains("durations")) {
    options.durations = times_from(p["durations"], "params.durations");
  }
  options.shots = int_or(p, "params", "shots", 0);
  options.k_max = int_or(p, "params", "k_max", 3);
  options.std_threshold = number_or(p, "params", "std_threshold", 0.25);

  auto provider = provider_from(config, "effective");
  const auto report =
      additivity_suite(*provider, qubits[0], qubits[1], qubits[2], amplitude, options);

  std::vector<Row> rows;
  for (const auto& [label, deviation] : report.deviations) {
    Row row = {label};
    for (const auto& protocol : report.protocols) row.push_back(fmt(protocol.rates.get(label)));
    row.push_back(fmt(report.predicted.get(label)));
    row.push_back(fmt(report.measured.get(label)));
    row.push_back(fmt(deviation));
    rows.push_back(std::move(row));
  }
  Row header = {"label"};
  for (const char* name : AdditivityReport::kProtocolNames) header.push_back(name);
  header.insert(header.end(), {"predicted_mhz", "measured_mhz", "deviation_mhz"});
  write_table(out / "additivity.tsv", header, rows);
  return {{"additivity.tsv"}, report.warnings, {}};
}

RunResult run_ham_tomog(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params",
             {"control", "target", "amplitude", "phase", "times", "stark_times", "shots",
              "provider"});
  const int control = as_int(field(p, "params", "control"), "params.control");
  const int target = as_int(field(p, "params", "target"), "params.target");
  const double amplitude = as_number(field(p, "params", "amplitude"), "params.amplitude");
  const double phase = number_or(p, "params", "phase", 0.0);
  const auto times = times_from(field(p, "params", "times"), "params.times");
  std::vector<double> stark_times;
  if (p.contains("stark_times")) stark_times = times_from(p["stark_times"], "params.stark_times");
  const int shots = int_or(p, "params", "shots", 1024);

  auto provider = provider_from(config, "effective");
  const auto result = cr_hamiltonian_tomography(*provider, control, target, amplitude, phase,
                                                times, shots, stark_times);

  std::vector<Row> rate_rows;
  for (const auto& label : result.rates.labels()) {
    rate_rows.push_back({label, fmt(result.rates.get(label))});
  }
  write_table(out / "rates.tsv", {"label", "rate_mhz"}, rate_rows);

  const auto& f0 = result.fit_control0;
  const auto& f1 = result.fit_control1;
  write_table(out / "fits.tsv", {"parameter", "control0", "control1"},
              {{"omega_x_mhz", fmt(f0.omega_x), fmt(f1.omega_x)},
               {"omega_y_mhz", fmt(f0.omega_y), fmt(f1.omega_y)},
               {"delta_mhz", fmt(f0.delta), fmt(f1.delta)},
               {"decay_per_us", fmt(f0.decay), fmt(f1.decay)},
               {"residual", fmt(f0.residual), fmt(f1.residual)}});

  write_table(out / "stark.tsv", {"f_plus_mhz", "f_minus_mhz", "zi_mhz"},
              {{fmt(result.stark_f_plus), fmt(result.stark_f_minus),
                fmt(result.rates.get("ZI"))}});

  return {{"rates.tsv", "fits.tsv", "stark.tsv"}, result.warnings, {}};
}

RunResult run_calibrate_phase(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params", {"control", "target", "amplitude", "tol", "times", "shots", "provider"});
  const int control = as_int(field(p, "params", "control"), "params.control");
  const int target = as_int(field(p, "params", "target"), "params.target");
  const double amplitude = as_number(field(p, "params", "amplitude"), "params.amplitude");
  const double tol = number_or(p, "params", "tol", 0.005);
  std::vector<double> times;
  if (p.contains("times")) times = times_from(p["times"], "params.times");
  const int shots = int_or(p, "params", "shots", 0);

  auto provider = provider_from(config, "effective");
  const auto cal = calibrate_phase(*provider, control, target, amplitude, tol, times, shots);

  write_table(out / "calibration.tsv",
              {"phase_rad", "zy_residual_mhz", "tomography_calls", "converged",
               "no_sign_change"},
              {{fmt(cal.phase), fmt(cal.zy_residual), fmt(cal.tomography_calls),
                fmt(cal.converged), fmt(cal.no_sign_change)}});
  RunResult result{{"calibration.tsv"}, cal.warnings, {}};
  result.summary.push_back("calibrated phase " + fmt(cal.phase) + " rad (ZY residual " +
                           fmt(cal.zy_residual) + " MHz after " + fmt(cal.tomography_calls) +
                           " tomography rounds)");
  return result;
}

RunResult run_low_amp(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params",
             {"qubit", "amplitude", "requested_phase", "requested_detuning", "times", "shots",
              "provider"});
  const int qubit = as_int(field(p, "params", "qubit"), "params.qubit");
  const double amplitude = as_number(field(p, "params", "amplitude"), "params.amplitude");
  const double requested_phase = number_or(p, "params", "requested_phase", 0.0);
  const double requested_detuning = number_or(p, "params", "requested_detuning", 0.0);
  const auto times = times_from(field(p, "params", "times"), "params.times");
  const int shots = int_or(p, "params", "shots", 1024);

  auto provider = provider_from(config, "effective");
  const auto series = low_amplitude_tomography(*provider, qubit, amplitude, times, shots);
  const auto fit = fit_single_qubit(series, requested_phase);
  const auto report = make_error_report(fit, amplitude, requested_phase, requested_detuning);

  std::vector<Row> trace_rows;
  for (std::size_t k = 0; k < times.size(); ++k) {
    trace_rows.push_back({fmt(times[k]), fmt(series[0].values[k]), fmt(series[1].values[k]),
                          fmt(series[2].values[k])});
  }
  write_table(out / "series.tsv", {"time_us", "x", "y", "z"}, trace_rows);

  write_table(out / "fit.tsv", {"parameter", "value"},
              {{"hx_mhz", fmt(fit.hx)},
               {"hy_mhz", fmt(fit.hy)},
               {"hz_mhz", fmt(fit.hz)},
               {"rabi_mhz", fmt(fit.rabi)},
               {"phase_error_rad", fmt(fit.phase_error)},
               {"detuning_mhz", fmt(fit.detuning)},
               {"t2_us", fmt(fit.t2)},
               {"residual", fmt(fit.residual)},
               {"under_resolved", fmt(fit.under_resolved)},
               {"t2_at_ceiling", fmt(fit.t2_at_ceiling)},
               {"rabi_bound_mhz", fmt(fit.rabi_bound)}});

  write_table(out / "error_report.tsv",
              {"requested_amplitude_mhz", "delivered_amplitude_mhz", "amplitude_error_mhz",
               "relative_amplitude_error", "requested_phase_rad", "delivered_phase_rad",
               "requested_detuning_mhz", "delivered_detuning_mhz"},
              {{fmt(report.requested_amplitude), fmt(report.delivered_amplitude),
                fmt(report.amplitude_error), fmt(report.relative_amplitude_error),
                fmt(report.requested_phase), fmt(report.delivered_phase),
                fmt(report.requested_detuning), fmt(report.delivered_detuning)}});

  RunResult result{{"series.tsv", "fit.tsv", "error_report.tsv"}, fit.warnings, {}};
  result.summary.push_back("amplitude: requested " + fmt(report.requested_amplitude) +
                           " MHz, delivered " + fmt(report.delivered_amplitude) +
                           " MHz, error " + fmt(report.amplitude_error) + " MHz (" +
                           fmt(100.0 * report.relative_amplitude_error) + "%)");
  result.summary.push_back("phase: requested " + fmt(report.requested_phase) +
                           " rad, delivered " + fmt(report.delivered_phase) + " rad");
  result.summary.push_back("detuning: requested " + fmt(report.requested_detuning) +
                           " MHz, delivered " + fmt(report.delivered_detuning) + " MHz");
  return result;
}

RunResult run_delay_scan_experiment(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params", {"qubit", "basis", "delays", "shots", "repetitions", "provider"});
  const int qubit = as_int(field(p, "params", "qubit"), "params.qubit");
  const std::string basis = string_or(p, "params", "basis", "X");
  const auto delays = times_from(field(p, "params", "delays"), "params.delays");
  const int shots = int_or(p, "params", "shots", 1024);
  const int repetitions = int_or(p, "params", "repetitions", 1);

  auto provider = provider_from(config, "simulator");
  const auto data = run_delay_scan(*provider, qubit, basis, delays, shots, repetitions);

  RunResult result;
  result.warnings = data.warnings;

  std::vector<Row> scan_rows;
  for (int r = 0; r < data.repetitions(); ++r) {
    for (std::size_t j = 0; j < delays.size(); ++j) {
      scan_rows.push_back({fmt(r), fmt(data.epochs[static_cast<std::size_t>(r)]),
                           fmt(delays[j]),
                           fmt(data.values(r, static_cast<Eigen::Index>(j)))});
    }
  }
  write_table(out / "delay_scan.tsv", {"repetition", "epoch", "delay_us", "value"}, scan_rows);
  result.outputs.push_back("delay_scan.tsv");

  const bool fittable = delays.size() >= 25;
  if (data.repetitions() >= 2) {
    const auto stats = ensemble_statistics(data);
    std::vector<Row> ensemble_rows;
    for (std::size_t j = 0; j < delays.size(); ++j) {
      ensemble_rows.push_back(
          {fmt(delays[j]), fmt(stats.mean[j]), fmt(stats.lo[j]), fmt(stats.hi[j])});
    }
    write_table(out / "ensemble.tsv", {"delay_us", "mean", "min", "max"}, ensemble_rows);
    result.outputs.push_back("ensemble.tsv");
    if (!stats.fits.empty()) {
      std::vector<Row> fit_rows;
      for (std::size_t r = 0; r < stats.fits.size(); ++r) {
        const auto& f = stats.fits[r];
        fit_rows.push_back({fmt(static_cast<int>(r)), fmt(f.c0), fmt(f.c1), fmt(f.f0),
                            fmt(f.f1), fmt(f.t2star), fmt(f.residual), fmt(f.f1_unresolved),
                            fmt(f.weight_sum_flagged), fmt(f.poor_fit)});
      }
      write_table(out / "fits.tsv",
                  {"repetition", "c0", "c1", "f0_mhz", "f1_mhz", "t2star_us", "residual",
                   "f1_unresolved", "weight_sum_flagged", "poor_fit"},
                  fit_rows);
      result.outputs.push_back("fits.tsv");
      write_table(out / "drift.tsv", {"f0_spread_mhz", "unstable"},
                  {{fmt(stats.f0_spread), fmt(stats.unstable)}});
      result.outputs.push_back("drift.tsv");
      if (stats.unstable) {
        result.warnings.push_back("defect frequency drifts across repetitions (f0 spread " +
                                  fmt(stats.f0_spread) + " MHz)");
      }
    }
  } else if (fittable) {
    const auto f = fit_two_cosine(data);
    write_table(out / "fits.tsv",
                {"repetition", "c0", "c1", "f0_mhz", "f1_mhz", "t2star_us", "residual",
                 "f1_unresolved", "weight_sum_flagged", "poor_fit"},
                {{fmt(0), fmt(f.c0), fmt(f.c1), fmt(f.f0), fmt(f.f1), fmt(f.t2star),
                  fmt(f.residual), fmt(f.f1_unresolved), fmt(f.weight_sum_flagged),
                  fmt(f.poor_fit)}});
    result.outputs.push_back("fits.tsv");
    for (const auto& w : f.warnings) result.warnings.push_back(w);
  }
  return result;
}

RunResult run_purity_scan_experiment(const ParsedConfig& config, const fs::path& out) {
  const Json& p = config.params;
  check_keys(p, "params", {"qubit", "delays", "shots", "min_prominence", "provider"});
  const int qubit = as_int(field(p, "params", "qubit"), "params.qubit");
  const auto delays = times_from(field(p, "params", "delays"), "params.delays");
  const int shots = int_or(p, "params", "shots", 1024);
  const double min_prominence = number_or(p, "params", "min_prominence", 0.02);

  auto provider = provider_from(config, "simulator");
  const auto series = purity_scan(*provider, qubit, delays, shots);

  RunResult result;
  std::vector<Row> purity_rows;
  for (const auto& point : series) {
    purity_rows.push_back({fmt(point.delay), fmt(point.purity)});
  }
  write_table(out / "purity.tsv", {"delay_us", "purity"}, purity_rows);
  result.outputs.push_back("purity.tsv");

  std::vector<Row> revival_rows;
  if (series.size() >= 20) {
    for (const auto& revival : detect_revivals(series, min_prominence)) {
      revival_rows.push_back({fmt(revival.time), fmt(revival.prominence)});
    }
  } else {
    result.warnings.push_back("fewer than 20 delays; revival detection skipped");
  }
  write_table(out / "revivals.tsv", {"time_us", "prominence"}, revival_rows);
  result.outputs.push_back("revivals.tsv");
  return result;
}

const std::set<std::string>& known_experiments() {
  static const std::set<std::string> names = {"simulate",        "qpt",
                                              "additivity",      "ham-tomog",
                                              "calibrate-phase", "low-amp",
                                              "delay-scan",      "purity-scan"};
  return names;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& err) {
    // err.byte is a 1-based offset into the text; recover line and column.
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min(text.size(), err.byte > 0 ? err.byte - 1 : 0);
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
         ": JSON parse error: " + err.what());
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail("override '" + assignment + "' is not of the form path.to.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  Json* node = &config;
  std::size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (key.empty()) fail("override '" + assignment + "' has an empty path segment");
    if (dot == std::string::npos) {
      Json value;
      try {
        value = Json::parse(text);
      } catch (const Json::parse_error&) {
        value = text;  // unquoted strings pass through verbatim
      }
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->is_object()) fail("override '" + assignment + "' descends into a non-object");
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    begin = dot + 1;
  }
}

DeviceConfig device_from_json(const Json& j) {
  check_keys(j, "device",
             {"n", "omega", "alpha", "frame_detuning", "coupling", "t1", "t2", "readout_flip",
              "awg", "tls", "cr_rules"});
  DeviceConfig cfg;
  cfg.n = as_int(field(j, "device", "n"), "device.n");
  if (j.contains("omega")) cfg.omega = as_number_array(j["omega"], "device.omega");
  if (j.contains("alpha")) cfg.alpha = as_number_array(j["alpha"], "device.alpha");
  if (j.contains("frame_detuning")) {
    cfg.frame_detuning = as_number_array(j["frame_detuning"], "device.frame_detuning");
  }
  if (j.contains("readout_flip")) {
    cfg.readout_flip = as_number_array(j["readout_flip"], "device.readout_flip");
  }
  if (j.contains("coupling")) {
    const Json& couplings = j["coupling"];
    if (!couplings.is_array()) fail("device.coupling: expected an array");
    for (std::size_t k = 0; k < couplings.size(); ++k) {
      const std::string ctx = "device.coupling[" + std::to_string(k) + "]";
      const Json& c = couplings[k];
      check_keys(c, ctx, {"i", "j", "j_mhz"});
      const int i = as_int(field(c, ctx, "i"), ctx + ".i");
      const int jj = as_int(field(c, ctx, "j"), ctx + ".j");
      cfg.coupling[{std::min(i, jj), std::max(i, jj)}] =
          as_number(field(c, ctx, "j_mhz"), ctx + ".j_mhz");
    }
  }
  auto optional_array = [&](const char* key) {
    std::vector<std::optional<double>> out;
    if (!j.contains(key)) return out;
    const Json& arr = j[key];
    if (!arr.is_array()) fail(std::string("device.") + key + ": expected an array");
    for (const auto& e : arr) {
      if (e.is_null()) {
        out.push_back(std::nullopt);
      } else {
        out.push_back(as_number(e, std::string("device.") + key + " element"));
      }
    }
    return out;
  };
  cfg.t1 = optional_array("t1");
  cfg.t2 = optional_array("t2");
  if (j.contains("awg")) {
    const Json& awg = j["awg"];
    check_keys(awg, "device.awg", {"amplitude_step", "gain_nonlinearity", "phase_offset"});
    cfg.awg.amplitude_step = number_or(awg, "device.awg", "amplitude_step", 0.0);
    cfg.awg.gain_nonlinearity = number_or(awg, "device.awg", "gain_nonlinearity", 0.0);
    cfg.awg.phase_offset = number_or(awg, "device.awg", "phase_offset", 0.0);
  }
  if (j.contains("tls")) {
    const Json& defects = j["tls"];
    if (!defects.is_array()) fail("device.tls: expected an array");
    for (std::size_t k = 0; k < defects.size(); ++k) {
      const std::string ctx = "device.tls[" + std::to_string(k) + "]";
      const Json& d = defects[k];
      check_keys(d, ctx,
                 {"qubit", "chi", "p_excited", "lifetime", "chi_respawn", "p_excited_respawn"});
      TlsSpec spec;
      spec.qubit = as_int(field(d, ctx, "qubit"), ctx + ".qubit");
      spec.chi = as_number(field(d, ctx, "chi"), ctx + ".chi");
      spec.p_excited = as_number(field(d, ctx, "p_excited"), ctx + ".p_excited");
      if (d.contains("lifetime") && !d["lifetime"].is_null()) {
        spec.lifetime = as_number(d["lifetime"], ctx + ".lifetime");
      }
      auto range_of = [&](const char* key) -> std::optional<RespawnRange> {
        if (!d.contains(key)) return std::nullopt;
        const auto pair = as_number_array(d[key], ctx + "." + key);
        if (pair.size() != 2) fail(ctx + "." + key + ": expected [lo, hi]");
        return RespawnRange{pair[0], pair[1]};
      };
      spec.chi_respawn = range_of("chi_respawn");
      spec.p_excited_respawn = range_of("p_excited_respawn");
      cfg.tls.push_back(spec);
    }
  }
  if (j.contains("cr_rules")) {
    const Json& rules = j["cr_rules"];
    if (!rules.is_object()) fail("device.cr_rules: expected an object of label -> constant");
    cfg.cr_rules.k.clear();
    for (auto it = rules.begin(); it != rules.end(); ++it) {
      cfg.cr_rules.k[it.key()] = as_number(it.value(), "device.cr_rules." + it.key());
    }
  }
  return cfg;
}

Json device_to_json(const DeviceConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  if (!cfg.omega.empty()) j["omega"] = cfg.omega;
  if (!cfg.alpha.empty()) j["alpha"] = cfg.alpha;
  if (!cfg.frame_detuning.empty()) j["frame_detuning"] = cfg.frame_detuning;
  if (!cfg.readout_flip.empty()) j["readout_flip"] = cfg.readout_flip;
  if (!cfg.coupling.empty()) {
    Json arr = Json::array();
    for (const auto& [pair, j_mhz] : cfg.coupling) {
      arr.push_back({{"i", pair.first}, {"j", pair.second}, {"j_mhz", j_mhz}});
    }
    j["coupling"] = std::move(arr);
  }
  auto emit_optional = [&](const char* key, const std::vector<std::optional<double>>& values) {
    if (values.empty()) return;
    Json arr = Json::array();
    for (const auto& v : values) {
      if (v) {
        arr.push_back(*v);
      } else {
        arr.push_back(nullptr);
      }
    }
    j[key] = std::move(arr);
  };
  emit_optional("t1", cfg.t1);
  emit_optional("t2", cfg.t2);
  if (cfg.awg.amplitude_step != 0.0 || cfg.awg.gain_nonlinearity != 0.0 ||
      cfg.awg.phase_offset != 0.0) {
    j["awg"] = {{"amplitude_step", cfg.awg.amplitude_step},
                {"gain_nonlinearity", cfg.awg.gain_nonlinearity},
                {"phase_offset", cfg.awg.phase_offset}};
  }
  if (!cfg.tls.empty()) {
    Json arr = Json::array();
    for (const auto& spec : cfg.tls) {
      Json d = {{"qubit", spec.qubit}, {"chi", spec.chi}, {"p_excited", spec.p_excited}};
      if (spec.lifetime) d["lifetime"] = *spec.lifetime;
      if (spec.chi_respawn) d["chi_respawn"] = {spec.chi_respawn->lo, spec.chi_respawn->hi};
      if (spec.p_excited_respawn) {
        d["p_excited_respawn"] = {spec.p_excited_respawn->lo, spec.p_excited_respawn->hi};
      }
      arr.push_back(std::move(d));
    }
    j["tls"] = std::move(arr);
  }
  j["cr_rules"] = Json(cfg.cr_rules.k);
  return j;
}

ParsedConfig parse_config(const Json& config) {
  check_keys(config, "config", {"experiment", "seed", "out", "device", "params"});
  ParsedConfig parsed;
  parsed.experiment = as_string(field(config, "config", "experiment"), "config.experiment");
  if (known_experiments().count(parsed.experiment) == 0) {
    std::string names;
    for (const auto& name : known_experiments()) {
      if (!names.empty()) names += ", ";
      names += name;
    }
    fail("config.experiment: unknown experiment '" + parsed.experiment + "' (expected one of " +
         names + ")");
  }
  const Json& seed = field(config, "config", "seed");
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                    seed.get<long long>() < 0)) {
    fail("config.seed: expected a nonnegative integer (mandatory for reproducibility)");
  }
  parsed.seed = seed.get<std::uint64_t>();
  parsed.out_dir = string_or(config, "config", "out", "results");
  parsed.device = device_from_json(field(config, "config", "device"));
  parsed.params = config.contains("params") ? config["params"] : Json::object();
  if (!parsed.params.is_object()) fail("config.params: expected an object");
  parsed.resolved = config;
  return parsed;
}

std::string config_hash(const Json& config) {
  const std::string dump = config.dump();  // keys sorted: canonical
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

RunResult run_experiment(const ParsedConfig& config) {
  const fs::path out(config.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out.string());

  RunResult result;
  if (config.experiment == "simulate") {
    result = run_simulate(config, out);
  } else if (config.experiment == "qpt") {
    result = run_qpt_experiment(config, out);
  } else if (config.experiment == "additivity") {
    result = run_additivity(config, out);
  } else if (config.experiment == "ham-tomog") {
    result = run_ham_tomog(config, out);
  } else if (config.experiment == "calibrate-phase") {
    result = run_calibrate_phase(config, out);
  } else if (config.experiment == "low-amp") {
    result = run_low_amp(config, out);
  } else if (config.experiment == "delay-scan") {
    result = run_delay_scan_experiment(config, out);
  } else if (config.experiment == "purity-scan") {
    result = run_purity_scan_experiment(config, out);
  } else {
    fail("unknown experiment '" + config.experiment + "'");  // unreachable after parse_config
  }

  Json manifest;
  manifest["config"] = config.resolved;
  manifest["config_hash"] = config_hash(config.resolved);
  manifest["experiment"] = config.experiment;
  manifest["seed"] = config.seed;
  manifest["versions"] = {{"crsim", kCrsimVersion}, {"format", kResultFormatVersion}};
  manifest["warnings"] = result.warnings;
  manifest["outputs"] = result.outputs;
  std::ofstream file(out / "manifest.json");
  if (!file) throw std::runtime_error("cannot write manifest in " + out.string());
  file << manifest.dump(2) << '\n';
  return result;
}

void report_directory(const std::string& dir, std::ostream& out) {
  const fs::path base(dir);
  const fs::path manifest_path = base / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("no manifest.json in '" + dir + "'");
  }
  Json manifest = load_json_file(manifest_path.string());
  for (const char* key : {"config", "config_hash", "experiment", "seed", "versions", "warnings",
                          "outputs"}) {
    if (!manifest.contains(key)) {
      throw std::runtime_error("corrupt manifest: missing '" + std::string(key) + "'");
    }
  }

  out << "experiment: " << manifest["experiment"].get<std::string>() << '\n';
  out << "seed: " << manifest["seed"].get<std::uint64_t>() << '\n';
  out << "config: " << manifest["config_hash"].get<std::string>() << '\n';
  out << "versions: crsim " << manifest["versions"]["crsim"].get<std::string>() << ", format "
      << manifest["versions"]["format"].get<int>() << '\n';
  for (const auto& w : manifest["warnings"]) {
    out << "warning: " << w.get<std::string>() << '\n';
  }

  for (const auto& name : manifest["outputs"]) {
    const fs::path file = base / name.get<std::string>();
    std::ifstream in(file);
    if (!in) throw std::runtime_error("missing result file " + file.string());
    // Align the tab-separated columns for reading.
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::vector<std::size_t> widths;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::size_t begin = 0;
      while (true) {
        const auto tab = line.find('\t', begin);
        cells.push_back(line.substr(begin, tab == std::string::npos ? tab : tab - begin));
        if (tab == std::string::npos) break;
        begin = tab + 1;
      }
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (widths.size() <= i) widths.push_back(0);
        widths[i] = std::max(widths[i], cells[i].size());
      }
      rows.push_back(std::move(cells));
    }
    out << '\n' << "-- " << name.get<std::string>() << " --" << '\n';
    for (const auto& cells : rows) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << cells[i];
        if (i + 1 < cells.size()) {
          out << std::string(widths[i] + 2 - cells[i].size(), ' ');
        }
      }
      out << '\n';
    }
  }
}

}  // namespace crsim
