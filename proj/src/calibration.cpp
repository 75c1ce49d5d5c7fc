// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "crsim/fit.hpp"
#include "crsim/pauli.hpp"
#include "crsim/types.hpp"

namespace crsim {
namespace {

double wrap_angle(double x) {
  const double r = std::remainder(x, kTwoPi);
  return r <= -kPi ? r + kTwoPi : r;
}

std::string format_mhz(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

/// One measurement of c_ZY at a candidate phase: six conditional series and
/// the two joint Bloch fits.
double measure_zy(MeasurementProvider& provider, int control, int target, double omega_mhz,
                  double phase_rad, const std::vector<double>& times, int shots,
                  std::vector<std::string>* warnings) {
  const auto series =
      collect_cr_series(provider, control, target, omega_mhz, phase_rad, times, shots);
  const BlochFit fit0 = fit_bloch(series[0], series[1], series[2]);
  const BlochFit fit1 = fit_bloch(series[3], series[4], series[5]);
  if (warnings != nullptr && (fit0.unreliable || fit1.unreliable)) {
    warnings->push_back("conditional fit unreliable at phase " + format_mhz(phase_rad) +
                        " rad");
  }
  return combine_rates(fit0, fit1).get("ZY");
}

/// Number of non-identity characters in a Pauli label.
int label_weight(const std::string& label) {
  return static_cast<int>(std::count_if(label.begin(), label.end(),
                                        [](char c) { return c != 'I'; }));
}

/// Decay-only model z0 * exp(-gamma t) fitted to one series.
LmResult fit_decay_only(const std::vector<double>& times, const std::vector<double>& values) {
  ResidualFn residuals = [&](const RealVector& p) {
    RealVector r(static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = values[i] - p(0) * std::exp(-p(1) * times[i]);
    }
    return r;
  };
  const double span = times.back() - times.front();
  std::vector<RealVector> starts;
  RealVector s0(2);
  s0 << (values.empty() ? 1.0 : values.front()), 1.0 / std::max(span, 1e-9);
  starts.push_back(s0);
  RealVector s1(2);
  s1 << 1.0, 0.01;
  starts.push_back(s1);
  return multi_start_fit(residuals, starts);
}

}  // namespace

PhaseCalibration calibrate_phase(MeasurementProvider& provider, int control, int target,
                                 double omega_mhz, double tol_mhz, std::vector<double> times,
                                 int shots) {
  require(tol_mhz > 0.0, "calibrate_phase: tolerance must be positive");
  require(omega_mhz > 0.0, "calibrate_phase: drive amplitude must be positive");
  if (times.empty()) {
    // The conditional precession frequencies scale linearly with the drive
    // amplitude, so the measurement window scales inversely with it; the
    // point count keeps several samples per fastest period independent of
    // the amplitude.
    const double span = 720.0 / omega_mhz;
    const int n = 240;
    times.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) times[static_cast<std::size_t>(i)] = span * (i + 1) / n;
  }

  PhaseCalibration result;
  constexpr int kMaxCalls = 20;
  auto measure = [&](double phase) {
    ++result.tomography_calls;
    return measure_zy(provider, control, target, omega_mhz, phase, times, shots,
                      &result.warnings);
  };

  // Coarse scan; any point already below tolerance finishes the loop.
  const double scan_phases[] = {0.0, -kPi / 2.0, kPi / 2.0, -kPi};
  std::vector<std::pair<double, double>> scan;  // (phase, c_ZY)
  for (double phase : scan_phases) {
    const double zy = measure(phase);
    if (std::abs(zy) < tol_mhz) {
      result.phase = wrap_angle(phase);
      result.zy_residual = zy;
      result.converged = true;
      return result;
    }
    scan.emplace_back(phase, zy);
  }

  // Locate sign-change brackets over the cyclic scan and keep the one whose
  // interpolated root is nearest phase zero.
  std::sort(scan.begin(), scan.end());
  bool have_bracket = false;
  double lo = 0.0, hi = 0.0, f_lo = 0.0, f_hi = 0.0, best_root = 0.0;
  auto consider = [&](double a, double fa, double b, double fb) {
    if (fa * fb >= 0.0) return;
    const double root = a + (b - a) * fa / (fa - fb);
    if (!have_bracket || std::abs(wrap_angle(root)) < std::abs(wrap_angle(best_root))) {
      have_bracket = true;
      lo = a;
      hi = b;
      f_lo = fa;
      f_hi = fb;
      best_root = root;
    }
  };
  for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
    consider(scan[i].first, scan[i].second, scan[i + 1].first, scan[i + 1].second);
  }
  // Cyclic closure: the value at -pi also holds at +pi.
  consider(scan.back().first, scan.back().second, scan.front().first + kTwoPi,
           scan.front().second);

  if (!have_bracket) {
    result.no_sign_change = true;
    result.warnings.push_back(
        "c_ZY never changed sign over the phase scan; drive too weak to calibrate");
    return result;
  }

  double best_phase = best_root;
  double best_zy = std::numeric_limits<double>::infinity();
  while (result.tomography_calls < kMaxCalls) {
    const double mid = 0.5 * (lo + hi);
    const double zy = measure(mid);
    if (std::abs(zy) < std::abs(best_zy)) {
      best_zy = zy;
      best_phase = mid;
    }
    if (std::abs(zy) < tol_mhz) {
      result.phase = wrap_angle(mid);
      result.zy_residual = zy;
      result.converged = true;
      return result;
    }
    if (zy * f_lo < 0.0) {
      hi = mid;
      f_hi = zy;
    } else {
      lo = mid;
      f_lo = zy;
    }
  }

  result.phase = wrap_angle(best_phase);
  result.zy_residual = best_zy;
  result.warnings.push_back("tomography budget exhausted before |c_ZY| reached tolerance");
  return result;
}

std::array<RabiSeries, 3> low_amplitude_tomography(MeasurementProvider& provider, int qubit,
                                                   double omega_requested_mhz,
                                                   const std::vector<double>& times,
                                                   int shots) {
  require(omega_requested_mhz > 0.0,
          "low_amplitude_tomography: requested amplitude must be positive");
  require(times.size() >= 2, "low_amplitude_tomography: need at least two times");
  const double span = times.back() - times.front();
  // A window shorter than 1.5 requested periods (or two typical dephasing
  // times, if those are shorter) cannot anchor the joint fit.
  constexpr double kTypicalT2 = 30.0;  // us
  require(span + 1e-9 >= std::min(1.5 / omega_requested_mhz, 2.0 * kTypicalT2),
          "low_amplitude_tomography: time span under-resolves the requested drive");

  ConstantDrive tone;
  tone.qubit = qubit;
  tone.carrier_target = qubit;
  tone.amplitude = omega_requested_mhz;
  tone.phase = 0.0;
  ExperimentSpec spec;
  spec.register_qubits = {qubit};
  spec.prep = "0";
  spec.drives.drives.push_back(tone);
  spec.shots = shots;

  std::array<RabiSeries, 3> out;
  const char* bases[3] = {"X", "Y", "Z"};
  for (int b = 0; b < 3; ++b) {
    spec.basis = bases[b];
    const auto records = provider.run_series(spec, times);
    RabiSeries& series = out[static_cast<std::size_t>(b)];
    series.prep = spec.prep;
    series.basis = bases[b];
    series.measured_qubit = qubit;
    series.times = times;
    series.shots = shots;
    series.values.reserve(records.size());
    for (const auto& record : records) {
      series.values.push_back(record.expectation(bases[b]));
    }
  }
  return out;
}

SingleQubitFit fit_single_qubit(const std::array<RabiSeries, 3>& series,
                                double requested_phase_rad) {
  require(series[0].times == series[1].times && series[1].times == series[2].times,
          "fit_single_qubit: series must share a time grid");
  SingleQubitFit out;
  const BlochFit fit = fit_bloch(series[0], series[1], series[2]);
  out.residual = fit.residual;
  out.under_resolved = fit.under_resolved;
  if (fit.unreliable) out.warnings.push_back("joint fit residual is high; estimates unreliable");

  const double span = series[0].times.back() - series[0].times.front();
  if (fit.under_resolved) {
    // The window does not resolve a full oscillation: report only an upper
    // bound on the field magnitude and fit the decay envelope alone.
    out.rabi_bound = 1.5 / span;
    out.warnings.push_back("window under-resolves the precession; field set to zero and t2 "
                           "taken from a decay-only fit");
    const LmResult decay = fit_decay_only(series[2].times, series[2].values);
    out.residual = decay.rms;
    const double gamma = decay.params(1);
    out.t2_at_ceiling = gamma <= 1.0 / kT2Ceiling;
    out.t2 = out.t2_at_ceiling ? kT2Ceiling : 1.0 / gamma;
    return out;
  }

  // Bare-Pauli rates from the joint fit double into field components.
  out.hx = 2.0 * fit.omega_x;
  out.hy = 2.0 * fit.omega_y;
  out.hz = 2.0 * fit.delta;
  out.rabi = std::hypot(out.hx, out.hy);
  out.phase_error = wrap_angle(std::atan2(out.hy, out.hx) - requested_phase_rad);
  out.detuning = out.hz;
  out.t2_at_ceiling = fit.decay <= 1.0 / kT2Ceiling;
  out.t2 = out.t2_at_ceiling ? kT2Ceiling : 1.0 / fit.decay;
  if (out.t2_at_ceiling) out.warnings.push_back("decay consistent with zero; t2 at ceiling");
  return out;
}

ErrorReport make_error_report(const SingleQubitFit& fit, double requested_amplitude_mhz,
                              double requested_phase_rad, double requested_detuning_mhz) {
  require(requested_amplitude_mhz > 0.0,
          "make_error_report: requested amplitude must be positive");
  ErrorReport report;
  report.requested_amplitude = requested_amplitude_mhz;
  report.delivered_amplitude = fit.rabi;
  report.requested_phase = requested_phase_rad;
  report.delivered_phase = wrap_angle(requested_phase_rad + fit.phase_error);
  report.requested_detuning = requested_detuning_mhz;
  report.delivered_detuning = fit.detuning;
  report.amplitude_error = std::abs(fit.rabi - requested_amplitude_mhz);
  report.relative_amplitude_error = report.amplitude_error / requested_amplitude_mhz;
  return report;
}

CancellationPlan synthesize_cancellation(const RateTable& rates, const RateTable& target,
                                         const AwgModel& awg) {
  require(rates.n_qubits() == target.n_qubits(),
          "synthesize_cancellation: register sizes differ");
  const int n = rates.n_qubits();
  constexpr double kZero = 1e-12;

  // Multi-qubit labels are beyond single-qubit control: a target entry may
  // keep the measured value or be absent (left as residual), nothing else.
  for (const auto& [label, value] : target.raw()) {
    if (label_weight(label) < 2) continue;
    if (std::abs(value) > kZero && std::abs(value - rates.get(label)) > 1e-9) {
      throw std::invalid_argument(
          "synthesize_cancellation: cannot change multi-qubit label " + label +
          " with single-qubit control");
    }
  }

  CancellationPlan plan;
  plan.residual_prediction = rates;
  for (int q = 0; q < n; ++q) {
    double delta[3] = {0.0, 0.0, 0.0};  // X, Y, Z rate adjustments
    const char axes[3] = {'X', 'Y', 'Z'};
    std::string labels[3];
    for (int a = 0; a < 3; ++a) {
      labels[a] = embed_label(std::string(1, axes[a]), {q}, n);
      delta[a] = target.get(labels[a]) - rates.get(labels[a]);
      if (std::abs(delta[a]) > kZero) plan.compensation[labels[a]] = delta[a];
    }
    const double transverse = std::hypot(delta[0], delta[1]);
    const bool has_transverse = transverse > kZero;
    const bool has_z = std::abs(delta[2]) > kZero;
    if (!has_transverse && !has_z) continue;

    CancellationTone tone;
    tone.qubit = q;
    tone.z_rate = has_z ? delta[2] : 0.0;
    // A rate of c MHz on a bare Pauli needs a field of 2c (the drive enters
    // the generator as half the delivered amplitude).
    tone.amplitude = 2.0 * transverse;
    tone.phase = has_transverse ? std::atan2(delta[1], delta[0]) : 0.0;
    tone.achievable_amplitude = has_transverse ? awg_apply(awg, tone.amplitude) : 0.0;
    tone.quantized = std::abs(tone.achievable_amplitude - tone.amplitude) > 1e-12;
    tone.below_floor = has_transverse && tone.achievable_amplitude == 0.0;
    if (tone.below_floor) {
      plan.warnings.push_back("qubit " + std::to_string(q) + " transverse compensation " +
                              format_mhz(tone.amplitude) +
                              " MHz is below the waveform floor; unimplementable");
    } else if (tone.quantized) {
      plan.warnings.push_back("qubit " + std::to_string(q) + " transverse compensation " +
                              format_mhz(tone.amplitude) + " MHz quantized to " +
                              format_mhz(tone.achievable_amplitude) + " MHz");
    }
    plan.tones.push_back(tone);

    ConstantDrive drive;
    drive.qubit = q;
    drive.carrier_target = q;
    if (has_transverse) {
      drive.amplitude = tone.amplitude;
      drive.phase = tone.phase;
      drive.xy = 1.0;
      drive.hz = has_z ? 2.0 * delta[2] / tone.amplitude : 0.0;
    } else {
      // Longitudinal-only adjustment: a frame ramp with no transverse
      // component, immune to amplitude quantization.
      drive.amplitude = 1.0;
      drive.xy = 0.0;
      drive.hz = 2.0 * delta[2];
    }
    plan.drives.push_back(drive);

    // Prediction uses the achievable amplitude: the transverse adjustment
    // scales with the quantization, the longitudinal one lands exactly.
    const double scale = has_transverse ? tone.achievable_amplitude / tone.amplitude : 0.0;
    plan.residual_prediction.add(labels[0], delta[0] * scale);
    plan.residual_prediction.add(labels[1], delta[1] * scale);
    plan.residual_prediction.add(labels[2], delta[2]);
  }
  plan.residual_prediction = plan.residual_prediction.pruned(1e-12);
  return plan;
}

CompensatedProvider::CompensatedProvider(MeasurementProvider& inner,
                                         std::vector<ConstantDrive> extra_drives)
    : inner_(inner), extra_drives_(std::move(extra_drives)) {}

int CompensatedProvider::n_qubits() const { return inner_.n_qubits(); }

std::vector<MeasurementRecord> CompensatedProvider::execute(const ExperimentSpec& spec,
                                                            const std::vector<double>& times) {
  ExperimentSpec augmented = spec;
  for (const auto& drive : extra_drives_) augmented.drives.drives.push_back(drive);
  return inner_.run_series(augmented, times);
}

}  // namespace crsim
