// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-qubit calibration procedures: drive-phase calibration by nulling
// the conditional-Y rate, low-amplitude state tomography with field fits
// (delivered amplitude, phase and detuning errors), and synthesis of the
// single-qubit cancellation tones that reduce a measured generator to a pure
// conditional-X target.

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "crsim/device.hpp"
#include "crsim/ham_tomo.hpp"
#include "crsim/provider.hpp"
#include "crsim/rate_table.hpp"
#include "crsim/schedule.hpp"

namespace crsim {

/// Joint fit of single-qubit tomography series to precession of (0, 0, 1)
/// about the field (hx, hy, hz) damped by exp(-t / t2). Components are in
/// the field convention H = (hx X + hy Y + hz Z) / 2, so the precession
/// frequency is sqrt(hx^2 + hy^2 + hz^2) MHz and rabi equals the delivered
/// drive amplitude.
struct SingleQubitFit {
  double hx = 0.0;           // MHz
  double hy = 0.0;           // MHz
  double hz = 0.0;           // MHz
  double t2 = 0.0;           // us (capped at kT2Ceiling)
  double rabi = 0.0;         // MHz, hypot(hx, hy)
  double phase_error = 0.0;  // rad, arg(hx + i hy) minus the requested phase
  double detuning = 0.0;     // MHz, equal to hz
  double residual = 0.0;     // RMS over all three series
  bool under_resolved = false;  // window shorter than 1.5 precession periods
  bool t2_at_ceiling = false;   // decay consistent with zero
  double rabi_bound = 0.0;      // MHz, upper bound reported when under_resolved
  std::vector<std::string> warnings;
};

/// T2 values above this are reported as the ceiling (negligible decay).
inline constexpr double kT2Ceiling = 1e5;  // us

/// Requested-versus-delivered drive errors extracted from a field fit.
struct ErrorReport {
  double requested_amplitude = 0.0;  // MHz
  double delivered_amplitude = 0.0;  // MHz
  double requested_phase = 0.0;      // rad
  double delivered_phase = 0.0;      // rad
  double requested_detuning = 0.0;   // MHz
  double delivered_detuning = 0.0;   // MHz
  double amplitude_error = 0.0;      // MHz, |delivered - requested|
  double relative_amplitude_error = 0.0;  // fraction of the requested value
};

/// Result of the conditional-Y nulling loop.
struct PhaseCalibration {
  double phase = 0.0;        // rad, drive phase with |c_ZY| below tolerance
  double zy_residual = 0.0;  // MHz, measured c_ZY at the returned phase
  int tomography_calls = 0;  // six-session tomography rounds consumed
  bool converged = false;
  bool no_sign_change = false;  // c_ZY never changed sign over the scan
  std::vector<std::string> warnings;
};

/// One synthesized compensation tone (resonant drive on a single qubit).
/// The transverse part cancels X/Y rates, the hz part cancels Z rates via a
/// frame ramp that is not subject to amplitude quantization.
struct CancellationTone {
  int qubit = 0;
  double amplitude = 0.0;   // MHz, requested transverse drive amplitude
  double phase = 0.0;       // rad
  double z_rate = 0.0;      // MHz, longitudinal rate delivered through hz
  double achievable_amplitude = 0.0;  // after waveform-generator quantization
  bool quantized = false;    // amplitude not exactly representable
  bool below_floor = false;  // nearest representable amplitude is zero
};

struct CancellationPlan {
  /// Rate adjustment per single-qubit label: target minus measured.
  std::map<std::string, double> compensation;
  std::vector<CancellationTone> tones;
  /// Ready-to-apply drives implementing the achievable compensation.
  std::vector<ConstantDrive> drives;
  /// Predicted post-compensation generator: single-qubit labels move to the
  /// target up to quantization leftovers, multi-qubit labels pass through.
  RateTable residual_prediction{2};
  std::vector<std::string> warnings;
};

/// Measures c_ZY(phase) of a control->target tone and bisects it to zero.
/// The tolerance is on |c_ZY| in MHz; each iteration costs one six-session
/// tomography round and the bracket halves every step. When several roots
/// exist the one nearest phase zero is refined. times = {} designs a grid
/// from the reference window scaled to the drive amplitude; shots = 0 uses
/// exact expectations.
PhaseCalibration calibrate_phase(MeasurementProvider& provider, int control, int target,
                                 double omega_mhz, double tol_mhz,
                                 std::vector<double> times = {}, int shots = 0);

/// X, Y and Z expectation series of one driven qubit prepared in |0> under a
/// requested-resonant drive (phase zero). The register is the single qubit;
/// spectators are ignored. The span must cover 1.5 periods at the requested
/// amplitude or two dephasing times, whichever is shorter.
std::array<RabiSeries, 3> low_amplitude_tomography(MeasurementProvider& provider, int qubit,
                                                   double omega_requested_mhz,
                                                   const std::vector<double>& times, int shots);

/// Joint field fit of the three series (shared time grid). requested_phase
/// only offsets the reported phase_error. Falls back to a decay-only fit
/// with a rabi upper bound when the window under-resolves the precession.
SingleQubitFit fit_single_qubit(const std::array<RabiSeries, 3>& series,
                                double requested_phase_rad = 0.0);

/// Requested-versus-delivered errors; requested_amplitude must be positive.
ErrorReport make_error_report(const SingleQubitFit& fit, double requested_amplitude_mhz,
                              double requested_phase_rad = 0.0,
                              double requested_detuning_mhz = 0.0);

/// Synthesizes per-qubit compensation tones moving the single-qubit labels
/// of `rates` to those of `target`. Multi-qubit labels cannot be addressed:
/// entries equal to the measured value (or absent) pass through into the
/// residual; any other multi-qubit request is rejected. The waveform model
/// quantizes tone amplitudes; unrepresentable compensations are flagged.
CancellationPlan synthesize_cancellation(const RateTable& rates, const RateTable& target,
                                         const AwgModel& awg = {});

/// Forwards every experiment to an inner provider with fixed extra drives
/// (typically a cancellation plan) appended to the requested program, so the
/// standard tomography routines can re-measure a compensated device.
class CompensatedProvider : public MeasurementProvider {
 public:
  CompensatedProvider(MeasurementProvider& inner, std::vector<ConstantDrive> extra_drives);

  int n_qubits() const override;

 protected:
  std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                         const std::vector<double>& times) override;

 private:
  MeasurementProvider& inner_;
  std::vector<ConstantDrive> extra_drives_;
};

}  // namespace crsim
