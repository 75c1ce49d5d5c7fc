// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Drive schedules: piecewise-constant envelope samples per qubit, plus a
// convenience constructor for the constant-envelope tones used by the
// tomography and calibration experiments.

#pragma once

#include <map>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// One contiguous drive segment on one qubit. The physical drive is
///   D(t) = A(t) * cos(2*pi*(omega_carrier + detuning)*t + psi(t))
/// where the carrier frequency is the nominal frequency of carrier_target,
/// A(t) = amplitude * |h_xy(t)| * ramp(t) passes through the AWG model, and
/// psi(t) collects the envelope direction atan2(hy, hx), the hz phase ramp
/// -2*pi*amplitude*integral(hz), and the AWG phase offset.
struct PulseSegment {
  double duration = 0.0;   // us
  int carrier_target = 0;  // qubit whose nominal frequency sets the carrier
  double detuning = 0.0;   // MHz added to the carrier
  double amplitude = 0.0;  // MHz scale of the envelopes
  double ramp_time = 0.0;  // us of cosine ramp at each edge
  std::vector<double> hx, hy, hz;  // samples at dt_sample, each in [-1, 1]
};

struct PulseSchedule {
  double dt_sample = 0.01;  // us; envelope sampling period
  std::map<int, std::vector<PulseSegment>> qubit_segments;

  double total_duration() const;
  /// Checks the schedule invariants against a device with n qubits:
  /// positive dt_sample dividing every duration, envelope arrays sized
  /// duration/dt_sample, |h| <= 1, equal total duration across driven
  /// qubits, and indices in range. Throws std::invalid_argument.
  void validate(int n_qubits) const;
};

/// A constant-envelope tone on one qubit, the building block of every
/// experiment in this package.
struct ConstantDrive {
  int qubit = 0;
  int carrier_target = 0;  // = qubit for a resonant drive
  double detuning = 0.0;   // MHz
  double amplitude = 0.0;  // MHz
  double phase = 0.0;      // rad; rotates (hx, hy) = xy * (cos, sin)(phase)
  double xy = 1.0;         // transverse envelope scale in [0, 1]; 0 = pure-hz tone
  double hz = 0.0;         // constant frequency-modulation envelope
  double ramp_time = 0.0;  // us
};

struct DriveProgram {
  std::vector<ConstantDrive> drives;
  /// Envelope sampling period; 0 picks one from the drive amplitudes such
  /// that the per-sample generator rotation stays well below the
  /// simulator's rejection bound.
  double dt_sample = 0.0;
};

/// Expands constant drives into a schedule of the given duration.
PulseSchedule to_pulse_schedule(const DriveProgram& program, double duration_us);

}  // namespace crsim
