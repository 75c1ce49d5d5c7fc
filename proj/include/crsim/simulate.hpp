// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Pulse-level density-matrix simulation of a transmon device under a drive
// schedule, in the lab frame or the frame rotating at the nominal qubit
// frequencies, with optional co-rotating (RWA) truncation, per-step noise
// channels, AWG imperfections, and dispersively coupled TLS defects.

#pragma once

#include <cstdint>
#include <vector>

#include "crsim/device.hpp"
#include "crsim/schedule.hpp"
#include "crsim/types.hpp"

namespace crsim {

enum class Frame { Lab, Rotating };

struct SimulateOptions {
  /// Rotating frame only: keep co-rotating terms and drop those oscillating
  /// near twice the carrier. When false the rotating-frame generator is the
  /// exact frame conjugation of the lab one.
  bool rwa = true;
  /// Seed for TLS parameter respawn draws (see tls_epoch).
  std::uint64_t seed = 0;
  /// Repetition epoch: 0 keeps base TLS parameters; for epoch >= 1 any TLS
  /// parameter with a respawn range is redrawn uniformly, deterministically
  /// in (seed, epoch, tls index).
  int tls_epoch = 0;
};

/// TLS parameters in effect for a given seed/epoch.
std::vector<TlsSpec> resolve_tls(const DeviceConfig& cfg, std::uint64_t seed, int epoch);

/// Reduced state of the qubit register from a full simulator state (qubit
/// register first, then one two-level subsystem per TLS in list order).
Matrix trace_out_tls(const DeviceConfig& cfg, const Matrix& rho_full);

/// Evolves `init` (a 2^n density matrix on the qubit register) under the
/// schedule and returns snapshots at the requested times (us, sorted,
/// >= 0; idle static evolution continues beyond the schedule).
///
/// Returned states live on the extended space (qubits then TLS). In the
/// rotating frame they are reported in the drive-phase gauge: the frame
/// that absorbs the h^Z phase ramps, so that an h^Z-only pulse equals
/// direct Z-generator evolution. Lab-frame states are raw.
///
/// Throws std::invalid_argument when dt_sample is too coarse for the
/// generator (bound 0.1 rad per sample), with the required dt in the
/// message.
std::vector<Matrix> simulate_schedule(const DeviceConfig& cfg, const PulseSchedule& schedule,
                                      const Matrix& init, Frame frame,
                                      const std::vector<double>& times,
                                      const SimulateOptions& opts = {});

}  // namespace crsim
