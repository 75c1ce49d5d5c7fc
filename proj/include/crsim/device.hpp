// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Static description of a fixed-frequency transmon device: qubit
// frequencies, anharmonicities, couplings, decoherence, waveform-generator
// imperfections, two-level-system defects, and the configurable
// coefficient rules that define the injected cross-resonance generator.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crsim/rate_table.hpp"
#include "crsim/types.hpp"

namespace crsim {

/// Arbitrary-waveform-generator imperfection model. Delivered amplitude is
/// quantize(requested * (1 + g * requested^2)) with round-to-nearest
/// (half away from zero) on a grid of amplitude_step; phase_offset is added
/// to every delivered drive phase.
struct AwgModel {
  double amplitude_step = 0.0;     // MHz; 0 disables quantization
  double gain_nonlinearity = 0.0;  // dimensionless cubic coefficient
  double phase_offset = 0.0;       // rad
};

/// Uniform resampling range for one TLS parameter across repetitions.
struct RespawnRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// A two-level-system defect dispersively coupled to one qubit via
/// (chi/2) Z_qubit x Z_tls. The TLS starts in the diagonal mixed state
/// diag(1 - p_excited, p_excited).
struct TlsSpec {
  int qubit = 0;
  double chi = 0.0;        // MHz
  double p_excited = 0.0;  // in [0, 1]
  std::optional<double> lifetime;  // us; TLS amplitude damping when present
  // Optional per-repetition drift: parameters are redrawn uniformly from
  // these ranges for epoch > 0 (epoch 0 keeps the base values).
  std::optional<RespawnRange> chi_respawn;
  std::optional<RespawnRange> p_excited_respawn;
};

/// Proportionality constants of the synthesized cross-resonance generator.
/// For a control->target drive of amplitude Omega (MHz) and phase phi (rad)
/// on a pair coupled with J (MHz), the generator rates are
///   ZI: k * Omega^2          ZX: k * J * Omega * cos(phi)
///   ZY: k * J * Omega * sin(phi)   IX: k * J * Omega
///   IY, IZ, ZZ: k * J^2
/// with one constant k per label (two-character labels, control first).
/// The rates are configuration inputs, not derived physics.
struct CrRules {
  std::map<std::string, double> k;

  /// Representative defaults, scaled such that Omega = 36 MHz, J = 2 MHz and
  /// phase = 0 give rates of the magnitude reported for a typical device.
  static CrRules representative();
};

struct DeviceConfig {
  int n = 0;                         // qubit count
  std::vector<double> omega;         // nominal qubit frequency (MHz)
  std::vector<double> alpha;         // anharmonicity (MHz, <= 0)
  std::vector<double> frame_detuning;  // true freq minus nominal (MHz, default 0)
  std::map<std::pair<int, int>, double> coupling;  // J (MHz), undirected, i < j
  std::vector<std::optional<double>> t1;  // us
  std::vector<std::optional<double>> t2;  // us
  std::vector<double> readout_flip;  // per-qubit symmetric bit-flip probability
  AwgModel awg;
  std::vector<TlsSpec> tls;
  CrRules cr_rules = CrRules::representative();

  /// Coupling of an unordered pair (0 when absent).
  double coupling_of(int i, int j) const;
  bool connected(int i, int j) const;

  // Per-qubit field accessors tolerating unset (empty) vectors.
  double omega_of(int i) const;
  double alpha_of(int i) const;
  double frame_detuning_of(int i) const;
  /// True (physical) frequency: nominal plus frame detuning.
  double true_frequency_of(int i) const;
  std::optional<double> t1_of(int i) const;
  std::optional<double> t2_of(int i) const;
  double readout_flip_of(int i) const;

  /// Validates invariants; returns human-readable warnings (e.g. coupling
  /// not small against detuning). Throws std::invalid_argument on hard
  /// violations (size mismatches, T2 > 2*T1, self-coupling, bad ranges).
  std::vector<std::string> validate() const;
};

/// Delivered amplitude for a requested drive amplitude in MHz (>= 0).
double awg_apply(const AwgModel& model, double requested_mhz);

/// Lab-frame static Hamiltonian of the truncated Duffing chain (MHz):
/// sum_i omega_i n_i + alpha_i n_i (n_i - 1) + sum_ij J_ij p_i p_j with
/// p = i(a^dag - a), whose two-level projection matches the qubit model's
/// +J YY coupling. levels must be 2 or 3.
Matrix build_duffing_hamiltonian(const DeviceConfig& cfg, int levels);

/// Qubit-model static Hamiltonian sum_i (w_i/2) Z_i + sum_ij J_ij Y_i Y_j
/// (MHz) where w_i includes the frame detuning (true frequency).
Matrix build_qubit_hamiltonian(const DeviceConfig& cfg);

/// The injected "true" cross-resonance generator for a control->target drive
/// of amplitude Omega (MHz, after AWG) and delivered phase (rad): a
/// two-qubit RateTable over labels (control char, target char) built from
/// cfg.cr_rules. Throws when the pair is not connected.
RateTable cross_resonance_rates(const DeviceConfig& cfg, int control, int target,
                                double omega_mhz, double phase_rad);

}  // namespace crsim
