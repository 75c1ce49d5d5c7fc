// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Measurement providers: the execution backends the tomography, calibration
// and defect-analysis experiments run against. A provider turns one
// experiment specification (preparation, drive program, measurement basis)
// into outcome records at a list of evolution times. Three backends:
//
//  * SimulatorProvider          - pulse-level density-matrix simulation,
//  * EffectiveHamiltonianProvider - synthesizes the configured drive-rate
//                                 generator and evolves under it directly,
//  * RateTableProvider          - evolves under a fixed injected generator
//                                 (oracle backend for tests).
//
// Determinism: sampled outcomes are keyed by the experiment content (register,
// preparation, basis, drives, epoch, time) combined with the provider's master
// seed, never by call order. Any partition of the same experiment set over
// workers or batches reproduces identical records.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crsim/device.hpp"
#include "crsim/rate_table.hpp"
#include "crsim/sampling.hpp"
#include "crsim/schedule.hpp"
#include "crsim/simulate.hpp"
#include "crsim/types.hpp"

namespace crsim {

/// One experiment family: fixed preparation, drives and measurement basis,
/// executed at each of a list of evolution times.
struct ExperimentSpec {
  /// Device qubits measured, in label order (leftmost label character =
  /// first listed qubit). Distinct, in range. Unlisted qubits idle in |0>.
  std::vector<int> register_qubits;
  /// One character per register qubit over {0, 1, +, -, i, m}.
  std::string prep;
  /// One character per register qubit over {X, Y, Z}.
  std::string basis;
  /// Drives applied from t = 0 up to each requested evolution time.
  DriveProgram drives;
  /// Shots per time point; 0 requests exact expectations (unit weight).
  int shots = 1024;
  /// Slow-drift epoch (defect parameter respawn); 0 = base parameters.
  int tls_epoch = 0;
};

/// Execution backend interface. run_series is one provider session (one
/// "job"): orchestrators that promise a session budget are audited against
/// the sessions() counter.
class MeasurementProvider {
 public:
  virtual ~MeasurementProvider() = default;

  /// Runs the experiment at each time (us, sorted, >= 0) and returns one
  /// record per time. Counts as one session.
  std::vector<MeasurementRecord> run_series(const ExperimentSpec& spec,
                                            const std::vector<double>& times);

  virtual int n_qubits() const = 0;

  /// Number of run_series calls so far.
  long long sessions() const { return sessions_; }

 protected:
  virtual std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                                 const std::vector<double>& times) = 0;

  /// Validates spec and times against this provider; throws on violation.
  void check_spec(const ExperimentSpec& spec, const std::vector<double>& times) const;

 private:
  long long sessions_ = 0;
};

/// Content-keyed substream seed: a stable digest of the experiment identity
/// (register, prep, basis, drives, epoch, time) scrambled with the master
/// seed. Exposed for golden tests.
std::uint64_t experiment_seed(std::uint64_t master_seed, const ExperimentSpec& spec,
                              double time_us);

/// Pulse-level backend: expands the drive program into a schedule and runs
/// the density-matrix simulator (frame/RWA per options), traces out defects
/// and idle qubits, then samples with the configured readout flips.
class SimulatorProvider : public MeasurementProvider {
 public:
  SimulatorProvider(DeviceConfig cfg, std::uint64_t master_seed, Frame frame = Frame::Rotating,
                    bool rwa = true);

  int n_qubits() const override { return cfg_.n; }
  const DeviceConfig& config() const { return cfg_; }

 protected:
  std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                         const std::vector<double>& times) override;

 private:
  DeviceConfig cfg_;
  std::uint64_t master_seed_;
  Frame frame_;
  bool rwa_;
};

/// Drive-rate backend: interprets each constant tone through the configured
/// coefficient rules (cross-resonance tones) or as a resonant field, sums the
/// resulting generator over tones, adds the static frame detunings, and
/// evolves exp(-i 2 pi H t) followed by per-qubit damping/dephasing channels
/// of the full duration. The arbitrary-waveform-generator model is applied to
/// each requested tone (amplitude and phase) before synthesis.
///
/// Restrictions (violations throw): tone detunings must be 0; a tone with
/// carrier_target != qubit must address a coupled pair. Defects are not
/// modeled at this level.
class EffectiveHamiltonianProvider : public MeasurementProvider {
 public:
  EffectiveHamiltonianProvider(DeviceConfig cfg, std::uint64_t master_seed);

  int n_qubits() const override { return cfg_.n; }
  const DeviceConfig& config() const { return cfg_; }

  /// The synthesized generator (MHz, full register) for a drive program.
  RateTable generator_for(const DriveProgram& drives) const;

 protected:
  std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                         const std::vector<double>& times) override;

 private:
  DeviceConfig cfg_;
  std::uint64_t master_seed_;
};

/// Oracle backend: evolves under a fixed generator on the full register,
/// ignoring any requested drives, with optional per-qubit damping/dephasing
/// and readout flips. Used to test reconstruction against known truth.
class RateTableProvider : public MeasurementProvider {
 public:
  struct Noise {
    std::vector<std::optional<double>> t1;  // us, per qubit
    std::vector<std::optional<double>> t2;  // us, per qubit
    std::vector<double> readout_flip;       // per qubit; empty = none
  };

  RateTableProvider(RateTable generator, std::uint64_t master_seed, Noise noise = {});

  int n_qubits() const override { return generator_.n_qubits(); }
  const RateTable& generator() const { return generator_; }

 protected:
  std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                         const std::vector<double>& times) override;

 private:
  RateTable generator_;
  std::uint64_t master_seed_;
  Noise noise_;
};

}  // namespace crsim
