// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic shot sampling. All randomness flows through Rng, a thin
// mt19937_64 wrapper whose uniform doubles are derived portably from raw
// 64-bit draws so that a seed pins the byte-exact output stream.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// 64-bit FNV-1a hash (used to derive per-experiment substream seeds and
/// stable configuration digests).
std::uint64_t fnv1a(const std::string& bytes);

/// splitmix64 scrambler; decorrelates structured seed inputs.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic random source.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform double in [0, 1), from the top 53 bits of one engine draw.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Outcome weights of one (preparation, basis, duration) experiment.
/// For sampled records the weights are integer shot counts; exact-expectation
/// records store shots * probability. Outcome index bit order matches the
/// measured register (qubit 0 = most significant bit).
struct MeasurementRecord {
  int n_qubits = 0;
  double shots = 0.0;              // total weight
  std::vector<double> weights;     // size 2^n_qubits

  /// Expectation of the Pauli `label` (over {I,X,Y,Z}, 'I' marginalizes a
  /// qubit) assuming the record was taken in a basis compatible with label.
  double expectation(const std::string& label) const;
};

/// Samples `shots` outcomes from rho measured in `basis` (string over
/// {X,Y,Z}; 'I' rejected), then applies independent symmetric readout bit
/// flips with per-qubit probability readout_flip[q]. Reproducible for a
/// given rng state. Throws on invalid basis, non-positive shots, or flip
/// probabilities outside [0, 1/2].
MeasurementRecord sample_counts(const Matrix& rho, const std::string& basis, int shots,
                                const std::vector<double>& readout_flip, Rng& rng);

/// Exact-expectation analogue of sample_counts: propagates the Born
/// distribution through the readout-flip channel without sampling and stores
/// shots * probability as weights.
MeasurementRecord exact_counts(const Matrix& rho, const std::string& basis, int shots,
                               const std::vector<double>& readout_flip);

}  // namespace crsim
