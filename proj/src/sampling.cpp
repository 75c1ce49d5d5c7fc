// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "crsim/density.hpp"

namespace crsim {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "Rng::below: empty range");
  // Rejection sampling keeps the draw unbiased and deterministic.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double MeasurementRecord::expectation(const std::string& label) const {
  require(static_cast<int>(label.size()) == n_qubits,
          "MeasurementRecord::expectation: label length mismatch");
  require(shots > 0, "MeasurementRecord::expectation: empty record");
  // Bit mask of the label's support (qubit 0 = most significant bit).
  std::uint64_t mask = 0;
  for (int q = 0; q < n_qubits; ++q) {
    const char c = label[static_cast<size_t>(q)];
    require(c == 'I' || c == 'X' || c == 'Y' || c == 'Z',
            "MeasurementRecord::expectation: invalid label");
    if (c != 'I') mask |= std::uint64_t(1) << (n_qubits - 1 - q);
  }
  double acc = 0.0;
  for (size_t outcome = 0; outcome < weights.size(); ++outcome) {
    const int parity = std::popcount(outcome & mask) & 1;
    acc += (parity ? -1.0 : 1.0) * weights[outcome];
  }
  return acc / shots;
}

namespace {

void check_flips(const std::vector<double>& readout_flip, size_t n) {
  require(readout_flip.empty() || readout_flip.size() == n,
          "readout_flip must be empty or give one probability per qubit");
  for (double p : readout_flip)
    require(p >= 0.0 && p <= 0.5, "readout flip probability must lie in [0, 1/2]");
}

}  // namespace

MeasurementRecord sample_counts(const Matrix& rho, const std::string& basis, int shots,
                                const std::vector<double>& readout_flip, Rng& rng) {
  require(shots > 0, "sample_counts: shots must be positive");
  for (char c : basis)
    require(c == 'X' || c == 'Y' || c == 'Z',
            "sample_counts: basis must contain only X, Y, Z");
  check_flips(readout_flip, basis.size());

  const RealVector probs = born_probabilities(rho, basis);
  const int n = static_cast<int>(basis.size());
  const size_t dim = size_t(1) << n;

  // Cumulative distribution for inverse-transform sampling.
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (size_t k = 0; k < dim; ++k) {
    acc += probs[static_cast<Eigen::Index>(k)];
    cdf[k] = acc;
  }
  cdf[dim - 1] = 1.0;

  MeasurementRecord rec;
  rec.n_qubits = n;
  rec.shots = shots;
  rec.weights.assign(dim, 0.0);
  for (int s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    size_t outcome = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (outcome >= dim) outcome = dim - 1;
    if (!readout_flip.empty()) {
      for (int q = 0; q < n; ++q) {
        const double p = readout_flip[static_cast<size_t>(q)];
        if (p > 0.0 && rng.uniform() < p)
          outcome ^= size_t(1) << (n - 1 - q);
      }
    }
    rec.weights[outcome] += 1.0;
  }
  return rec;
}

MeasurementRecord exact_counts(const Matrix& rho, const std::string& basis, int shots,
                               const std::vector<double>& readout_flip) {
  require(shots > 0, "exact_counts: shots must be positive");
  for (char c : basis)
    require(c == 'X' || c == 'Y' || c == 'Z',
            "exact_counts: basis must contain only X, Y, Z");
  check_flips(readout_flip, basis.size());

  RealVector probs = born_probabilities(rho, basis);
  const int n = static_cast<int>(basis.size());
  if (!readout_flip.empty()) {
    // Independent symmetric bit-flip channel on the outcome distribution.
    for (int q = 0; q < n; ++q) {
      const double p = readout_flip[static_cast<size_t>(q)];
      if (p == 0.0) continue;
      RealVector next = RealVector::Zero(probs.size());
      const Eigen::Index bit = Eigen::Index(1) << (n - 1 - q);
      for (Eigen::Index k = 0; k < probs.size(); ++k) {
        next[k] += (1.0 - p) * probs[k];
        next[k ^ bit] += p * probs[k];
      }
      probs = next;
    }
  }
  MeasurementRecord rec;
  rec.n_qubits = n;
  rec.shots = shots;
  rec.weights.resize(static_cast<size_t>(probs.size()));
  for (Eigen::Index k = 0; k < probs.size(); ++k)
    rec.weights[static_cast<size_t>(k)] = shots * probs[k];
  return rec;
}

}  // namespace crsim
