// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// RateTable: a sparse Pauli-label -> rate (MHz) map describing an effective
// Hamiltonian H = sum_L c_L P_L. The identity label is never stored.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(int n_qubits) : n_qubits_(n_qubits) {
    require(n_qubits >= 1, "RateTable: need at least one qubit");
  }

  int n_qubits() const { return n_qubits_; }

  /// Sets (overwrites) the rate of a label. Rejects identity and labels of
  /// the wrong width.
  void set(const std::string& label, double rate_mhz);

  /// Adds to the rate of a label (creating it at 0 first).
  void add(const std::string& label, double rate_mhz);

  /// Rate of a label; 0 when absent.
  double get(const std::string& label) const;

  bool contains(const std::string& label) const { return rates_.count(label) > 0; }

  /// Labels in canonical (base-4) order.
  std::vector<std::string> labels() const;

  const std::map<std::string, double>& raw() const { return rates_; }

  /// Dense Hermitian matrix sum_L c_L P_L (MHz).
  Matrix to_matrix() const;

  /// Builds a table from a Hermitian matrix in MHz, dropping the identity
  /// component and rates below `threshold` in magnitude.
  static RateTable from_matrix(const Matrix& h_mhz, double threshold = 0.0);

  /// Embeds this table into a wider register: label character k moves to
  /// positions[k]; identity elsewhere.
  RateTable embedded(const std::vector<int>& positions, int n_total) const;

  /// Entrywise sum. Tables must have equal width.
  RateTable operator+(const RateTable& other) const;

  /// Entrywise difference.
  RateTable operator-(const RateTable& other) const;

  /// Largest |rate| over all stored labels (0 when empty).
  double max_abs() const;

  /// Drops entries with |rate| < threshold.
  RateTable pruned(double threshold) const;

 private:
  int n_qubits_ = 0;
  std::map<std::string, double> rates_;  // keyed by label, canonical string order
};

}  // namespace crsim
