// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/rate_table.hpp"

#include <algorithm>
#include <cmath>

#include "crsim/pauli.hpp"

namespace crsim {

namespace {

bool is_identity_label(const std::string& label) {
  return std::all_of(label.begin(), label.end(), [](char c) { return c == 'I'; });
}

}  // namespace

void RateTable::set(const std::string& label, double rate_mhz) {
  require(is_pauli_label(label), "RateTable::set: invalid label '" + label + "'");
  require(static_cast<int>(label.size()) == n_qubits_,
          "RateTable::set: label width mismatch");
  require(!is_identity_label(label), "RateTable::set: identity label not allowed");
  rates_[label] = rate_mhz;
}

void RateTable::add(const std::string& label, double rate_mhz) {
  require(is_pauli_label(label), "RateTable::add: invalid label '" + label + "'");
  require(static_cast<int>(label.size()) == n_qubits_,
          "RateTable::add: label width mismatch");
  require(!is_identity_label(label), "RateTable::add: identity label not allowed");
  rates_[label] += rate_mhz;
}

double RateTable::get(const std::string& label) const {
  auto it = rates_.find(label);
  return it == rates_.end() ? 0.0 : it->second;
}

std::vector<std::string> RateTable::labels() const {
  std::vector<std::string> out;
  out.reserve(rates_.size());
  // For fixed-width labels over {I,X,Y,Z}, string order equals the canonical
  // base-4 order, so map iteration is already canonical.
  for (const auto& [label, rate] : rates_) out.push_back(label);
  return out;
}

Matrix RateTable::to_matrix() const {
  require(n_qubits_ >= 1, "RateTable::to_matrix: uninitialized table");
  const Eigen::Index dim = Eigen::Index(1) << n_qubits_;
  Matrix h = Matrix::Zero(dim, dim);
  for (const auto& [label, rate] : rates_) h += rate * pauli_matrix(label);
  return h;
}

RateTable RateTable::from_matrix(const Matrix& h_mhz, double threshold) {
  int n = 0;
  Eigen::Index d = h_mhz.rows();
  while (d > 1 && d % 2 == 0) {
    d /= 2;
    ++n;
  }
  require(d == 1 && n >= 1, "RateTable::from_matrix: dimension must be a power of two");
  const RealVector coeffs = pauli_decompose(h_mhz);
  const auto labels = all_pauli_labels(n);
  RateTable table(n);
  for (size_t k = 1; k < labels.size(); ++k) {  // skip identity (k = 0)
    const double c = coeffs[static_cast<Eigen::Index>(k)];
    if (std::abs(c) >= threshold && c != 0.0) table.set(labels[k], c);
  }
  return table;
}

RateTable RateTable::embedded(const std::vector<int>& positions, int n_total) const {
  RateTable out(n_total);
  for (const auto& [label, rate] : rates_)
    out.add(embed_label(label, positions, n_total), rate);
  return out;
}

RateTable RateTable::operator+(const RateTable& other) const {
  require(n_qubits_ == other.n_qubits_, "RateTable: width mismatch in +");
  RateTable out = *this;
  for (const auto& [label, rate] : other.rates_) out.add(label, rate);
  return out;
}

RateTable RateTable::operator-(const RateTable& other) const {
  require(n_qubits_ == other.n_qubits_, "RateTable: width mismatch in -");
  RateTable out = *this;
  for (const auto& [label, rate] : other.rates_) out.add(label, -rate);
  return out;
}

double RateTable::max_abs() const {
  double best = 0.0;
  for (const auto& [label, rate] : rates_) best = std::max(best, std::abs(rate));
  return best;
}

RateTable RateTable::pruned(double threshold) const {
  RateTable out(n_qubits_);
  for (const auto& [label, rate] : rates_)
    if (std::abs(rate) >= threshold) out.set(label, rate);
  return out;
}

}  // namespace crsim
