// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/pauli.hpp"

#include <cmath>

namespace crsim {

namespace {

int char_index(char p) {
  switch (p) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default: return -1;
  }
}

constexpr char kAlphabet[] = {'I', 'X', 'Y', 'Z'};

}  // namespace

bool is_pauli_label(const std::string& label) {
  if (label.empty()) return false;
  for (char c : label)
    if (char_index(c) < 0) return false;
  return true;
}

std::vector<std::string> all_pauli_labels(int n_qubits) {
  require(n_qubits >= 1, "all_pauli_labels: need at least one qubit");
  int total = 1;
  for (int i = 0; i < n_qubits; ++i) total *= 4;
  std::vector<std::string> out;
  out.reserve(total);
  for (int idx = 0; idx < total; ++idx)
    out.push_back(pauli_label_from_index(idx, n_qubits));
  return out;
}

int pauli_index(const std::string& label) {
  require(is_pauli_label(label), "pauli_index: invalid label '" + label + "'");
  int idx = 0;
  for (char c : label) idx = idx * 4 + char_index(c);
  return idx;
}

std::string pauli_label_from_index(int index, int n_qubits) {
  require(n_qubits >= 1, "pauli_label_from_index: need at least one qubit");
  std::string label(n_qubits, 'I');
  for (int q = n_qubits - 1; q >= 0; --q) {
    label[q] = kAlphabet[index % 4];
    index /= 4;
  }
  require(index == 0, "pauli_label_from_index: index out of range");
  return label;
}

Matrix pauli_matrix_1q(char p) {
  Matrix m(2, 2);
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default:
      throw std::invalid_argument(std::string("pauli_matrix_1q: invalid Pauli '") + p + "'");
  }
  return m;
}

Matrix pauli_matrix(const std::string& label) {
  require(is_pauli_label(label), "pauli_matrix: invalid label '" + label + "'");
  Matrix out = pauli_matrix_1q(label[0]);
  for (size_t q = 1; q < label.size(); ++q) out = kron(out, pauli_matrix_1q(label[q]));
  return out;
}

RealVector pauli_decompose(const Matrix& h, double tol) {
  const Eigen::Index dim = h.rows();
  require(dim == h.cols(), "pauli_decompose: matrix must be square");
  int n = 0;
  Eigen::Index d = dim;
  while (d > 1 && d % 2 == 0) {
    d /= 2;
    ++n;
  }
  require(d == 1 && n >= 1, "pauli_decompose: dimension must be a power of two");
  require(is_hermitian(h, tol), "pauli_decompose: matrix is not Hermitian");

  const auto labels = all_pauli_labels(n);
  RealVector coeffs(static_cast<Eigen::Index>(labels.size()));
  for (size_t k = 0; k < labels.size(); ++k) {
    const Matrix p = pauli_matrix(labels[k]);
    coeffs[static_cast<Eigen::Index>(k)] =
        ((p * h).trace() / static_cast<double>(dim)).real();
  }
  return coeffs;
}

Matrix pauli_recompose(const RealVector& coeffs, int n_qubits) {
  const auto labels = all_pauli_labels(n_qubits);
  require(static_cast<size_t>(coeffs.size()) == labels.size(),
          "pauli_recompose: coefficient count does not match qubit count");
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  Matrix out = Matrix::Zero(dim, dim);
  for (size_t k = 0; k < labels.size(); ++k) {
    const double c = coeffs[static_cast<Eigen::Index>(k)];
    if (c != 0.0) out += c * pauli_matrix(labels[k]);
  }
  return out;
}

std::string embed_label(const std::string& label, const std::vector<int>& positions,
                        int n_qubits) {
  require(is_pauli_label(label), "embed_label: invalid label '" + label + "'");
  require(label.size() == positions.size(),
          "embed_label: label length must match position count");
  std::string out(static_cast<size_t>(n_qubits), 'I');
  for (size_t k = 0; k < positions.size(); ++k) {
    const int pos = positions[k];
    require(pos >= 0 && pos < n_qubits, "embed_label: position out of range");
    require(out[static_cast<size_t>(pos)] == 'I', "embed_label: duplicate position");
    out[static_cast<size_t>(pos)] = label[k];
  }
  return out;
}

}  // namespace crsim
