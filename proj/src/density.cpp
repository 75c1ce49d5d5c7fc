// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "crsim/pauli.hpp"

namespace crsim {

void check_density_matrix(const Matrix& rho, double tol) {
  require(rho.rows() == rho.cols(), "density matrix must be square");
  require(std::abs(rho.trace().real() - 1.0) <= tol && std::abs(rho.trace().imag()) <= tol,
          "density matrix trace must be 1");
  require(is_hermitian(rho, tol), "density matrix must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(rho));
  require(es.eigenvalues().minCoeff() >= -tol,
          "density matrix must be positive semidefinite");
}

double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep, int n_subsystems) {
  require(n_subsystems >= 1, "partial_trace: need at least one subsystem");
  const Eigen::Index dim = Eigen::Index(1) << n_subsystems;
  require(rho.rows() == dim && rho.cols() == dim,
          "partial_trace: dimension does not match subsystem count");
  std::vector<bool> kept(static_cast<size_t>(n_subsystems), false);
  for (int q : keep) {
    require(q >= 0 && q < n_subsystems, "partial_trace: subsystem index out of range");
    require(!kept[static_cast<size_t>(q)], "partial_trace: duplicate subsystem index");
    kept[static_cast<size_t>(q)] = true;
  }
  const int n_keep = static_cast<int>(keep.size());
  const Eigen::Index dim_keep = Eigen::Index(1) << n_keep;
  std::vector<int> traced;
  for (int q = 0; q < n_subsystems; ++q)
    if (!kept[static_cast<size_t>(q)]) traced.push_back(q);
  const int n_tr = static_cast<int>(traced.size());
  const Eigen::Index dim_tr = Eigen::Index(1) << n_tr;

  // Subsystem 0 owns the most significant bit of a basis index.
  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  for (Eigen::Index row = 0; row < dim_keep; ++row) {
    for (Eigen::Index col = 0; col < dim_keep; ++col) {
      cplx acc = 0.0;
      for (Eigen::Index tr = 0; tr < dim_tr; ++tr) {
        Eigen::Index full_row = 0, full_col = 0;
        for (int k = 0; k < n_keep; ++k) {
          const int q = keep[static_cast<size_t>(k)];
          const Eigen::Index shift = n_subsystems - 1 - q;
          full_row |= ((row >> (n_keep - 1 - k)) & 1) << shift;
          full_col |= ((col >> (n_keep - 1 - k)) & 1) << shift;
        }
        for (int k = 0; k < n_tr; ++k) {
          const int q = traced[static_cast<size_t>(k)];
          const Eigen::Index shift = n_subsystems - 1 - q;
          const Eigen::Index b = (tr >> (n_tr - 1 - k)) & 1;
          full_row |= b << shift;
          full_col |= b << shift;
        }
        acc += rho(full_row, full_col);
      }
      out(row, col) = acc;
    }
  }
  return out;
}

double expectation(const Matrix& rho, const Matrix& op) {
  require(rho.rows() == op.rows() && rho.cols() == op.cols(),
          "expectation: dimension mismatch");
  return (op * rho).trace().real();
}

Matrix basis_change_1q(char basis) {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix v(2, 2);
  switch (basis) {
    case 'Z':
      v << 1, 0, 0, 1;
      break;
    case 'X':  // Hadamard: H X H = Z
      v << s, s, s, -s;
      break;
    case 'Y':  // H S^dag: (H S^dag) Y (H S^dag)^dag = Z
      v << s, cplx(0, -s), s, cplx(0, s);
      break;
    default:
      throw std::invalid_argument(std::string("basis_change_1q: invalid basis '") +
                                  basis + "' (need X, Y or Z)");
  }
  return v;
}

Matrix basis_change(const std::string& basis) {
  require(!basis.empty(), "basis_change: empty basis string");
  Matrix v = basis_change_1q(basis[0]);
  for (size_t q = 1; q < basis.size(); ++q) v = kron(v, basis_change_1q(basis[q]));
  return v;
}

RealVector born_probabilities(const Matrix& rho, const std::string& basis) {
  const Eigen::Index dim = Eigen::Index(1) << basis.size();
  require(rho.rows() == dim && rho.cols() == dim,
          "born_probabilities: basis length does not match state dimension");
  const Matrix v = basis_change(basis);
  const Matrix rotated = v * rho * v.adjoint();
  RealVector probs(dim);
  for (Eigen::Index k = 0; k < dim; ++k) probs[k] = std::max(0.0, rotated(k, k).real());
  const double total = probs.sum();
  require(std::abs(total - 1.0) <= 1e-6, "born_probabilities: probabilities do not sum to 1");
  return probs / total;
}

Vector prep_state_1q(char label) {
  const double s = 1.0 / std::sqrt(2.0);
  Vector psi(2);
  switch (label) {
    case '0': psi << 1, 0; break;
    case '1': psi << 0, 1; break;
    case '+': psi << s, s; break;
    case '-': psi << s, -s; break;
    case 'i': psi << s, cplx(0, s); break;
    case 'm': psi << s, cplx(0, -s); break;
    default:
      throw std::invalid_argument(std::string("prep_state_1q: invalid preparation '") +
                                  label + "'");
  }
  return psi;
}

Vector prep_state(const std::string& labels) {
  require(!labels.empty(), "prep_state: empty preparation string");
  Vector psi = prep_state_1q(labels[0]);
  for (size_t q = 1; q < labels.size(); ++q) {
    const Vector next = prep_state_1q(labels[q]);
    Vector combined(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      combined[2 * i] = psi[i] * next[0];
      combined[2 * i + 1] = psi[i] * next[1];
    }
    psi = combined;
  }
  return psi;
}

Matrix pure_density(const Vector& psi) { return psi * psi.adjoint(); }

double concurrence(const Matrix& rho) {
  require(rho.rows() == 4 && rho.cols() == 4, "concurrence: defined for two qubits");
  const Matrix yy = pauli_matrix("YY");
  const Matrix m = rho * yy * rho.conjugate() * yy;
  // m is similar to a product of positive semidefinite matrices: eigenvalues
  // are real and non-negative up to roundoff.
  Eigen::ComplexEigenSolver<Matrix> es(m);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < 4; ++i) {
    roots.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

}  // namespace crsim
