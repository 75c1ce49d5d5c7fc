// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/types.hpp"

namespace crsim {

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint().eval()).norm() / 2.0;
}

double unitarity_defect(const Matrix& u) {
  Matrix id = Matrix::Identity(u.rows(), u.cols());
  return (u * u.adjoint() - id).norm();
}

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

bool is_unitary(const Matrix& u, double tol) {
  return u.rows() == u.cols() && unitarity_defect(u) <= tol;
}

Matrix hermitize(const Matrix& m) { return (m + m.adjoint().eval()) / 2.0; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace crsim
