// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace crsim {

Matrix expm_hermitian(const Matrix& h, double t) {
  require(is_hermitian(h, 1e-9 * std::max(1.0, h.norm())),
          "expm_hermitian: generator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  require(es.info() == Eigen::Success, "expm_hermitian: eigendecomposition failed");
  const Eigen::Index dim = h.rows();
  Vector phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    phases[k] = std::exp(cplx(0.0, -es.eigenvalues()[k] * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix propagate(const std::vector<Segment>& segments) {
  require(!segments.empty(), "propagate: need at least one segment");
  const Eigen::Index dim = segments.front().hamiltonian.rows();
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& seg : segments) {
    require(seg.hamiltonian.rows() == dim && seg.hamiltonian.cols() == dim,
            "propagate: segment dimension mismatch");
    require(seg.dt >= 0.0, "propagate: negative segment duration");
    // Chronological order: later segments multiply from the left.
    u = expm_hermitian(seg.hamiltonian, seg.dt) * u;
  }
  return u;
}

Matrix log_unitary(const Matrix& u, double t, double unitary_tol) {
  require(t > 0.0, "log_unitary: duration must be positive");
  require(u.rows() == u.cols(), "log_unitary: matrix must be square");
  require(unitarity_defect(u) <= unitary_tol, "log_unitary: matrix is not unitary");

  // A unitary is normal, so its Schur form is diagonal and the Schur vectors
  // give an orthonormal eigenbasis even for (numerically) degenerate
  // eigenvalues.
  Eigen::ComplexSchur<Matrix> schur(u);
  require(schur.info() == Eigen::Success, "log_unitary: Schur decomposition failed");
  const Eigen::Index dim = u.rows();
  RealVector rates(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    // Principal phase in (-pi, pi]; std::arg maps the negative real axis
    // (phase-pi boundary) to +pi, matching the branch convention.
    const double theta = std::arg(schur.matrixT()(k, k));
    rates[k] = -theta / (kTwoPi * t);
  }
  Matrix h = schur.matrixU() * rates.cast<cplx>().asDiagonal() *
             schur.matrixU().adjoint();
  h = hermitize(h);
  // Project out the identity component (removes the global phase).
  const cplx tr = h.trace() / static_cast<double>(dim);
  h -= tr * Matrix::Identity(dim, dim);
  return h;
}

Matrix polar_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace crsim
