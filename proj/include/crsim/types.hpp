// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared scalar/matrix aliases and numeric conventions.
//
// Conventions used throughout the library:
//  * all rates and frequencies are ordinary (non-angular) megahertz,
//  * all times and durations are microseconds,
//  * a Hamiltonian H given in MHz generates the propagator exp(-i*2*pi*H*t).

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace crsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Frobenius distance to the closest Hermitian matrix.
double hermiticity_defect(const Matrix& m);

/// Frobenius norm of (U U^dag - 1).
double unitarity_defect(const Matrix& u);

/// True when m is Hermitian within tol (Frobenius).
bool is_hermitian(const Matrix& m, double tol = 1e-9);

/// True when u is unitary within tol (Frobenius).
bool is_unitary(const Matrix& u, double tol = 1e-9);

/// (m + m^dag) / 2.
Matrix hermitize(const Matrix& m);

/// Kronecker product, left factor most significant.
Matrix kron(const Matrix& a, const Matrix& b);

/// Throws std::invalid_argument with `msg` when `cond` is false.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace crsim
