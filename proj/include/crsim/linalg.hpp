// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Propagators and principal matrix logarithms for piecewise-constant
// Hamiltonian evolution.

#pragma once

#include <utility>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// One piecewise-constant evolution segment: a Hermitian generator in
/// angular units (rad/us) and its duration (us).
struct Segment {
  Matrix hamiltonian;  // rad/us
  double dt = 0.0;     // us, >= 0
};

/// exp(-i * h * t) for Hermitian h (angular units, rad/us) via
/// eigendecomposition. Throws when h is not Hermitian.
Matrix expm_hermitian(const Matrix& h, double t);

/// Time-ordered product U = exp(-i H_N dt_N) ... exp(-i H_1 dt_1) for
/// segments listed in chronological order (first element acts first, i.e.
/// appears rightmost in the product). Hamiltonians are in rad/us.
/// Throws on non-Hermitian generators, negative dt, or dimension mismatch.
Matrix propagate(const std::vector<Segment>& segments);

/// Hermitian, traceless H (in MHz) with exp(-i*2*pi*H*t) = U up to a global
/// phase, built from the principal eigenphases of U in (-pi, pi] (boundary
/// assigned to +pi). Throws when U is not unitary within `unitary_tol` or
/// t <= 0.
Matrix log_unitary(const Matrix& u, double t, double unitary_tol = 1e-6);

/// Closest unitary to m in Frobenius norm (polar factor via SVD).
Matrix polar_unitary(const Matrix& m);

}  // namespace crsim
