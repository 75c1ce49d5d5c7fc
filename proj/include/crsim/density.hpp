// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Density matrices on registers of two-level subsystems: validation,
// reductions and measurement-basis handling. Tensor factors are ordered with
// the leftmost (index 0) subsystem most significant.

#pragma once

#include <string>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// Validates trace ~ 1, Hermiticity and positive semidefiniteness (within
/// tol) of a density matrix. Throws std::invalid_argument on violation.
void check_density_matrix(const Matrix& rho, double tol = 1e-8);

/// Tr(rho^2).
double purity(const Matrix& rho);

/// Reduced density matrix keeping the listed two-level subsystems (in the
/// order given) out of `n_subsystems` factors; all others are traced out.
Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep, int n_subsystems);

/// Tr(op * rho), real part (op is expected Hermitian).
double expectation(const Matrix& rho, const Matrix& op);

/// Single-qubit unitary V with V P V^dag = Z for P in {X, Y, Z}; measuring
/// in basis P equals rotating by V and measuring Z.
Matrix basis_change_1q(char basis);

/// Tensor product of basis_change_1q over a basis string (one char/qubit).
Matrix basis_change(const std::string& basis);

/// Born probabilities of computational-basis outcomes after rotating rho
/// into the given measurement basis (string over {X, Y, Z}, one char per
/// qubit; 'I' is rejected). Outcome index bit order matches qubit order
/// (qubit 0 = most significant bit).
RealVector born_probabilities(const Matrix& rho, const std::string& basis);

/// Pure single-qubit preparation state for a label character:
///  '0' -> |0>, '1' -> |1>, '+' -> |+>, '-' -> |->, 'i' -> |+i>, 'm' -> |-i>.
Vector prep_state_1q(char label);

/// Tensor product of single-qubit preparations (leftmost most significant).
Vector prep_state(const std::string& labels);

/// rho = |psi><psi|.
Matrix pure_density(const Vector& psi);

/// Two-qubit entanglement monotone max(0, l1 - l2 - l3 - l4) where l are the
/// decreasing square roots of the eigenvalues of rho (YY) rho* (YY).
double concurrence(const Matrix& rho);

}  // namespace crsim
