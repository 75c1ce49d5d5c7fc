// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Pauli strings on n qubits: dense matrices, coefficient decompositions and
// label bookkeeping. A label is a string over {I, X, Y, Z}; its leftmost
// character acts on the most significant qubit (qubit 0).

#pragma once

#include <string>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// True when every character of `label` is one of I, X, Y, Z (nonempty).
bool is_pauli_label(const std::string& label);

/// All 4^n labels on n qubits in canonical (base-4, I<X<Y<Z) order.
std::vector<std::string> all_pauli_labels(int n_qubits);

/// Canonical index of a label: base-4 integer with I=0, X=1, Y=2, Z=3 and the
/// leftmost character most significant.
int pauli_index(const std::string& label);

/// Inverse of pauli_index for a given register width.
std::string pauli_label_from_index(int index, int n_qubits);

/// Dense 2^n x 2^n matrix of a Pauli string. Throws on invalid labels.
Matrix pauli_matrix(const std::string& label);

/// Single-qubit Pauli matrix for a character in {I, X, Y, Z}.
Matrix pauli_matrix_1q(char p);

/// Coefficients c_L = Tr(H P_L) / 2^n of a Hermitian H over all 4^n labels,
/// in canonical label order (real by Hermiticity). Throws when H is not
/// Hermitian within `tol` or its dimension is not a power of two.
RealVector pauli_decompose(const Matrix& h, double tol = 1e-9);

/// Rebuilds sum_L c_L P_L from canonical-order coefficients.
Matrix pauli_recompose(const RealVector& coeffs, int n_qubits);

/// Embeds a label on `positions` into a register of `n_qubits` (identity
/// elsewhere), e.g. embed "ZX" at {0,2} in 3 qubits -> "ZIX".
std::string embed_label(const std::string& label, const std::vector<int>& positions,
                        int n_qubits);

}  // namespace crsim
