// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantum process tomography on one to three qubits against any measurement
// provider: Pauli-transfer-matrix reconstruction by linear inversion, the
// chi (Pauli-basis process) representation with positive-cone projection,
// dominant-unitary extraction, generator recovery via the principal matrix
// logarithm, pi-branch resolution across drive durations, and the
// three-qubit additivity experiment suite.

#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crsim/provider.hpp"
#include "crsim/rate_table.hpp"
#include "crsim/schedule.hpp"
#include "crsim/types.hpp"

namespace crsim {

/// Process matrix in the Pauli basis: E(rho) = d * sum_{mn} chi_mn
/// P_m rho P_n with labels in canonical order. Stored after Hermitization,
/// positive-cone projection, and trace normalization, so entries are
/// Hermitian, trace 1, with eigenvalues >= -1e-9; lambda0 is the largest
/// eigenvalue (1 exactly for a unitary channel).
struct ChiMatrix {
  int n_qubits = 0;
  Matrix entries;          // 4^n x 4^n
  double lambda0 = 0.0;    // largest eigenvalue after projection
  double condition = 0.0;  // condition number of the preparation inversion
  std::vector<std::string> warnings;
};

/// Dominant unitary contribution of a channel: the top chi eigenvector
/// recomposed over Pauli strings and projected to the closest unitary.
struct DominantUnitary {
  double lambda0 = 0.0;
  Matrix u;
  /// Top eigenvalue within 1e-6 of the runner-up. The returned vector is
  /// the solver's deterministic choice, canonicalized by the phase rule.
  bool degenerate = false;
  double gap = 0.0;  // lambda0 - lambda1
};

/// Result of the duration-consistency (pi-branch) search.
struct BranchResolved {
  RateTable rates;  // constant-fit rate per label
  /// Sample standard deviation of the corrected per-duration rates.
  std::map<std::string, double> per_label_std;
  /// Chosen integer corrections, one per duration, label-keyed.
  std::map<std::string, std::vector<int>> corrections;
  /// Labels where no correction made the durations consistent; their rates
  /// fall back to the mean principal-branch value.
  std::vector<std::string> ambiguous;
  std::vector<std::string> warnings;
};

struct AdditivityOptions {
  std::vector<double> durations = {0.05, 0.10, 0.15, 0.20};
  int shots = 0;  // 0 = exact expectations
  int k_max = 3;
  double std_threshold = 0.25;  // MHz; branch-consistency flag level
};

/// Per-label rate report of the four-protocol additivity experiment.
struct AdditivityReport {
  static constexpr std::array<const char*, 4> kProtocolNames = {
      "idle", "drive_first", "drive_third", "both"};
  std::array<BranchResolved, 4> protocols;
  std::array<bool, 4> completed = {false, false, false, false};
  RateTable predicted;  // idle + drive_first + drive_third
  RateTable measured;   // both
  /// |predicted - measured| per label (union support), canonical order.
  std::map<std::string, double> deviations;
  std::vector<std::string> warnings;
};

struct ThreeQubitOptions {
  double duration = 0.05;  // us; short enough to stay on the principal branch
  int shots = 0;
};

/// Full three-qubit tomography under simultaneous drives, with the five
/// drive-generated labels (in register order control, middle, far-end)
/// separated from everything else.
struct ThreeQubitResult {
  RateTable rates;
  std::vector<std::string> expected_labels;
  double max_spurious = 0.0;
  double min_expected = 0.0;
  double spurious_ratio = 0.0;  // max_spurious / min_expected
  std::vector<std::string> warnings;
};

/// Runs process tomography on `qubits` (1 to 3): prepares the 4^n states
/// {|0>, |1>, |+>, |+i>}^n, applies `drives` for `duration_us`, measures all
/// 3^n Pauli bases, and reconstructs the projected chi matrix. Pauli
/// expectations are averaged over every measurement basis consistent with
/// the label. shots = 0 requests exact expectations; otherwise shots >= 256
/// per circuit is required. A preparation-matrix condition number above 1e8
/// is reported in warnings.
ChiMatrix run_qpt(MeasurementProvider& provider, const std::vector<int>& qubits,
                  const DriveProgram& drives, double duration_us, int shots);

/// run_qpt at several durations sharing one provider session per
/// (preparation, basis) pair. Durations must be strictly increasing, > 0.
std::vector<ChiMatrix> run_qpt_series(MeasurementProvider& provider,
                                      const std::vector<int>& qubits,
                                      const DriveProgram& drives,
                                      const std::vector<double>& durations_us, int shots);

/// Analytic chi matrix of a unitary: the rank-one projector onto its Pauli
/// coefficient vector v_L = Tr(P_L U) / d.
ChiMatrix chi_of_unitary(const Matrix& u);

/// Chi matrix from a Pauli transfer matrix R_{LM} = Tr(P_L E(P_M)) / d
/// (canonical label order), via the Choi matrix, followed by the standard
/// Hermitization / projection / normalization.
ChiMatrix chi_from_ptm(const RealMatrix& ptm, int n_qubits);

/// Pauli transfer matrix of a (projected) chi matrix.
RealMatrix ptm_from_chi(const ChiMatrix& chi);

/// Positive-cone projection: Hermitize, clip negative eigenvalues to zero,
/// renormalize to unit trace. Projecting an already-positive unit-trace
/// matrix is the identity up to roundoff.
Matrix project_cp(const Matrix& chi_raw, std::vector<std::string>* warnings = nullptr);

/// Extracts the dominant unitary: top chi eigenvector recomposed as
/// sum_L v_L P_L, projected to the closest unitary (polar factor), global
/// phase fixed so the identity Pauli coefficient is real nonnegative (first
/// nonzero coefficient when the identity one vanishes).
DominantUnitary dominant_unitary(const ChiMatrix& chi);

/// Effective generator of U over duration t: Pauli rates (MHz) of the
/// principal-branch logarithm, identity component dropped. Exact Hermitian
/// zero rates are omitted from the table.
RateTable effective_rates(const Matrix& u, double t_us);

/// Reconciles per-duration rate tables that may sit on different logarithm
/// branches. For each label (union support; a missing entry reads as 0) the
/// search adds k_j / (2 t_j) MHz with integer |k_j| <= k_max per duration,
/// minimizing the squared deviation of the corrected rates from one
/// duration-independent constant; ties prefer minimum sum |k_j|, then the
/// smaller |constant|. Labels whose best fit still spreads more than
/// std_threshold (sample std, MHz) are flagged ambiguous and fall back to
/// the mean principal-branch value. Requires >= 3 distinct durations.
BranchResolved resolve_branch(const std::vector<std::pair<double, RateTable>>& tables,
                              int k_max = 3, double std_threshold = 0.25);

/// The four-protocol additivity experiment on a chain q1 - q2 - q3: idle,
/// drive q1 at q2's frequency, drive q3 at q2's frequency, both drives.
/// Each protocol runs two-qubit tomography on (q1, q2) across
/// options.durations with branch resolution; the report compares
/// idle + drive_first + drive_third against both. A failed protocol leaves
/// its completed flag false and is excluded from the comparison.
AdditivityReport additivity_suite(MeasurementProvider& provider, int q1, int q2, int q3,
                                  double omega_mhz, const AdditivityOptions& options = {});

/// Full three-qubit tomography of the simultaneous-drive protocol (q1 and
/// q3 both driven at q2's frequency). The expected set is {IIZ, IXI, IXZ,
/// ZII, ZXI} in (q1, q2, q3) register order; every other label is spurious.
ThreeQubitResult three_qubit_qpt(MeasurementProvider& provider, int q1, int q2, int q3,
                                 double omega_mhz, const ThreeQubitOptions& options = {});

}  // namespace crsim
