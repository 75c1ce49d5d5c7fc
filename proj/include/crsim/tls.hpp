// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Defect (two-level-system) analysis: idle-delay scans, two-frequency
// beating fits, purity-vs-delay with coherence-revival detection, and
// repetition ensembles under slow environment drift.
//
// A qubit dispersively coupled to a defect via (chi/2) Z x Z precesses at
// one of two frequencies split by 2 chi depending on the defect state, so a
// thermally mixed defect turns a Ramsey-style delay scan into a beating
//   <X>(t) = (c0 cos(2 pi f0 t) + c1 cos(2 pi f1 t)) exp(-t / T2star)
// with weights equal to the defect populations, and the single-qubit purity
// collapses and revives at multiples of 1/(f1 - f0). Classical dephasing
// produces neither signature, which is what these routines test for.

#pragma once

#include <string>
#include <vector>

#include "crsim/provider.hpp"
#include "crsim/types.hpp"

namespace crsim {

/// Idle-delay scan data: one row of expectation values per repetition,
/// columns following `delays`. `epochs` records the environment-drift epoch
/// each repetition ran at -- the logical timestamp of the acquisition.
struct DelayDataset {
  int qubit = 0;
  std::string basis = "X";    // measurement basis, one of X/Y/Z
  std::vector<double> delays;  // us, strictly increasing
  RealMatrix values;           // repetitions x delays, entries in [-1, 1]
  std::vector<int> epochs;     // drift epoch per repetition
  int shots = 0;               // shots per point (0 = exact expectations)
  std::vector<std::string> warnings;

  int repetitions() const { return static_cast<int>(values.rows()); }

  /// Throws std::invalid_argument on invariant violations (delays not
  /// increasing, values outside [-1, 1], shape mismatches, no repetitions).
  void validate() const;
};

/// Result of the damped two-cosine fit
///   (c0 cos(2 pi f0 t) + c1 cos(2 pi f1 t)) exp(-t / t2star).
struct TwoCosineFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double f0 = 0.0;      // MHz, canonical f0 <= f1
  double f1 = 0.0;      // MHz
  double t2star = 0.0;  // us, > 0
  double residual = 0.0;  // root-mean-square misfit

  /// Single usable spectral line: the fit fell back to one cosine and f1
  /// duplicates f0 with c1 = 0.
  bool f1_unresolved = false;
  /// c0 + c1 strayed outside [0.8, 1.2]; the series should start near 1.
  bool weight_sum_flagged = false;
  /// Residual above kPoorFitResidual: the model cannot reproduce the data
  /// (e.g. more than one defect contributing).
  bool poor_fit = false;
  std::vector<std::string> warnings;
};

/// Residual (RMS) above which a two-cosine fit is flagged as unable to
/// reproduce the data.
inline constexpr double kPoorFitResidual = 0.04;

/// Spread of fitted f0 across repetitions (MHz) above which an ensemble is
/// flagged as unstable.
inline constexpr double kUnstableSpread = 0.01;

/// One reconstructed point of a purity-vs-delay scan.
struct PurityPoint {
  double delay = 0.0;   // us
  double purity = 0.0;  // (1 + |r|^2) / 2, r the clipped Bloch vector
};

/// A coherence revival: a local purity maximum after the first collapse.
struct Revival {
  double time = 0.0;        // us
  double prominence = 0.0;  // height above the higher bounding minimum
};

/// Pointwise statistics and per-repetition fits over a delay-scan ensemble.
struct EnsembleStats {
  std::vector<double> mean;  // pointwise over repetitions
  std::vector<double> lo;    // pointwise minimum
  std::vector<double> hi;    // pointwise maximum
  std::vector<TwoCosineFit> fits;  // one per repetition (empty if too few points)
  double f0_spread = 0.0;    // max - min fitted f0 across repetitions
  bool unstable = false;     // f0_spread > kUnstableSpread
};

/// Runs an idle-delay experiment: prepare |+>, idle for each delay, measure
/// `basis` (X/Y/Z), sequentially for `repetitions` acquisitions. Repetition
/// r runs at drift epoch r + 1, so a simulator backend with respawn ranges
/// configured redraws its defect parameters between repetitions; without
/// ranges every epoch sees the base parameters. A provider failure after at
/// least one complete repetition returns the partial dataset with a warning
/// recording the failed repetition; a failure on the first throws.
DelayDataset run_delay_scan(MeasurementProvider& provider, int qubit,
                            const std::string& basis, const std::vector<double>& delays,
                            int shots, int repetitions = 1);

/// Least-squares fit of one repetition to the damped two-cosine model.
/// Initialized from the two largest discrete-spectrum peaks and refined by
/// multi-start (guarding against weight-swapped local minima); falls back to
/// a single damped cosine when only one significant peak exists. Requires at
/// least 25 points. Frequencies are reported non-negative with f0 <= f1.
TwoCosineFit fit_two_cosine(const std::vector<double>& delays,
                            const std::vector<double>& values);

/// Convenience overload fitting row `repetition` of a dataset.
TwoCosineFit fit_two_cosine(const DelayDataset& dataset, int repetition = 0);

/// Single-qubit state tomography at each delay (three provider sessions:
/// X, Y, Z series on the |+> preparation at base drift epoch): linear
/// inversion of the Bloch vector, clipped to the unit ball when shot noise
/// pushes it outside, purity = (1 + |r|^2) / 2.
std::vector<PurityPoint> purity_scan(MeasurementProvider& provider, int qubit,
                                     const std::vector<double>& delays, int shots);

/// Local purity maxima after the first local minimum, keeping those whose
/// prominence (height above the higher of the bounding minima) reaches
/// `min_prominence`; sorted by time. Requires at least 20 points.
std::vector<Revival> detect_revivals(const std::vector<PurityPoint>& series,
                                     double min_prominence = 0.02);

/// Overload on parallel (times, purities) arrays.
std::vector<Revival> detect_revivals(const std::vector<double>& times,
                                     const std::vector<double>& purities,
                                     double min_prominence = 0.02);

/// Pointwise mean/min/max over repetitions plus per-repetition two-cosine
/// fits (when the grid has enough points for them) and the spread of fitted
/// f0 as a drift summary. Requires at least 2 repetitions.
EnsembleStats ensemble_statistics(const DelayDataset& dataset);

}  // namespace crsim
