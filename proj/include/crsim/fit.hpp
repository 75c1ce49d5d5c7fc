// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Small deterministic nonlinear least-squares toolkit: damped Gauss-Newton
// (Levenberg-Marquardt) with a numeric Jacobian, plus discrete-spectrum
// peak estimation used to seed oscillation fits.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "crsim/types.hpp"

namespace crsim {

/// Maps parameters to a residual vector (data minus model, any fixed size).
using ResidualFn = std::function<RealVector(const RealVector&)>;

struct LmOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double step_tolerance = 1e-12;   // relative parameter step
  double sse_tolerance = 1e-14;    // relative SSE improvement
  double jacobian_step = 1e-6;     // relative central-difference step
};

struct LmResult {
  RealVector params;
  double sse = 0.0;   // sum of squared residuals at the solution
  double rms = 0.0;   // sqrt(sse / n_residuals)
  bool converged = false;
  int iterations = 0;
};

/// Minimizes ||residuals(p)||^2 from the given start. Deterministic.
LmResult levenberg_marquardt(const ResidualFn& residuals, const RealVector& start,
                             const LmOptions& options = {});

/// Runs LM from several starts and returns the lowest-SSE result
/// (ties broken by start order).
LmResult multi_start_fit(const ResidualFn& residuals, const std::vector<RealVector>& starts,
                         const LmOptions& options = {});

/// Power of the discrete spectrum |sum_i y_i exp(-i 2 pi f t_i)|^2 evaluated
/// on an oversampled frequency grid up to the (median-spacing) Nyquist rate;
/// returns local maxima as (frequency MHz, power) sorted by power, strongest
/// first, at most max_peaks. The mean of y is removed first.
std::vector<std::pair<double, double>> spectral_peaks(const std::vector<double>& times,
                                                      const std::vector<double>& values,
                                                      int max_peaks = 4);

}  // namespace crsim
