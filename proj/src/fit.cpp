// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace crsim {

namespace {

/// Central-difference Jacobian of the residual vector.
RealMatrix numeric_jacobian(const ResidualFn& residuals, const RealVector& params,
                            double relative_step) {
  const RealVector r0 = residuals(params);
  RealMatrix jac(r0.size(), params.size());
  for (Eigen::Index j = 0; j < params.size(); ++j) {
    const double h = relative_step * std::max(1.0, std::abs(params[j]));
    RealVector plus = params;
    RealVector minus = params;
    plus[j] += h;
    minus[j] -= h;
    jac.col(j) = (residuals(plus) - residuals(minus)) / (2.0 * h);
  }
  return jac;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, const RealVector& start,
                             const LmOptions& options) {
  if (start.size() == 0) {
    throw std::invalid_argument("levenberg_marquardt: empty parameter vector");
  }
  LmResult result;
  result.params = start;
  RealVector r = residuals(start);
  if (r.size() == 0) {
    throw std::invalid_argument("levenberg_marquardt: residual function returned no residuals");
  }
  double sse = r.squaredNorm();
  double damping = options.initial_damping;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const RealMatrix jac = numeric_jacobian(residuals, result.params, options.jacobian_step);
    const RealMatrix jtj = jac.transpose() * jac;
    const RealVector gradient = jac.transpose() * r;

    // Try steps with increasing damping until one improves the SSE.
    bool stepped = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      RealMatrix lhs = jtj;
      for (Eigen::Index k = 0; k < lhs.rows(); ++k) {
        lhs(k, k) += damping * std::max(jtj(k, k), 1e-12);
      }
      const RealVector delta = lhs.ldlt().solve(-gradient);
      if (!delta.allFinite()) {
        damping *= 10.0;
        continue;
      }
      const RealVector candidate = result.params + delta;
      const RealVector rc = residuals(candidate);
      const double sse_c = rc.squaredNorm();
      if (std::isfinite(sse_c) && sse_c <= sse) {
        const double step_scale = delta.norm() / std::max(1.0, result.params.norm());
        const double improvement = (sse - sse_c) / std::max(sse, 1e-300);
        result.params = candidate;
        r = rc;
        sse = sse_c;
        damping = std::max(damping * 0.1, 1e-12);
        stepped = true;
        if (step_scale < options.step_tolerance || improvement < options.sse_tolerance) {
          result.converged = true;
        }
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) {
      // No productive step exists at any tried damping: local minimum.
      result.converged = true;
    }
    if (result.converged) {
      break;
    }
  }

  result.sse = sse;
  result.rms = std::sqrt(sse / static_cast<double>(r.size()));
  return result;
}

LmResult multi_start_fit(const ResidualFn& residuals, const std::vector<RealVector>& starts,
                         const LmOptions& options) {
  if (starts.empty()) {
    throw std::invalid_argument("multi_start_fit: no starting points");
  }
  LmResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const LmResult candidate = levenberg_marquardt(residuals, start, options);
    if (candidate.sse < best.sse) {
      best = candidate;
    }
  }
  return best;
}

std::vector<std::pair<double, double>> spectral_peaks(const std::vector<double>& times,
                                                      const std::vector<double>& values,
                                                      int max_peaks) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("spectral_peaks: times and values differ in length");
  }
  if (times.size() < 4) {
    throw std::invalid_argument("spectral_peaks: need at least 4 samples");
  }
  const std::size_t n = times.size();
  const double span = times.back() - times.front();
  if (span <= 0.0) {
    throw std::invalid_argument("spectral_peaks: times must be increasing");
  }
  // Median spacing sets the usable Nyquist rate for irregular grids too.
  std::vector<double> gaps;
  gaps.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    gaps.push_back(times[i + 1] - times[i]);
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double median_dt = gaps[gaps.size() / 2];
  if (median_dt <= 0.0) {
    throw std::invalid_argument("spectral_peaks: duplicate time samples");
  }
  const double f_max = 0.5 / median_dt;
  const double df = 1.0 / (4.0 * span);  // 4x oversampled grid
  const int n_grid = std::max(8, static_cast<int>(std::floor(f_max / df)));

  double mean = 0.0;
  for (double v : values) {
    mean += v;
  }
  mean /= static_cast<double>(n);

  std::vector<double> power(static_cast<std::size_t>(n_grid) + 1, 0.0);
  for (int k = 0; k <= n_grid; ++k) {
    const double f = df * static_cast<double>(k);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += (values[i] - mean) * std::exp(std::complex<double>(0.0, -kTwoPi * f * times[i]));
    }
    power[static_cast<std::size_t>(k)] = std::norm(acc);
  }

  // Local maxima, excluding the zero-frequency bin.
  std::vector<std::pair<double, double>> peaks;
  for (int k = 1; k < n_grid; ++k) {
    const double p = power[static_cast<std::size_t>(k)];
    if (p > power[static_cast<std::size_t>(k - 1)] &&
        p >= power[static_cast<std::size_t>(k + 1)]) {
      peaks.emplace_back(df * static_cast<double>(k), p);
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<int>(peaks.size()) > max_peaks) {
    peaks.resize(static_cast<std::size_t>(max_peaks));
  }
  return peaks;
}

}  // namespace crsim
