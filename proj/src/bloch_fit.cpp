// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crsim/fit.hpp"
#include "crsim/ham_tomo.hpp"

namespace crsim {

namespace {

constexpr double kUnreliableResidual = 0.15;
constexpr double kMinPeriods = 1.5;

/// Bloch vector at time t from (0,0,1) under omega_x X + omega_y Y + delta Z
/// (bare-Pauli rates; precession frequency 2|omega|) with envelope
/// exp(-decay t).
void bloch_model(double wx, double wy, double dz, double decay, double t, double* out_xyz) {
  const double f_r = std::sqrt(wx * wx + wy * wy + dz * dz);
  const double env = std::exp(-decay * t);
  if (f_r < 1e-14) {
    out_xyz[0] = 0.0;
    out_xyz[1] = 0.0;
    out_xyz[2] = env;
    return;
  }
  const double nx = wx / f_r, ny = wy / f_r, nz = dz / f_r;
  const double theta = kTwoPi * 2.0 * f_r * t;
  const double c = std::cos(theta), s = std::sin(theta);
  out_xyz[0] = env * (s * ny + (1.0 - c) * nz * nx);
  out_xyz[1] = env * (-s * nx + (1.0 - c) * nz * ny);
  out_xyz[2] = env * (c + (1.0 - c) * nz * nz);
}

void check_series(const RabiSeries& s, const char* what) {
  require(s.times.size() == s.values.size(),
          std::string(what) + ": times and values differ in length");
  require(s.times.size() >= 12, std::string(what) + ": need at least 12 points");
  for (double v : s.values) {
    require(v >= -1.0 - 1e-9 && v <= 1.0 + 1e-9,
            std::string(what) + ": values must lie in [-1, 1]");
  }
  double prev = -1.0;
  for (double t : s.times) {
    require(t >= 0.0 && t > prev, std::string(what) + ": times must be increasing and >= 0");
    prev = t;
  }
}

/// Strongest spectral peak, or a slow default when the data is flat.
double dominant_frequency(const std::vector<double>& times, const std::vector<double>& values) {
  const auto peaks = spectral_peaks(times, values, 1);
  if (!peaks.empty()) return peaks[0].first;
  const double span = times.back() - times.front();
  return 0.25 / std::max(span, 1e-9);
}

}  // namespace

BlochFit fit_bloch(const RabiSeries& x, const RabiSeries& y, const RabiSeries& z) {
  check_series(x, "fit_bloch(X)");
  check_series(y, "fit_bloch(Y)");
  check_series(z, "fit_bloch(Z)");
  require(x.times == y.times && y.times == z.times,
          "fit_bloch: the three series must share one time grid");

  const auto& times = x.times;
  const double span = times.back() - times.front();
  const ResidualFn residuals = [&](const RealVector& p) {
    RealVector r(static_cast<Eigen::Index>(3 * times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
      double m[3];
      bloch_model(p[0], p[1], p[2], p[3], times[i], m);
      r[static_cast<Eigen::Index>(3 * i + 0)] = m[0] - x.values[i];
      r[static_cast<Eigen::Index>(3 * i + 1)] = m[1] - y.values[i];
      r[static_cast<Eigen::Index>(3 * i + 2)] = m[2] - z.values[i];
    }
    return r;
  };

  // The precession frequency is 2|omega|; seed |omega| from the strongest
  // Z-spectrum peak (falling back to X) and scan deterministic axis splits.
  const auto z_peaks = spectral_peaks(times, z.values, 1);
  const double f_hat =
      0.5 * (z_peaks.empty() ? dominant_frequency(times, x.values) : z_peaks[0].first);
  const double g0 = 0.25 / span;
  // Axis splits (unit vectors scaled by f_hat): transverse-dominant and
  // mixed, both signs where the data distinguishes them.
  static const double kSplits[][3] = {
      {1, 0, 0},        {-1, 0, 0},     {0, 1, 0},      {0, -1, 0},
      {0.7, 0, 0.7},    {0.7, 0, -0.7}, {-0.7, 0, 0.7}, {0.7, 0.7, 0},
      {0.7, -0.7, 0},   {0.6, 0.3, -0.3},
  };
  std::vector<RealVector> starts;
  for (const auto& s : kSplits) {
    RealVector p(4);
    p << f_hat * s[0], f_hat * s[1], f_hat * s[2], g0;
    starts.push_back(p);
  }
  LmResult best = multi_start_fit(residuals, starts);

  auto rms_of = [&](const LmResult& r) { return r.rms; };
  if (rms_of(best) > kUnreliableResidual) {
    // Restart ladder: rescaled frequency guesses around the spectral seed.
    std::vector<RealVector> retry;
    for (double scale : {0.5, 0.75, 1.25, 1.5, 2.0}) {
      RealVector p(4);
      p << f_hat * scale, 0.0, 0.0, g0;
      retry.push_back(p);
    }
    const LmResult second = multi_start_fit(residuals, retry);
    if (second.sse < best.sse) best = second;
  }

  BlochFit fit;
  fit.omega_x = best.params[0];
  fit.omega_y = best.params[1];
  fit.delta = best.params[2];
  fit.decay = best.params[3];
  fit.residual = best.rms;
  fit.unreliable = fit.residual > kUnreliableResidual;
  const double f_prec =
      2.0 * std::sqrt(fit.omega_x * fit.omega_x + fit.omega_y * fit.omega_y + fit.delta * fit.delta);
  fit.under_resolved = f_prec * span < kMinPeriods;
  return fit;
}

RateTable combine_rates(const BlochFit& fit_control0, const BlochFit& fit_control1) {
  RateTable rates(2);
  rates.set("IX", 0.5 * (fit_control0.omega_x + fit_control1.omega_x));
  rates.set("ZX", 0.5 * (fit_control0.omega_x - fit_control1.omega_x));
  rates.set("IY", 0.5 * (fit_control0.omega_y + fit_control1.omega_y));
  rates.set("ZY", 0.5 * (fit_control0.omega_y - fit_control1.omega_y));
  rates.set("IZ", 0.5 * (fit_control0.delta + fit_control1.delta));
  rates.set("ZZ", 0.5 * (fit_control0.delta - fit_control1.delta));
  return rates;
}

}  // namespace crsim
