// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/tls.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crsim/fit.hpp"

namespace crsim {

namespace {

constexpr int kMinFitPoints = 25;
constexpr int kMinRevivalPoints = 20;
/// A second spectral line is treated as real only above this fraction of the
/// strongest line's power; rectangular-window sidelobes sit near 5%.
constexpr double kSecondPeakPower = 0.1;

void check_delay_grid(const std::vector<double>& delays, const char* what) {
  require(!delays.empty(), std::string(what) + ": need at least one delay");
  double prev = -1.0;
  for (double t : delays) {
    require(t >= 0.0 && t > prev, std::string(what) + ": delays must be increasing and >= 0");
    prev = t;
  }
}

void check_basis(const std::string& basis, const char* what) {
  require(basis.size() == 1 && (basis[0] == 'X' || basis[0] == 'Y' || basis[0] == 'Z'),
          std::string(what) + ": basis must be one of X, Y, Z");
}

double two_cosine_model(const RealVector& p, double t) {
  return (p[0] * std::cos(kTwoPi * p[2] * t) + p[1] * std::cos(kTwoPi * p[3] * t)) *
         std::exp(-p[4] * t);
}

/// Decay rate to a strictly positive coherence time (a non-decaying fit maps
/// to a large finite ceiling rather than infinity).
double rate_to_t2(double g) { return 1.0 / std::max(g, 1e-7); }

}  // namespace

void DelayDataset::validate() const {
  check_delay_grid(delays, "DelayDataset");
  check_basis(basis, "DelayDataset");
  require(values.rows() >= 1, "DelayDataset: need at least one repetition");
  require(values.cols() == static_cast<Eigen::Index>(delays.size()),
          "DelayDataset: value columns must match the delay grid");
  require(epochs.size() == static_cast<std::size_t>(values.rows()),
          "DelayDataset: one epoch per repetition");
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      require(values(r, c) >= -1.0 - 1e-9 && values(r, c) <= 1.0 + 1e-9,
              "DelayDataset: values must lie in [-1, 1]");
    }
  }
}

DelayDataset run_delay_scan(MeasurementProvider& provider, int qubit,
                            const std::string& basis, const std::vector<double>& delays,
                            int shots, int repetitions) {
  check_delay_grid(delays, "run_delay_scan");
  check_basis(basis, "run_delay_scan");
  require(repetitions >= 1, "run_delay_scan: repetitions must be >= 1");

  DelayDataset data;
  data.qubit = qubit;
  data.basis = basis;
  data.delays = delays;
  data.shots = shots;

  std::vector<RealVector> rows;
  rows.reserve(static_cast<std::size_t>(repetitions));
  for (int rep = 0; rep < repetitions; ++rep) {
    ExperimentSpec spec;
    spec.register_qubits = {qubit};
    spec.prep = "+";
    spec.basis = basis;
    spec.shots = shots;
    // Epoch r + 1: each repetition sees its own draw of any respawn-ranged
    // defect parameters (epoch 0 would pin the base values).
    spec.tls_epoch = rep + 1;
    try {
      const auto records = provider.run_series(spec, delays);
      RealVector row(static_cast<Eigen::Index>(delays.size()));
      for (std::size_t j = 0; j < delays.size(); ++j) {
        row[static_cast<Eigen::Index>(j)] = records[j].expectation(basis);
      }
      rows.push_back(std::move(row));
      data.epochs.push_back(spec.tls_epoch);
    } catch (const std::exception& err) {
      if (rows.empty()) throw;  // nothing acquired: not a partial dataset
      data.warnings.push_back("repetition " + std::to_string(rep + 1) + " failed (" +
                              err.what() + "); dataset truncated to " +
                              std::to_string(rows.size()) + " repetitions");
      break;
    }
  }

  data.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(delays.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    data.values.row(static_cast<Eigen::Index>(r)) = rows[r];
  }
  data.validate();
  return data;
}

TwoCosineFit fit_two_cosine(const std::vector<double>& delays,
                            const std::vector<double>& values) {
  check_delay_grid(delays, "fit_two_cosine");
  require(delays.size() == values.size(), "fit_two_cosine: delays and values differ in length");
  require(delays.size() >= kMinFitPoints, "fit_two_cosine: need at least 25 points");

  const double span = delays.back() - delays.front();
  const auto peaks = spectral_peaks(delays, values, 4);
  const bool two_lines =
      peaks.size() >= 2 && peaks[1].second >= kSecondPeakPower * peaks[0].second;

  TwoCosineFit fit;
  if (two_lines) {
    const double fa = std::min(peaks[0].first, peaks[1].first);
    const double fb = std::max(peaks[0].first, peaks[1].first);
    const ResidualFn residuals = [&](const RealVector& p) {
      RealVector r(static_cast<Eigen::Index>(delays.size()));
      for (std::size_t i = 0; i < delays.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = two_cosine_model(p, delays[i]) - values[i];
      }
      return r;
    };
    // Weight-swapped local minima are the trap with close frequencies; start
    // from both assignments plus an even split, at two decay guesses.
    std::vector<RealVector> starts;
    for (double c0 : {0.5, 0.7, 0.3}) {
      for (double g : {1.0 / span, 0.3 / span}) {
        RealVector p(5);
        p << c0, 1.0 - c0, fa, fb, g;
        starts.push_back(p);
      }
    }
    const LmResult best = multi_start_fit(residuals, starts);
    fit.c0 = best.params[0];
    fit.c1 = best.params[1];
    fit.f0 = std::abs(best.params[2]);
    fit.f1 = std::abs(best.params[3]);
    fit.t2star = rate_to_t2(best.params[4]);
    fit.residual = best.rms;
    if (fit.f0 > fit.f1) {
      std::swap(fit.f0, fit.f1);
      std::swap(fit.c0, fit.c1);
    }
    if ((fit.f1 - fit.f0) * span < 2.0) {
      fit.warnings.push_back("frequency split below the resolution of the scan window");
    }
  } else {
    // One usable line: fit a single damped cosine and mark f1 unresolved.
    const double f_hat = peaks.empty() ? 0.25 / std::max(span, 1e-9) : peaks[0].first;
    const ResidualFn residuals = [&](const RealVector& p) {
      RealVector r(static_cast<Eigen::Index>(delays.size()));
      for (std::size_t i = 0; i < delays.size(); ++i) {
        const double m = p[0] * std::cos(kTwoPi * p[1] * delays[i]) * std::exp(-p[2] * delays[i]);
        r[static_cast<Eigen::Index>(i)] = m - values[i];
      }
      return r;
    };
    std::vector<RealVector> starts;
    for (double scale : {1.0, 0.5, 2.0}) {
      for (double g : {1.0 / span, 0.3 / span}) {
        RealVector p(3);
        p << 1.0, f_hat * scale, g;
        starts.push_back(p);
      }
    }
    const LmResult best = multi_start_fit(residuals, starts);
    fit.c0 = best.params[0];
    fit.c1 = 0.0;
    fit.f0 = std::abs(best.params[1]);
    fit.f1 = fit.f0;
    fit.t2star = rate_to_t2(best.params[2]);
    fit.residual = best.rms;
    fit.f1_unresolved = true;
    fit.warnings.push_back("single spectral line; second frequency unresolved");
  }

  const double weight_sum = fit.c0 + fit.c1;
  if (weight_sum < 0.8 || weight_sum > 1.2) {
    fit.weight_sum_flagged = true;
    fit.warnings.push_back("weights sum far from 1; series does not start near full contrast");
  }
  if (fit.residual > kPoorFitResidual) {
    fit.poor_fit = true;
    fit.warnings.push_back("residual above threshold; data not reproduced by two cosines");
  }
  return fit;
}

TwoCosineFit fit_two_cosine(const DelayDataset& dataset, int repetition) {
  dataset.validate();
  require(repetition >= 0 && repetition < dataset.repetitions(),
          "fit_two_cosine: repetition out of range");
  const Eigen::Index r = repetition;
  std::vector<double> values(dataset.delays.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = dataset.values(r, static_cast<Eigen::Index>(j));
  }
  return fit_two_cosine(dataset.delays, values);
}

std::vector<PurityPoint> purity_scan(MeasurementProvider& provider, int qubit,
                                     const std::vector<double>& delays, int shots) {
  check_delay_grid(delays, "purity_scan");

  // Three sessions, one per tomography basis, all at base drift epoch so the
  // reconstruction sees one consistent environment.
  std::array<std::vector<double>, 3> components;
  const char bases[3] = {'X', 'Y', 'Z'};
  for (int b = 0; b < 3; ++b) {
    ExperimentSpec spec;
    spec.register_qubits = {qubit};
    spec.prep = "+";
    spec.basis = std::string(1, bases[b]);
    spec.shots = shots;
    const auto records = provider.run_series(spec, delays);
    components[static_cast<std::size_t>(b)].reserve(delays.size());
    for (const auto& rec : records) {
      components[static_cast<std::size_t>(b)].push_back(rec.expectation(spec.basis));
    }
  }

  std::vector<PurityPoint> out;
  out.reserve(delays.size());
  for (std::size_t j = 0; j < delays.size(); ++j) {
    const double x = components[0][j], y = components[1][j], z = components[2][j];
    // Clip to the unit ball: shot noise can push the reconstructed vector
    // outside; rescaling onto the sphere only ever shrinks |r|.
    const double norm2 = std::min(x * x + y * y + z * z, 1.0);
    PurityPoint p;
    p.delay = delays[j];
    p.purity = 0.5 * (1.0 + norm2);
    out.push_back(p);
  }
  return out;
}

std::vector<Revival> detect_revivals(const std::vector<double>& times,
                                     const std::vector<double>& purities,
                                     double min_prominence) {
  require(times.size() == purities.size(), "detect_revivals: times and values differ in length");
  require(times.size() >= kMinRevivalPoints, "detect_revivals: need at least 20 points");
  check_delay_grid(times, "detect_revivals");

  const std::size_t n = purities.size();
  // First local minimum: revivals only count after the initial collapse.
  std::size_t first_min = n;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (purities[i] <= purities[i - 1] && purities[i] < purities[i + 1]) {
      first_min = i;
      break;
    }
  }
  std::vector<Revival> out;
  if (first_min == n) return out;

  for (std::size_t i = first_min + 1; i + 1 < n; ++i) {
    if (!(purities[i] >= purities[i - 1] && purities[i] > purities[i + 1])) continue;
    // Prominence: drop to the lowest point on each side before the series
    // climbs above the peak again (or ends); the higher saddle limits it.
    double left = purities[i];
    for (std::size_t j = i; j-- > 0;) {
      left = std::min(left, purities[j]);
      if (purities[j] > purities[i]) break;
    }
    double right = purities[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      right = std::min(right, purities[j]);
      if (purities[j] > purities[i]) break;
    }
    const double prominence = purities[i] - std::max(left, right);
    if (prominence >= min_prominence) {
      Revival r;
      r.time = times[i];
      r.prominence = prominence;
      out.push_back(r);
    }
  }
  return out;  // scan order is time order
}

std::vector<Revival> detect_revivals(const std::vector<PurityPoint>& series,
                                     double min_prominence) {
  std::vector<double> times, purities;
  times.reserve(series.size());
  purities.reserve(series.size());
  for (const auto& p : series) {
    times.push_back(p.delay);
    purities.push_back(p.purity);
  }
  return detect_revivals(times, purities, min_prominence);
}

EnsembleStats ensemble_statistics(const DelayDataset& dataset) {
  dataset.validate();
  require(dataset.repetitions() >= 2, "ensemble_statistics: need at least 2 repetitions");

  EnsembleStats stats;
  const Eigen::Index cols = dataset.values.cols();
  stats.mean.resize(static_cast<std::size_t>(cols));
  stats.lo.resize(static_cast<std::size_t>(cols));
  stats.hi.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto col = dataset.values.col(c);
    stats.mean[static_cast<std::size_t>(c)] = col.mean();
    stats.lo[static_cast<std::size_t>(c)] = col.minCoeff();
    stats.hi[static_cast<std::size_t>(c)] = col.maxCoeff();
  }

  if (dataset.delays.size() >= kMinFitPoints) {
    stats.fits.reserve(static_cast<std::size_t>(dataset.repetitions()));
    double f0_min = 0.0, f0_max = 0.0;
    for (int r = 0; r < dataset.repetitions(); ++r) {
      stats.fits.push_back(fit_two_cosine(dataset, r));
      const double f0 = stats.fits.back().f0;
      if (r == 0) {
        f0_min = f0_max = f0;
      } else {
        f0_min = std::min(f0_min, f0);
        f0_max = std::max(f0_max, f0);
      }
    }
    stats.f0_spread = f0_max - f0_min;
    stats.unstable = stats.f0_spread > kUnstableSpread;
  }
  return stats;
}

}  // namespace crsim
