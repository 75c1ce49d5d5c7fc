// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Defect analysis: idle-delay scans against the pulse simulator, the damped
// two-cosine beating fit, purity collapse-and-revival detection, and
// repetition ensembles under respawning defect parameters.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsim/provider.hpp"
#include "crsim/tls.hpp"

using namespace crsim;

namespace {

std::vector<double> linspace(double t0, double t1, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    t[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (n - 1);
  }
  return t;
}

/// Damped multi-cosine sum_k c_k cos(2 pi f_k t) exp(-t / t2).
double beat_model(const std::vector<double>& c, const std::vector<double>& f, double t2,
                  double t) {
  double v = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * std::cos(kTwoPi * f[k] * t);
  return v * std::exp(-t / t2);
}

/// Binomial estimate of a two-outcome expectation at `shots` samples
/// (shots <= 0 returns the exact value).
double sampled(double value, int shots, std::mt19937_64& rng) {
  if (shots <= 0) return value;
  const double p = 0.5 * (1.0 + std::clamp(value, -1.0, 1.0));
  std::binomial_distribution<int> dist(shots, p);
  return 2.0 * dist(rng) / shots - 1.0;
}

std::vector<double> synthetic_series(const std::vector<double>& times,
                                     const std::vector<double>& c,
                                     const std::vector<double>& f, double t2, int shots,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(sampled(beat_model(c, f, t2, t), shots, rng));
  return out;
}

/// Single-qubit device with one dispersively coupled defect. The idle qubit
/// precesses at |detuning +- chi| depending on the defect state, weighted by
/// the defect populations (1 - p_excited, p_excited).
DeviceConfig one_tls_device(double chi, double p_excited, double detuning, double t1,
                            double t2) {
  DeviceConfig cfg;
  cfg.n = 1;
  cfg.omega = {5000.0};
  cfg.alpha = {-330.0};
  cfg.frame_detuning = {detuning};
  cfg.t1 = {t1};
  cfg.t2 = {t2};
  TlsSpec tls;
  tls.qubit = 0;
  tls.chi = chi;
  tls.p_excited = p_excited;
  cfg.tls.push_back(tls);
  return cfg;
}

/// Oscillation power robust against slow drift: variance of the first
/// differences (differencing kills trends, keeps oscillating structure).
/// `from` restricts the window to indices >= from.
double diff_power(const std::vector<double>& v, std::size_t from = 0) {
  require(v.size() >= from + 2, "diff_power: need at least two points");
  std::vector<double> d(v.size() - 1 - from);
  for (std::size_t i = from; i + 1 < v.size(); ++i) d[i - from] = v[i + 1] - v[i];
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  return var / static_cast<double>(d.size());
}

std::vector<double> dataset_row(const DelayDataset& data, int rep) {
  std::vector<double> row(data.delays.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = data.values(rep, static_cast<Eigen::Index>(j));
  }
  return row;
}

/// Provider that serves synthetic exponential-decay records until a
/// configured number of sessions, then fails (models a backend dropout).
class FlakyProvider : public MeasurementProvider {
 public:
  explicit FlakyProvider(int sessions_before_failure)
      : budget_(sessions_before_failure) {}

  int n_qubits() const override { return 1; }

 protected:
  std::vector<MeasurementRecord> execute(const ExperimentSpec& spec,
                                         const std::vector<double>& times) override {
    if (sessions() > budget_) throw std::runtime_error("backend offline");
    std::vector<MeasurementRecord> records;
    records.reserve(times.size());
    for (double t : times) {
      const double v = std::exp(-t / 10.0);
      MeasurementRecord rec;
      rec.n_qubits = static_cast<int>(spec.register_qubits.size());
      rec.shots = 1.0;
      rec.weights = {0.5 * (1.0 + v), 0.5 * (1.0 - v)};
      records.push_back(std::move(rec));
    }
    return records;
  }

 private:
  int budget_;
};

}  // namespace

TEST_CASE("two-cosine fit recovers the reference beating parameters from sampled data") {
  // Ramsey-style beating with a near-equal weight split and a 0.06 MHz
  // frequency separation: the weight-swapping hard case.
  const auto times = linspace(0.0, 40.0, 81);
  const std::vector<double> weights = {0.48, 0.51};
  const std::vector<double> freqs = {0.18, 0.24};
  const double t2 = 20.2;

  for (std::uint64_t seed : {11u, 29u, 83u}) {
    CAPTURE(seed);
    const auto values = synthetic_series(times, weights, freqs, t2, 1024, seed);
    const auto fit = fit_two_cosine(times, values);
    CHECK(!fit.f1_unresolved);
    CHECK(!fit.weight_sum_flagged);
    CHECK(!fit.poor_fit);
    CHECK(fit.f0 <= fit.f1);
    CHECK(std::abs(fit.f0 - 0.18) < 0.01);
    CHECK(std::abs(fit.f1 - 0.24) < 0.01);
    CHECK(std::abs(fit.t2star - t2) < 0.1 * t2);
    CHECK(std::abs(fit.c0 - 0.48) < 0.1);
    CHECK(std::abs(fit.c1 - 0.51) < 0.1);
    CHECK(fit.residual > 0.0);
  }
}

TEST_CASE("noiseless single cosine is recovered exactly and flags the missing line") {
  const auto times = linspace(0.0, 40.0, 81);
  const auto values = synthetic_series(times, {1.0}, {0.2}, 15.0, 0, 0);
  const auto fit = fit_two_cosine(times, values);
  CHECK(fit.f1_unresolved);
  CHECK(fit.c1 == 0.0);
  CHECK(fit.f1 == fit.f0);
  CHECK(std::abs(fit.f0 - 0.2) < 1e-6);
  CHECK(std::abs(fit.c0 - 1.0) < 1e-6);
  CHECK(std::abs(fit.t2star - 15.0) < 0.01);
  CHECK(fit.residual < 1e-8);
  CHECK(!fit.poor_fit);
}

TEST_CASE("pure decay degenerates to a zero-frequency cosine") {
  const auto times = linspace(0.0, 40.0, 81);
  std::vector<double> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(std::exp(-t / 12.0));
  const auto fit = fit_two_cosine(times, values);
  CHECK(fit.f0 < 0.02);
  CHECK(std::abs(fit.t2star - 12.0) < 1.2);
  CHECK(std::abs(fit.c0 + fit.c1 - 1.0) < 0.05);
  CHECK(!fit.poor_fit);
}

TEST_CASE("three defects cannot be reproduced by the two-cosine model") {
  // Three couplings produce 2^3 = 8 spectral lines at detuning +- chi_1 +-
  // chi_2 +- chi_3; a five-parameter two-line model cannot absorb them.
  const double detuning = 0.21;
  const double chis[3] = {0.03, 0.05, 0.08};
  std::vector<double> freqs, weights;
  for (int s = 0; s < 8; ++s) {
    double f = detuning;
    for (int k = 0; k < 3; ++k) f += ((s >> k) & 1 ? chis[k] : -chis[k]);
    freqs.push_back(f);
    weights.push_back(1.0 / 8.0);
  }
  const auto times = linspace(0.0, 40.0, 81);
  const auto values = synthetic_series(times, weights, freqs, 25.0, 0, 0);
  const auto fit = fit_two_cosine(times, values);
  CHECK(fit.poor_fit);
  CHECK(fit.residual > kPoorFitResidual);
}

TEST_CASE("fit_two_cosine validates its inputs") {
  const auto times = linspace(0.0, 10.0, 24);  // one short of the minimum
  std::vector<double> values(times.size(), 0.5);
  CHECK_THROWS_AS(fit_two_cosine(times, values), std::invalid_argument);
  auto times_ok = linspace(0.0, 10.0, 30);
  std::vector<double> too_few(29, 0.5);
  CHECK_THROWS_AS(fit_two_cosine(times_ok, too_few), std::invalid_argument);
}

TEST_CASE("delay scan on a one-defect device beats at the analytic frequencies") {
  // chi = 0.03 and detuning 0.21 put the conditional precession lines at
  // 0.18 and 0.24 MHz with weights (p_excited, 1 - p_excited).
  const auto cfg = one_tls_device(0.03, 0.48, 0.21, 1e5, 20.2);
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 40.0, 81);
  const auto data = run_delay_scan(provider, 0, "X", delays, 0, 1);

  CHECK(data.repetitions() == 1);
  CHECK(data.epochs == std::vector<int>{1});
  CHECK(data.warnings.empty());
  CHECK(data.values(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

  // Forward model vs fit closes the loop on the injected parameters.
  const auto fit = fit_two_cosine(data);
  CHECK(!fit.f1_unresolved);
  CHECK(std::abs(fit.f0 - 0.18) < 1e-3);
  CHECK(std::abs(fit.f1 - 0.24) < 1e-3);
  CHECK(std::abs(fit.c0 - 0.48) < 1e-3);
  CHECK(std::abs(fit.c1 - 0.52) < 1e-3);
  CHECK(std::abs(fit.t2star - 20.2) < 0.2);
  CHECK(fit.residual < 1e-6);
}

TEST_CASE("Z-basis scan drifts monotonically with no oscillation") {
  // The defect coupling commutes with Z, so the beating lives entirely in
  // the equatorial components; <Z> only relaxes toward the ground state.
  const auto cfg = one_tls_device(0.03, 0.48, 0.21, 120.0, 20.2);
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 40.0, 81);
  const auto x_scan = run_delay_scan(provider, 0, "X", delays, 0, 1);
  const auto z_scan = run_delay_scan(provider, 0, "Z", delays, 0, 1);

  const auto x_row = dataset_row(x_scan, 0);
  const auto z_row = dataset_row(z_scan, 0);
  for (std::size_t j = 0; j + 1 < z_row.size(); ++j) {
    CHECK(z_row[j + 1] >= z_row[j] - 1e-9);  // monotone drift toward |0>
  }
  CHECK(diff_power(z_row) < 0.05 * diff_power(x_row));
}

TEST_CASE("purity collapses and revives at multiples of the inverse frequency split") {
  // Equal defect populations give full collapse: |r|(t) tracks
  // exp(-t/T2) |cos(2 pi chi t)| with revivals at k / (2 chi) = k / delta-f.
  const double chi = 0.03, t2 = 40.0;
  const auto cfg = one_tls_device(chi, 0.5, 0.21, 1e5, t2);
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 45.0, 61);
  const auto series = purity_scan(provider, 0, delays, 0);

  REQUIRE(series.size() == delays.size());
  CHECK(series.front().purity == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& p : series) {
    CHECK(p.purity >= 0.5 - 1e-9);
    CHECK(p.purity <= 1.0 + 1e-9);
    // Analytic dephasing-revival oracle for the Z x Z coupling.
    const double r = std::exp(-p.delay / t2) * std::cos(kTwoPi * chi * p.delay);
    CHECK(std::abs(p.purity - 0.5 * (1.0 + r * r)) < 1e-6);
  }

  const double delta_f = 2.0 * chi;
  const auto revivals = detect_revivals(series);
  REQUIRE(revivals.size() >= 2);
  CHECK(std::abs(revivals[0].time - 1.0 / delta_f) < 0.15 / delta_f);
  CHECK(std::abs(revivals[1].time - 2.0 / delta_f) < 0.15 * 2.0 / delta_f);
  CHECK(revivals[0].prominence > revivals[1].prominence);
  CHECK(revivals[1].prominence >= 0.02);
}

TEST_CASE("classical dephasing shows no revival") {
  DeviceConfig cfg;
  cfg.n = 1;
  cfg.omega = {5000.0};
  cfg.alpha = {-330.0};
  cfg.frame_detuning = {0.21};
  cfg.t1 = {1e5};
  cfg.t2 = {20.0};
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 45.0, 61);
  const auto series = purity_scan(provider, 0, delays, 0);
  for (std::size_t j = 0; j + 1 < series.size(); ++j) {
    CHECK(series[j + 1].purity <= series[j].purity + 1e-9);
  }
  CHECK(detect_revivals(series).empty());
}

TEST_CASE("sampled purity stays within the reconstruction bounds") {
  auto cfg = one_tls_device(0.03, 0.5, 0.21, 1e5, 40.0);
  cfg.readout_flip = {0.01};
  SimulatorProvider provider(cfg, 17);
  const auto delays = linspace(0.0, 45.0, 31);
  const auto series = purity_scan(provider, 0, delays, 1024);
  for (const auto& p : series) {
    CHECK(p.purity >= 0.5);  // clipping keeps the vector inside the ball
    CHECK(p.purity <= 1.0);
  }
  // t = 0: pure |+> minus the readout-flip bias on the X component.
  CHECK(series.front().purity > 0.93);
  CHECK(series.front().purity < 1.0 + 1e-12);
}

TEST_CASE("revival detection obeys its prominence threshold") {
  const auto times = linspace(0.0, 30.0, 61);

  SUBCASE("monotone decay yields nothing") {
    std::vector<double> purity;
    for (double t : times) purity.push_back(0.5 + 0.5 * std::exp(-t / 8.0));
    CHECK(detect_revivals(times, purity).empty());
  }
  SUBCASE("sub-threshold ripple is ignored, real bumps are kept") {
    std::vector<double> small, large;
    for (double t : times) {
      small.push_back(0.6 + 0.008 * std::cos(kTwoPi * t / 10.0));
      large.push_back(0.6 + 0.030 * std::cos(kTwoPi * t / 10.0));
    }
    CHECK(detect_revivals(times, small).empty());
    const auto found = detect_revivals(times, large);
    CHECK(found.size() == 2);  // interior maxima near t = 10 and 20
    CHECK(detect_revivals(times, large, 0.08).empty());
  }
  SUBCASE("input validation") {
    std::vector<double> short_times = linspace(0.0, 5.0, 10);
    std::vector<double> short_purity(10, 0.7);
    CHECK_THROWS_AS(detect_revivals(short_times, short_purity), std::invalid_argument);
    std::vector<double> mismatched(60, 0.7);
    CHECK_THROWS_AS(detect_revivals(times, mismatched), std::invalid_argument);
  }
}

TEST_CASE("provider dropout yields a partial dataset after the first repetition") {
  FlakyProvider provider(2);
  const auto delays = linspace(0.0, 20.0, 30);
  const auto data = run_delay_scan(provider, 0, "X", delays, 0, 5);
  CHECK(data.repetitions() == 2);
  CHECK(data.epochs == std::vector<int>{1, 2});
  REQUIRE(data.warnings.size() == 1);
  CHECK(data.warnings[0].find("repetition 3") != std::string::npos);
  CHECK(data.warnings[0].find("backend offline") != std::string::npos);

  FlakyProvider dead(0);
  CHECK_THROWS_AS(run_delay_scan(dead, 0, "X", delays, 0, 3), std::runtime_error);
}

TEST_CASE("identical repetitions give a zero-width envelope") {
  const auto cfg = one_tls_device(0.03, 0.48, 0.21, 1e5, 20.2);
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 40.0, 81);
  // Exact expectations and no respawn ranges: every epoch sees the same
  // environment, so the repetitions coincide.
  const auto data = run_delay_scan(provider, 0, "X", delays, 0, 3);
  const auto stats = ensemble_statistics(data);
  for (std::size_t j = 0; j < stats.mean.size(); ++j) {
    CHECK(stats.hi[j] - stats.lo[j] < 1e-12);
    CHECK(std::abs(stats.mean[j] - stats.lo[j]) < 1e-12);
  }
  REQUIRE(stats.fits.size() == 3);
  CHECK(stats.f0_spread < 1e-9);
  CHECK(!stats.unstable);
}

TEST_CASE("respawning defect parameters drift the ensemble and flag instability") {
  auto cfg = one_tls_device(0.03, 0.48, 0.21, 1e5, 20.2);
  // Split 2 chi stays above the window's spectral resolution (2 / 40 us)
  // for every draw, so each repetition fits both lines cleanly.
  cfg.tls[0].chi_respawn = RespawnRange{0.025, 0.045};
  cfg.tls[0].p_excited_respawn = RespawnRange{0.3, 0.6};
  SimulatorProvider provider(cfg, 23);
  const auto delays = linspace(0.0, 40.0, 81);
  const auto data = run_delay_scan(provider, 0, "X", delays, 0, 30);
  REQUIRE(data.repetitions() == 30);

  const auto stats = ensemble_statistics(data);
  REQUIRE(stats.fits.size() == 30);
  CHECK(stats.f0_spread > kUnstableSpread);
  CHECK(stats.unstable);

  // The envelope is wide where repetitions decohere apart...
  double widest = 0.0;
  for (std::size_t j = 0; j < stats.mean.size(); ++j) {
    widest = std::max(widest, stats.hi[j] - stats.lo[j]);
  }
  CHECK(widest > 0.2);

  // ...and averaging over drifting frequencies washes the beating out of the
  // mean curve. The ensemble phases spread linearly in time, so compare over
  // the later half of the window, where repetitions have decohered apart;
  // early beats are still phase-coherent across repetitions by construction.
  const std::size_t tail = delays.size() / 2;
  double rep_power = 0.0;
  for (int r = 0; r < data.repetitions(); ++r) {
    rep_power += diff_power(dataset_row(data, r), tail);
  }
  rep_power /= data.repetitions();
  CHECK(diff_power(stats.mean, tail) < 0.5 * rep_power);
}

TEST_CASE("ensemble statistics require at least two repetitions") {
  const auto cfg = one_tls_device(0.03, 0.48, 0.21, 1e5, 20.2);
  SimulatorProvider provider(cfg, 11);
  const auto delays = linspace(0.0, 40.0, 81);
  const auto data = run_delay_scan(provider, 0, "X", delays, 0, 1);
  CHECK_THROWS_AS(ensemble_statistics(data), std::invalid_argument);
}

TEST_CASE("delay scans are deterministic in the master seed") {
  const auto cfg = one_tls_device(0.03, 0.48, 0.21, 1e5, 20.2);
  const auto delays = linspace(0.0, 30.0, 41);

  SimulatorProvider a(cfg, 7);
  SimulatorProvider b(cfg, 7);
  SimulatorProvider c(cfg, 8);
  const auto da = run_delay_scan(a, 0, "X", delays, 1024, 2);
  const auto db = run_delay_scan(b, 0, "X", delays, 1024, 2);
  const auto dc = run_delay_scan(c, 0, "X", delays, 1024, 2);

  CHECK((da.values - db.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((da.values - dc.values).cwiseAbs().maxCoeff() > 0.0);
}
