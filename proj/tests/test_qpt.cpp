// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Process tomography: chi reconstruction against analytic channels,
// dominant-unitary extraction, principal-branch generator recovery,
// duration-consistency resolution, and the three-qubit additivity suite.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "crsim/ham_tomo.hpp"
#include "crsim/linalg.hpp"
#include "crsim/pauli.hpp"
#include "crsim/provider.hpp"
#include "crsim/qpt.hpp"
#include "crsim/sampling.hpp"
#include "support.hpp"

using namespace crsim;

namespace {

RateTable reference_table() {
  RateTable h(2);
  for (const auto& [label, rate] : testing::reference_rates()) h.set(label, rate);
  return h;
}

/// Random Hamiltonian over the cross-resonance label set, |rates| <= scale.
RateTable random_cr_table(Rng& rng, double scale) {
  RateTable h(2);
  for (const char* l : {"ZI", "ZX", "ZY", "ZZ", "IX", "IY", "IZ"}) {
    h.set(l, rng.uniform(-scale, scale));
  }
  return h;
}

/// PTM of the n-qubit depolarizing channel of strength p.
RealMatrix depolarizing_ptm(int n, double p) {
  const int n_labels = 1 << (2 * n);
  RealMatrix ptm = RealMatrix::Zero(n_labels, n_labels);
  ptm(0, 0) = 1.0;
  for (int l = 1; l < n_labels; ++l) ptm(l, l) = 1.0 - p;
  return ptm;
}

/// Three-qubit chain with the reference coefficient rules on both edges.
DeviceConfig chain_device() {
  DeviceConfig cfg;
  cfg.n = 3;
  cfg.omega = {5000.0, 4900.0, 4800.0};
  cfg.alpha = {-330.0, -330.0, -330.0};
  cfg.coupling[{0, 1}] = testing::kReferenceJ;
  cfg.coupling[{1, 2}] = testing::kReferenceJ;
  cfg.cr_rules = testing::rules_for_reference(testing::kReferenceJ, testing::kReferenceOmega,
                                              testing::kReferencePhase);
  return cfg;
}

/// Chain whose drive generator has only Stark, conditional-X and direct-X
/// components, so the three-qubit simultaneous-drive generator has exactly
/// five labels.
DeviceConfig clean_chain_device() {
  DeviceConfig cfg = chain_device();
  CrRules rules;
  const double j = testing::kReferenceJ, omega = testing::kReferenceOmega;
  rules.k["ZI"] = 3.0810 / (omega * omega);
  rules.k["ZX"] = -0.4915 / (j * omega);
  rules.k["IX"] = 0.4168 / (j * omega);
  cfg.cr_rules = rules;
  return cfg;
}

}  // namespace

TEST_CASE("identity channel reconstructs as the rank-one identity projector") {
  RateTableProvider provider(RateTable(2), 3);
  const ChiMatrix chi = run_qpt(provider, {0, 1}, DriveProgram{}, 0.1, 0);
  CHECK(chi.lambda0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(chi.entries(0, 0) - 1.0) < 1e-8);
  CHECK(chi.entries.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(provider.sessions() == 16 * 9);
  CHECK(chi.condition < 1e3);
  CHECK(chi.warnings.empty());
}

TEST_CASE("exact tomography reproduces the analytic chi of the channel") {
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const RateTable h = random_cr_table(rng, 2.0);
    const double t = 0.13;
    RateTableProvider provider(h, 5);
    const ChiMatrix chi = run_qpt(provider, {0, 1}, DriveProgram{}, t, 0);
    const Matrix u_truth = expm_hermitian(h.to_matrix() * kTwoPi, t);
    const ChiMatrix analytic = chi_of_unitary(u_truth);
    CHECK((chi.entries - analytic.entries).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(chi.lambda0 >= 1.0 - 1e-8);
    CHECK(chi.lambda0 <= 1.0 + 1e-12);
    // Invariants of the stored form.
    CHECK(hermiticity_defect(chi.entries) < 1e-9);
    CHECK(std::abs(chi.entries.trace().real() - 1.0) < 1e-6);
  }
}

TEST_CASE("dominant_unitary inverts chi_of_unitary up to global phase") {
  Rng rng(77);
  const RateTable h = random_cr_table(rng, 1.5);
  const Matrix v = expm_hermitian(h.to_matrix() * kTwoPi, 0.21);
  const auto dom = dominant_unitary(chi_of_unitary(v));
  CHECK(dom.lambda0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!dom.degenerate);
  CHECK(std::abs((dom.u.adjoint() * v).trace()) / 4.0 == doctest::Approx(1.0).epsilon(1e-9));
  // The phase rule makes the identity coefficient real nonnegative.
  const cplx c0 = dom.u.trace() / 4.0;
  CHECK(c0.real() >= 0.0);
  CHECK(std::abs(c0.imag()) < 1e-9 * (1.0 + std::abs(c0.real())));
}

TEST_CASE("depolarizing channel: lambda0 value, composition, monotonicity") {
  for (const int n : {1, 2}) {
    for (const double p : {0.1, 0.3}) {
      const ChiMatrix chi = chi_from_ptm(depolarizing_ptm(n, p), n);
      const double expected = 1.0 - p + p / std::pow(4.0, n);
      CHECK(chi.lambda0 == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  // Composing with a unitary conjugates the Choi matrix, so lambda0 of
  // depolarizing-after-unitary equals lambda0 of depolarizing alone, and
  // decreases with the noise strength.
  Rng rng(11);
  const RateTable h = random_cr_table(rng, 1.0);
  const Matrix v = expm_hermitian(h.to_matrix() * kTwoPi, 0.17);
  const RealMatrix base = ptm_from_chi(chi_of_unitary(v));
  double previous = 1.1;
  for (const double p : {0.05, 0.1, 0.2}) {
    const RealMatrix composed = depolarizing_ptm(2, p) * base;
    const ChiMatrix chi = chi_from_ptm(composed, 2);
    const double expected = 1.0 - p + p / 16.0;
    CHECK(chi.lambda0 == doctest::Approx(expected).epsilon(1e-8));
    CHECK(chi.lambda0 < previous);
    previous = chi.lambda0;
  }
}

TEST_CASE("positive-cone projection clips, renormalizes, and is idempotent") {
  Rng rng(13);
  const RateTable h = random_cr_table(rng, 1.0);
  const Matrix v = expm_hermitian(h.to_matrix() * kTwoPi, 0.1);
  const Matrix chi_pos = chi_from_ptm(depolarizing_ptm(2, 0.2) * ptm_from_chi(chi_of_unitary(v)), 2).entries;

  SUBCASE("projection of a positive chi moves no eigenvalue by more than 1e-12") {
    const Matrix again = project_cp(chi_pos);
    Eigen::SelfAdjointEigenSolver<Matrix> before(chi_pos), after(again);
    CHECK((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("negative mass is clipped and reported") {
    const Matrix unit = chi_of_unitary(v).entries;
    Matrix raw = 1.1 * unit - 0.1 * Matrix::Identity(16, 16) / 16.0;
    std::vector<std::string> warnings;
    const Matrix projected = project_cp(raw, &warnings);
    CHECK(warnings.size() == 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(projected);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(std::abs(projected.trace().real() - 1.0) < 1e-12);
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fully depolarizing channel has a degenerate dominant eigenvalue") {
  const auto dom = dominant_unitary(chi_from_ptm(depolarizing_ptm(2, 1.0), 2));
  CHECK(dom.degenerate);
  CHECK(dom.lambda0 == doctest::Approx(1.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("effective_rates recovers the generator on the principal branch") {
  const RateTable h = reference_table();
  SUBCASE("short duration: every label within 1e-6") {
    const Matrix u = expm_hermitian(h.to_matrix() * kTwoPi, 0.05);
    const RateTable rates = effective_rates(u, 0.05);
    for (const auto& [label, truth] : testing::reference_rates()) {
      CHECK(std::abs(rates.get(label) - truth) < 1e-6);
    }
  }
  SUBCASE("identity gives an empty table") {
    CHECK(effective_rates(Matrix::Identity(4, 4), 0.3).raw().empty());
  }
  SUBCASE("beyond branch validity a commuting rate shifts by k/(2t)") {
    RateTable zi(2);
    zi.set("ZI", 3.0810);
    const Matrix u = expm_hermitian(zi.to_matrix() * kTwoPi, 0.2);
    const RateTable rates = effective_rates(u, 0.2);
    CHECK(rates.get("ZI") == doctest::Approx(3.0810 - 2.0 / (2.0 * 0.2)).epsilon(1e-9));
  }
}

TEST_CASE("resolve_branch") {
  SUBCASE("recovers a wrapped Stark rate through the full pipeline") {
    RateTable zi(2);
    zi.set("ZI", 3.0810);
    RateTableProvider provider(zi, 9);
    // The 0.05 anchor breaks the 5 MHz alias that durations commensurate at
    // 0.1 would leave open: a constant shifted by 1/(2*0.1) reproduces the
    // same channels at every multiple of 0.1.
    const std::vector<double> durations = {0.05, 0.1, 0.2, 0.3, 0.4};
    const auto chis = run_qpt_series(provider, {0, 1}, DriveProgram{}, durations, 0);
    std::vector<std::pair<double, RateTable>> tables;
    for (std::size_t i = 0; i < chis.size(); ++i) {
      tables.emplace_back(durations[i], effective_rates(dominant_unitary(chis[i]).u,
                                                        durations[i]));
    }
    const BranchResolved resolved = resolve_branch(tables);
    CHECK(std::abs(resolved.rates.get("ZI") - 3.0810) < 1e-6);
    CHECK(resolved.per_label_std.at("ZI") < 1e-6);
    CHECK(resolved.ambiguous.empty());
  }

  SUBCASE("unwrapped rates return the unweighted mean with zero corrections") {
    std::vector<std::pair<double, RateTable>> tables;
    const double values[3] = {0.301, 0.299, 0.3005};
    const double times[3] = {0.05, 0.1, 0.15};
    for (int j = 0; j < 3; ++j) {
      RateTable t(2);
      t.set("ZX", values[j]);
      tables.emplace_back(times[j], t);
    }
    const BranchResolved resolved = resolve_branch(tables);
    CHECK(resolved.rates.get("ZX") ==
          doctest::Approx((values[0] + values[1] + values[2]) / 3.0).epsilon(1e-12));
    for (int k : resolved.corrections.at("ZX")) CHECK(k == 0);
  }

  SUBCASE("inconsistent data is flagged ambiguous with the principal mean") {
    std::vector<std::pair<double, RateTable>> tables;
    const double values[3] = {0.0, 1.3, 2.9};
    const double times[3] = {0.1, 0.2, 0.3};
    for (int j = 0; j < 3; ++j) {
      RateTable t(2);
      t.set("ZI", values[j]);
      tables.emplace_back(times[j], t);
    }
    const BranchResolved resolved = resolve_branch(tables, 3, 0.25);
    REQUIRE(resolved.ambiguous.size() == 1);
    CHECK(resolved.ambiguous[0] == "ZI");
    CHECK(resolved.rates.get("ZI") == doctest::Approx((0.0 + 1.3 + 2.9) / 3.0));
    CHECK(!resolved.warnings.empty());
  }

  SUBCASE("input validation") {
    RateTable t(2);
    t.set("ZI", 1.0);
    std::vector<std::pair<double, RateTable>> two = {{0.1, t}, {0.2, t}};
    CHECK_THROWS_AS(resolve_branch(two), std::invalid_argument);
    std::vector<std::pair<double, RateTable>> dup = {{0.1, t}, {0.1, t}, {0.2, t}};
    CHECK_THROWS_AS(resolve_branch(dup), std::invalid_argument);
  }
}

TEST_CASE("commuting-term branch recovery stays within shot noise") {
  // Dominant Stark rate plus small commuting conditional/direct terms;
  // durations are screened against the forward oracle so that every kept
  // duration folds on the per-label lattice (the experiment-design step).
  Rng rng(2024);
  const int shots = 1024;
  const double tol = 2.0 / std::sqrt(static_cast<double>(shots));
  int draws_checked = 0;
  for (int attempt = 0; attempt < 40 && draws_checked < 8; ++attempt) {
    RateTable h(2);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    h.set("ZI", sign * rng.uniform(2.0, 5.0));
    h.set("ZX", rng.uniform(-0.4, 0.4));
    h.set("IX", rng.uniform(-0.4, 0.4));

    // The pool mixes 0.05 with multiples of 0.08 so no rate shift within the
    // correction cap aliases the channel at every duration; the screening
    // below then drops any duration whose principal-branch fold is not an
    // integer lattice step for some label.
    std::vector<double> durations;
    for (const double t : {0.05, 0.08, 0.16, 0.24, 0.32, 0.40, 0.48}) {
      const Matrix u_exact = expm_hermitian(h.to_matrix() * kTwoPi, t);
      const RateTable principal = effective_rates(dominant_unitary(chi_of_unitary(u_exact)).u, t);
      bool lattice = true;
      for (const auto& [label, truth] : h.raw()) {
        const double k = (principal.get(label) - truth) * 2.0 * t;
        if (std::abs(k - std::round(k)) > 1e-6) lattice = false;
      }
      if (lattice) durations.push_back(t);
    }
    if (durations.size() < 4) continue;
    ++draws_checked;

    RateTableProvider provider(h, 500 + static_cast<std::uint64_t>(attempt));
    const auto chis = run_qpt_series(provider, {0, 1}, DriveProgram{}, durations, shots);
    std::vector<std::pair<double, RateTable>> tables;
    for (std::size_t i = 0; i < chis.size(); ++i) {
      tables.emplace_back(durations[i],
                          effective_rates(dominant_unitary(chis[i]).u, durations[i]));
    }
    const BranchResolved resolved = resolve_branch(tables, 6);
    for (const auto& [label, truth] : h.raw()) {
      CAPTURE(label);
      CHECK(std::abs(resolved.rates.get(label) - truth) < tol);
    }
  }
  CHECK(draws_checked >= 8);
}

TEST_CASE("lambda0 regimes: exact unitary vs 1 percent readout flips") {
  DeviceConfig cfg = testing::reference_pair_device();
  DriveProgram drives;
  ConstantDrive tone;
  tone.qubit = 0;
  tone.carrier_target = 1;
  tone.amplitude = testing::kReferenceOmega;
  tone.phase = testing::kReferencePhase;
  drives.drives.push_back(tone);

  SUBCASE("noiseless: unitary channel within 1e-8") {
    EffectiveHamiltonianProvider provider(cfg, 41);
    const ChiMatrix chi = run_qpt(provider, {0, 1}, drives, 0.3, 0);
    CHECK(chi.lambda0 >= 1.0 - 1e-8);
  }

  SUBCASE("readout flips pull lambda0 into the high-0.9 regime") {
    cfg.readout_flip = {0.01, 0.01};
    EffectiveHamiltonianProvider provider(cfg, 42);
    const ChiMatrix chi = run_qpt(provider, {0, 1}, drives, 0.3, 4096);
    CHECK(chi.lambda0 > 0.88);
    CHECK(chi.lambda0 < 0.98);
  }
}

TEST_CASE("additivity_suite: generators add on the shared pair") {
  EffectiveHamiltonianProvider provider(chain_device(), 57);
  const AdditivityReport report =
      additivity_suite(provider, 0, 1, 2, testing::kReferenceOmega);
  for (bool done : report.completed) CHECK(done);

  // Idle protocol is exactly zero on this device.
  CHECK(report.protocols[0].rates.max_abs() < 1e-9);
  // Driving the far qubit only moves the shared qubit.
  for (const auto& [label, rate] : report.protocols[2].rates.raw()) {
    if (std::abs(rate) > 1e-9) CHECK(label[0] == 'I');
  }
  // The directly driven pair carries the conditional terms.
  CHECK(std::abs(report.protocols[1].rates.get("ZX")) > 0.3);

  REQUIRE(!report.deviations.empty());
  for (const auto& [label, dev] : report.deviations) {
    CAPTURE(label);
    CHECK(dev < 1e-6);
  }
}

TEST_CASE("three_qubit_qpt flags exactly the five drive-generated labels") {
  EffectiveHamiltonianProvider provider(clean_chain_device(), 58);
  ThreeQubitOptions options;
  options.duration = 0.02;

  const ThreeQubitResult result =
      three_qubit_qpt(provider, 0, 1, 2, testing::kReferenceOmega, options);
  CHECK(result.expected_labels ==
        std::vector<std::string>{"IIZ", "IXI", "IXZ", "ZII", "ZXI"});
  for (const auto& l : result.expected_labels) {
    CAPTURE(l);
    CHECK(std::abs(result.rates.get(l)) > 0.3);
  }
  CHECK(result.max_spurious < 1e-6);
  CHECK(result.spurious_ratio < 1e-5);

  // The register order maps drive roles onto labels: Stark shifts on the
  // driven ends, conditional X on the shared qubit.
  CHECK(result.rates.get("ZII") == doctest::Approx(3.0810).epsilon(1e-6));
  CHECK(result.rates.get("IIZ") == doctest::Approx(3.0810).epsilon(1e-6));
  CHECK(result.rates.get("IXI") == doctest::Approx(2 * 0.4168).epsilon(1e-6));
}

TEST_CASE("noise ordering: three-qubit lambda0 sits below the two-qubit value") {
  DeviceConfig cfg = clean_chain_device();
  cfg.readout_flip = {0.01, 0.01, 0.01};
  EffectiveHamiltonianProvider provider(cfg, 59);

  DriveProgram pair_drives;
  ConstantDrive tone;
  tone.qubit = 0;
  tone.carrier_target = 1;
  tone.amplitude = testing::kReferenceOmega;
  pair_drives.drives.push_back(tone);
  const ChiMatrix chi2 = run_qpt(provider, {0, 1}, pair_drives, 0.05, 1024);

  ThreeQubitOptions options;
  options.duration = 0.05;
  options.shots = 1024;
  const ThreeQubitResult r3 = three_qubit_qpt(provider, 0, 1, 2,
                                              testing::kReferenceOmega, options);
  DriveProgram both = pair_drives;
  ConstantDrive far = tone;
  far.qubit = 2;
  both.drives.push_back(far);
  const ChiMatrix chi3 = run_qpt(provider, {0, 1, 2}, both, 0.05, 1024);
  CHECK(chi3.lambda0 < chi2.lambda0);
  // Finite shots and flips produce visible spurious rates.
  CHECK(r3.spurious_ratio > 0.01);
  CHECK(r3.spurious_ratio < 1.0);
}

TEST_CASE("QPT rates agree with Hamiltonian tomography on the same device") {
  EffectiveHamiltonianProvider provider(testing::reference_pair_device(), 61);

  DriveProgram drives;
  ConstantDrive tone;
  tone.qubit = 0;
  tone.carrier_target = 1;
  tone.amplitude = testing::kReferenceOmega;
  tone.phase = testing::kReferencePhase;
  drives.drives.push_back(tone);

  const std::vector<double> durations = {0.05, 0.1, 0.15, 0.2, 0.3};
  const auto chis = run_qpt_series(provider, {0, 1}, drives, durations, 0);
  std::vector<std::pair<double, RateTable>> tables;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    tables.emplace_back(durations[i], effective_rates(dominant_unitary(chis[i]).u,
                                                      durations[i]));
  }
  const BranchResolved qpt_rates = resolve_branch(tables);

  std::vector<double> times(240);
  for (int i = 0; i < 240; ++i) times[static_cast<std::size_t>(i)] = 20.0 * (i + 1) / 240.0;
  const auto tomo = cr_hamiltonian_tomography(provider, 0, 1, testing::kReferenceOmega,
                                              testing::kReferencePhase, times, 0);

  for (const auto& [label, truth] : testing::reference_rates()) {
    CAPTURE(label);
    CHECK(std::abs(qpt_rates.rates.get(label) - tomo.rates.get(label)) < 0.05);
  }

  // The three largest reconstructed magnitudes are the Stark, conditional-X
  // and direct-X terms.
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [label, rate] : qpt_rates.rates.raw()) ranked.emplace_back(-std::abs(rate), label);
  std::sort(ranked.begin(), ranked.end());
  REQUIRE(ranked.size() >= 3);
  std::vector<std::string> top = {ranked[0].second, ranked[1].second, ranked[2].second};
  std::sort(top.begin(), top.end());
  CHECK(top == std::vector<std::string>{"IX", "ZI", "ZX"});
}
