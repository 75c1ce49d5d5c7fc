// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crsim/device.hpp"
#include "crsim/pauli.hpp"
#include "support.hpp"

using namespace crsim;

namespace {

DeviceConfig single_qubit(double omega_mhz) {
  DeviceConfig cfg;
  cfg.n = 1;
  cfg.omega = {omega_mhz};
  return cfg;
}

}  // namespace

TEST_CASE("awg_apply quantizes to the amplitude grid, halves away from zero") {
  AwgModel model;
  model.amplitude_step = 0.09;
  CHECK(awg_apply(model, 0.07) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(awg_apply(model, 0.044) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(awg_apply(model, 0.046) == doctest::Approx(0.09).epsilon(1e-12));
  // 0.135 sits exactly between grid points; halves round away from zero.
  CHECK(awg_apply(model, 0.135) == doctest::Approx(0.18).epsilon(1e-12));
  CHECK_THROWS_AS(awg_apply(model, -0.1), std::invalid_argument);
}

TEST_CASE("awg_apply with zero step is the bare nonlinear gain") {
  AwgModel model;  // step 0, g 0: identity
  for (double x : {0.0, 0.07, 1.5, 36.0}) CHECK(awg_apply(model, x) == doctest::Approx(x));

  // Cubic compression tuned so a requested 1.50 MHz tone lands on 1.44 MHz.
  model.gain_nonlinearity = -0.04 / 2.25;
  CHECK(awg_apply(model, 1.50) == doctest::Approx(1.44).epsilon(1e-12));
  model.amplitude_step = 0.09;  // 1.44 is on the grid: quantization keeps it
  CHECK(awg_apply(model, 1.50) == doctest::Approx(1.44).epsilon(1e-9));
}

TEST_CASE("awg_apply reproduces a coarse-grid floor at low amplitude") {
  // A coarse grid with strong low-amplitude gain: a requested 0.07 MHz tone
  // shapes to ~0.080 MHz and snaps up to the first grid step at 0.16 MHz.
  AwgModel model;
  model.amplitude_step = 0.16;
  model.gain_nonlinearity = 30.0;
  CHECK(awg_apply(model, 0.07) == doctest::Approx(0.16).epsilon(1e-12));
  CHECK(awg_apply(model, 0.02) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("build_duffing_hamiltonian matches the three-level single-transmon spectrum") {
  DeviceConfig cfg = single_qubit(5000.0);
  cfg.alpha = {-330.0};
  const Matrix h = build_duffing_hamiltonian(cfg, 3);
  REQUIRE(h.rows() == 3);
  CHECK(h(0, 0).real() == doctest::Approx(0.0));
  CHECK(h(1, 1).real() == doctest::Approx(5000.0));
  CHECK(h(2, 2).real() == doctest::Approx(2.0 * 5000.0 - 2.0 * 330.0));
  CHECK(h.cwiseAbs().sum() == doctest::Approx(5000.0 + 9340.0));  // diagonal
  CHECK_THROWS_AS(build_duffing_hamiltonian(cfg, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_duffing_hamiltonian(cfg, 1), std::invalid_argument);
}

TEST_CASE("build_duffing_hamiltonian decouples into single-transmon blocks at J = 0") {
  DeviceConfig pair;
  pair.n = 2;
  pair.omega = {5000.0, 4900.0};
  pair.alpha = {-330.0, -300.0};
  const Matrix h = build_duffing_hamiltonian(pair, 3);

  DeviceConfig left = single_qubit(5000.0);
  left.alpha = {-330.0};
  DeviceConfig right = single_qubit(4900.0);
  right.alpha = {-300.0};
  const Matrix expected =
      kron(build_duffing_hamiltonian(left, 3), Matrix::Identity(3, 3)) +
      kron(Matrix::Identity(3, 3), build_duffing_hamiltonian(right, 3));
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-level truncation agrees with the qubit model") {
  DeviceConfig cfg;
  cfg.n = 2;
  cfg.omega = {5000.0, 4900.0};
  cfg.alpha = {-330.0, -330.0};
  cfg.coupling[{0, 1}] = 2.0;

  const Matrix duffing = build_duffing_hamiltonian(cfg, 2);
  const Matrix qubit = build_qubit_hamiltonian(cfg);

  // Identical spectra once the overall energy offset is removed (the two
  // conventions label ground/excited oppositely, which reverses eigenvalue
  // order but not the set).
  Eigen::SelfAdjointEigenSolver<Matrix> es_d(duffing), es_q(qubit);
  RealVector eig_d = es_d.eigenvalues();
  RealVector eig_q = es_q.eigenvalues();
  eig_d.array() -= eig_d.mean();
  eig_q.array() -= eig_q.mean();
  CHECK((eig_d - eig_q).cwiseAbs().maxCoeff() < 1e-9);

  // Term by term: occupation maps to (1 - Z)/2, so single-qubit Z rates
  // flip sign relative to the qubit model while the YY coupling matches.
  const RealVector coeff_d = pauli_decompose(duffing);
  const RealVector coeff_q = pauli_decompose(qubit);
  const auto idx = [&](const std::string& label) { return pauli_index(label); };
  CHECK(coeff_d(idx("ZI")) == doctest::Approx(-coeff_q(idx("ZI"))).epsilon(1e-12));
  CHECK(coeff_d(idx("IZ")) == doctest::Approx(-coeff_q(idx("IZ"))).epsilon(1e-12));
  CHECK(coeff_d(idx("YY")) == doctest::Approx(coeff_q(idx("YY"))).epsilon(1e-12));
  CHECK(coeff_q(idx("YY")) == doctest::Approx(2.0));
}

TEST_CASE("build_qubit_hamiltonian lays out Z and YY rates") {
  SUBCASE("single qubit") {
    const Matrix h = build_qubit_hamiltonian(single_qubit(5000.0));
    CHECK((h - 2500.0 * pauli_matrix("Z")).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("frame detuning shifts the Z rate") {
    DeviceConfig cfg = single_qubit(5000.0);
    cfg.frame_detuning = {0.1};
    const Matrix h = build_qubit_hamiltonian(cfg);
    CHECK(pauli_decompose(h)(pauli_index("Z")) == doctest::Approx(2500.05));
  }
  SUBCASE("chain couples only neighbours") {
    DeviceConfig cfg;
    cfg.n = 3;
    cfg.omega = {5000.0, 4900.0, 5080.0};
    cfg.coupling[{0, 1}] = 2.0;
    cfg.coupling[{1, 2}] = 1.5;
    const RealVector coeff = pauli_decompose(build_qubit_hamiltonian(cfg));
    CHECK(coeff(pauli_index("YYI")) == doctest::Approx(2.0));
    CHECK(coeff(pauli_index("IYY")) == doctest::Approx(1.5));
    CHECK(coeff(pauli_index("YIY")) == doctest::Approx(0.0));
  }
}

TEST_CASE("cross_resonance_rates reproduces the reference table at its operating point") {
  const DeviceConfig cfg = testing::reference_pair_device();
  const RateTable table = cross_resonance_rates(cfg, 0, 1, testing::kReferenceOmega,
                                                testing::kReferencePhase);
  for (const auto& [label, rate] : testing::reference_rates()) {
    CAPTURE(label);
    CHECK(table.get(label) == doctest::Approx(rate).epsilon(1e-12));
  }
  CHECK(table.labels().size() == testing::reference_rates().size());
}

TEST_CASE("cross_resonance_rates scaling rules") {
  const DeviceConfig cfg = testing::reference_pair_device();
  SUBCASE("no drive, no generator") {
    const RateTable table = cross_resonance_rates(cfg, 0, 1, 0.0, 0.3);
    CHECK(table.labels().empty());
    CHECK(table.max_abs() == 0.0);
  }
  SUBCASE("conditional X vanishes at quadrature phase") {
    const RateTable table = cross_resonance_rates(cfg, 0, 1, 36.0, kPi / 2.0);
    CHECK(table.get("ZX") == 0.0);
    const double k_zy = cfg.cr_rules.k.at("ZY");
    CHECK(table.get("ZY") ==
          doctest::Approx(k_zy * testing::kReferenceJ * 36.0).epsilon(1e-9));
  }
  SUBCASE("Stark term scales with the amplitude squared") {
    const RateTable low = cross_resonance_rates(cfg, 0, 1, 18.0, 0.0);
    const RateTable high = cross_resonance_rates(cfg, 0, 1, 36.0, 0.0);
    CHECK(high.get("ZI") == doctest::Approx(4.0 * low.get("ZI")).epsilon(1e-12));
    CHECK(high.get("IX") == doctest::Approx(2.0 * low.get("IX")).epsilon(1e-12));
    CHECK(high.get("ZZ") == doctest::Approx(low.get("ZZ")).epsilon(1e-12));
  }
  SUBCASE("disconnected or invalid pairs are rejected") {
    CHECK_THROWS_AS(cross_resonance_rates(cfg, 1, 1, 36.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cross_resonance_rates(cfg, 0, 1, -1.0, 0.0), std::invalid_argument);
    DeviceConfig loose = cfg;
    loose.coupling.clear();
    CHECK_THROWS_AS(cross_resonance_rates(loose, 0, 1, 36.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("DeviceConfig validation") {
  DeviceConfig cfg = testing::reference_pair_device();
  CHECK(cfg.validate().empty());

  SUBCASE("dephasing bounded by relaxation") {
    cfg.t1 = {100.0, 100.0};
    cfg.t2 = {150.0, 201.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.t2 = {150.0, 200.0};
    CHECK_NOTHROW(cfg.validate());
  }
  SUBCASE("strong coupling against detuning only warns") {
    cfg.omega = {5000.0, 4990.0};  // J / detuning = 0.2
    const auto warnings = cfg.validate();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("not small against") != std::string::npos);
  }
  SUBCASE("readout flip probability range") {
    cfg.readout_flip = {0.6, 0.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("TLS sanity") {
    TlsSpec bad;
    bad.qubit = 5;
    cfg.tls = {bad};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.tls[0].qubit = 0;
    cfg.tls[0].p_excited = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.tls[0].p_excited = 0.4;
    cfg.tls[0].chi_respawn = RespawnRange{0.05, 0.01};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("positive anharmonicity rejected") {
    cfg.alpha = {10.0, -330.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("self-coupling rejected") {
    cfg.coupling[{1, 1}] = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("DeviceConfig accessors tolerate unset fields") {
  DeviceConfig cfg;
  cfg.n = 2;
  cfg.omega = {5000.0, 4900.0};
  CHECK(cfg.alpha_of(1) == 0.0);
  CHECK(cfg.frame_detuning_of(0) == 0.0);
  CHECK(cfg.true_frequency_of(1) == 4900.0);
  CHECK(!cfg.t1_of(0).has_value());
  CHECK(!cfg.t2_of(1).has_value());
  CHECK(cfg.readout_flip_of(1) == 0.0);
  CHECK(cfg.coupling_of(0, 1) == 0.0);
  CHECK(!cfg.connected(0, 1));
}
