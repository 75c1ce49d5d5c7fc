// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit and acceptance tests: a reference
// cross-resonance rate set of realistic magnitude and device configs whose
// injected generator reproduces it exactly.

#pragma once

#include <cmath>
#include <map>
#include <string>

#include "crsim/device.hpp"

namespace crsim::testing {

/// Realistic effective-generator rates (MHz) for a pair driven at 36 MHz:
/// Stark-dominated, with a ~0.5 MHz conditional X and small J^2 terms.
inline const std::map<std::string, double>& reference_rates() {
  static const std::map<std::string, double> rates = {
      {"ZI", 3.0810},  {"ZX", -0.4915}, {"ZY", -0.0332}, {"IX", 0.4168},
      {"IY", 0.0649},  {"IZ", -0.0756}, {"ZZ", 0.0294},
  };
  return rates;
}

/// Coefficient rules that make cross_resonance_rates reproduce
/// reference_rates() exactly at the given coupling, amplitude, and phase.
/// The phase must not be a multiple of pi/2 (every class must be invertible).
inline CrRules rules_for_reference(double j_mhz, double omega_mhz, double phase_rad) {
  const auto& v = reference_rates();
  CrRules rules;
  rules.k["ZI"] = v.at("ZI") / (omega_mhz * omega_mhz);
  rules.k["ZX"] = v.at("ZX") / (j_mhz * omega_mhz * std::cos(phase_rad));
  rules.k["ZY"] = v.at("ZY") / (j_mhz * omega_mhz * std::sin(phase_rad));
  rules.k["IX"] = v.at("IX") / (j_mhz * omega_mhz);
  rules.k["IY"] = v.at("IY") / (j_mhz * j_mhz);
  rules.k["IZ"] = v.at("IZ") / (j_mhz * j_mhz);
  rules.k["ZZ"] = v.at("ZZ") / (j_mhz * j_mhz);
  return rules;
}

/// Reference drive operating point for the pair device below.
inline constexpr double kReferenceOmega = 36.0;   // MHz
inline constexpr double kReferencePhase = -0.05;  // rad
inline constexpr double kReferenceJ = 2.0;        // MHz

/// Two-qubit device whose injected cross-resonance generator at the
/// reference operating point equals reference_rates() on every label.
inline DeviceConfig reference_pair_device() {
  DeviceConfig cfg;
  cfg.n = 2;
  cfg.omega = {5000.0, 4900.0};
  cfg.alpha = {-330.0, -330.0};
  cfg.coupling[{0, 1}] = kReferenceJ;
  cfg.cr_rules = rules_for_reference(kReferenceJ, kReferenceOmega, kReferencePhase);
  return cfg;
}

}  // namespace crsim::testing
