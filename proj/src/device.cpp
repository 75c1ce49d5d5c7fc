// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crsim/pauli.hpp"

namespace crsim {

namespace {

double at_or(const std::vector<double>& v, int i, double dflt) {
  return (i < static_cast<int>(v.size())) ? v[static_cast<size_t>(i)] : dflt;
}

std::optional<double> at_opt(const std::vector<std::optional<double>>& v, int i) {
  return (i < static_cast<int>(v.size())) ? v[static_cast<size_t>(i)] : std::nullopt;
}

std::pair<int, int> ordered(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

// Round to the nearest multiple of step, halves away from zero.
double quantize(double value, double step) {
  if (step <= 0.0) return value;
  const double scaled = value / step;
  return step * std::floor(std::abs(scaled) + 0.5) * (scaled < 0.0 ? -1.0 : 1.0);
}

}  // namespace

CrRules CrRules::representative() {
  // Scaled so that a typical operating point (Omega = 36 MHz, J = 2 MHz,
  // phase = 0) lands on rates of a few MHz for the drive-linear terms and a
  // few tens of kHz for the J^2 terms.
  CrRules rules;
  rules.k["ZI"] = 2.3773e-3;   // * Omega^2
  rules.k["ZX"] = -6.8264e-3;  // * J * Omega * cos(phase)
  rules.k["ZY"] = 6.8264e-3;   // * J * Omega * sin(phase)
  rules.k["IX"] = 5.7889e-3;   // * J * Omega
  rules.k["IY"] = 1.6225e-2;   // * J^2
  rules.k["IZ"] = -1.8900e-2;  // * J^2
  rules.k["ZZ"] = 7.3500e-3;   // * J^2
  return rules;
}

double DeviceConfig::coupling_of(int i, int j) const {
  const auto it = coupling.find(ordered(i, j));
  return it == coupling.end() ? 0.0 : it->second;
}

bool DeviceConfig::connected(int i, int j) const {
  return coupling.count(ordered(i, j)) > 0;
}

double DeviceConfig::omega_of(int i) const { return at_or(omega, i, 0.0); }
double DeviceConfig::alpha_of(int i) const { return at_or(alpha, i, 0.0); }
double DeviceConfig::frame_detuning_of(int i) const { return at_or(frame_detuning, i, 0.0); }
double DeviceConfig::true_frequency_of(int i) const { return omega_of(i) + frame_detuning_of(i); }
std::optional<double> DeviceConfig::t1_of(int i) const { return at_opt(t1, i); }
std::optional<double> DeviceConfig::t2_of(int i) const { return at_opt(t2, i); }
double DeviceConfig::readout_flip_of(int i) const { return at_or(readout_flip, i, 0.0); }

std::vector<std::string> DeviceConfig::validate() const {
  require(n >= 1, "DeviceConfig: need at least one qubit");
  auto check_size = [this](size_t got, const char* what) {
    if (got != 0 && got != static_cast<size_t>(n)) {
      throw std::invalid_argument(std::string("DeviceConfig: ") + what +
                                  " must be empty or have one entry per qubit");
    }
  };
  check_size(omega.size(), "omega");
  check_size(alpha.size(), "alpha");
  check_size(frame_detuning.size(), "frame_detuning");
  check_size(t1.size(), "T1");
  check_size(t2.size(), "T2");
  check_size(readout_flip.size(), "readout_flip");

  for (int i = 0; i < n; ++i) {
    require(alpha_of(i) <= 0.0, "DeviceConfig: anharmonicity must be <= 0");
    const double flip = readout_flip_of(i);
    require(flip >= 0.0 && flip <= 0.5, "DeviceConfig: readout_flip must lie in [0, 0.5]");
    const auto one = t1_of(i);
    const auto two = t2_of(i);
    if (one) require(*one > 0.0, "DeviceConfig: T1 must be positive");
    if (two) require(*two > 0.0, "DeviceConfig: T2 must be positive");
    if (one && two) {
      require(*two <= 2.0 * *one + 1e-12, "DeviceConfig: T2 must not exceed 2*T1");
    }
  }

  require(awg.amplitude_step >= 0.0, "DeviceConfig: amplitude_step must be >= 0");

  std::vector<std::string> warnings;
  for (const auto& [pair, j_mhz] : coupling) {
    const auto [i, j] = pair;
    require(i != j, "DeviceConfig: coupling graph must have no self-loops");
    require(i >= 0 && j < n && i < j, "DeviceConfig: coupling pair out of range or unordered");
    require(std::isfinite(j_mhz), "DeviceConfig: coupling must be finite");
    const double detuning = std::abs(true_frequency_of(i) - true_frequency_of(j));
    if (detuning <= 0.0 || std::abs(j_mhz) / detuning > 0.1) {
      std::ostringstream msg;
      msg << "coupling J(" << i << "," << j << ") = " << j_mhz
          << " MHz is not small against the pair detuning " << detuning
          << " MHz; the dispersive qubit model is unreliable here";
      warnings.push_back(msg.str());
    }
  }

  for (const auto& spec : tls) {
    require(spec.qubit >= 0 && spec.qubit < n, "DeviceConfig: TLS qubit index out of range");
    require(spec.p_excited >= 0.0 && spec.p_excited <= 1.0,
            "DeviceConfig: TLS p_excited must lie in [0, 1]");
    require(std::isfinite(spec.chi), "DeviceConfig: TLS chi must be finite");
    if (spec.lifetime) require(*spec.lifetime > 0.0, "DeviceConfig: TLS lifetime must be positive");
    for (const auto& range : {spec.chi_respawn, spec.p_excited_respawn}) {
      if (range) require(range->lo <= range->hi, "DeviceConfig: respawn range must have lo <= hi");
    }
  }
  return warnings;
}

double awg_apply(const AwgModel& model, double requested_mhz) {
  require(requested_mhz >= 0.0, "awg_apply: requested amplitude must be >= 0");
  const double shaped =
      requested_mhz * (1.0 + model.gain_nonlinearity * requested_mhz * requested_mhz);
  return quantize(shaped, model.amplitude_step);
}

Matrix build_duffing_hamiltonian(const DeviceConfig& cfg, int levels) {
  require(levels == 2 || levels == 3, "build_duffing_hamiltonian: levels must be 2 or 3");
  cfg.validate();

  const int dim_site = levels;
  // Site-local operators; basis index 0 is the ground state.
  Matrix lower = Matrix::Zero(dim_site, dim_site);
  for (int k = 1; k < dim_site; ++k) lower(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Matrix number = lower.adjoint() * lower;
  // Quadrature p = i(a^dag - a); the two-level projection of p_i p_j is
  // Y_i Y_j, matching the qubit model's coupling sign.
  const Matrix quad = cplx(0, 1) * (lower.adjoint() - lower);

  long total_dim = 1;
  for (int i = 0; i < cfg.n; ++i) total_dim *= dim_site;

  auto embed = [&](const Matrix& op, int site) {
    Matrix out = Matrix::Identity(1, 1);
    for (int s = 0; s < cfg.n; ++s) {
      out = kron(out, s == site ? op : Matrix::Identity(dim_site, dim_site));
    }
    return out;
  };

  Matrix h = Matrix::Zero(total_dim, total_dim);
  for (int i = 0; i < cfg.n; ++i) {
    const Matrix n_i = embed(number, i);
    h += cfg.true_frequency_of(i) * n_i +
         cfg.alpha_of(i) * (n_i * n_i - n_i);  // a†a†aa = n(n-1)
  }
  for (const auto& [pair, j_mhz] : cfg.coupling) {
    h += j_mhz * embed(quad, pair.first) * embed(quad, pair.second);
  }
  return h;
}

Matrix build_qubit_hamiltonian(const DeviceConfig& cfg) {
  cfg.validate();
  RateTable table(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const double w = cfg.true_frequency_of(i);
    if (w != 0.0) table.add(embed_label("Z", {i}, cfg.n), w / 2.0);
  }
  for (const auto& [pair, j_mhz] : cfg.coupling) {
    if (j_mhz != 0.0) {
      table.add(embed_label("YY", {pair.first, pair.second}, cfg.n), j_mhz);
    }
  }
  return table.to_matrix();
}

RateTable cross_resonance_rates(const DeviceConfig& cfg, int control, int target,
                                double omega_mhz, double phase_rad) {
  require(control >= 0 && control < cfg.n && target >= 0 && target < cfg.n && control != target,
          "cross_resonance_rates: qubit indices out of range or equal");
  require(cfg.connected(control, target),
          "cross_resonance_rates: control/target pair is not connected");
  require(omega_mhz >= 0.0, "cross_resonance_rates: drive amplitude must be >= 0");

  RateTable table(2);
  if (omega_mhz == 0.0) return table;  // no drive, no effective generator

  const double j_mhz = cfg.coupling_of(control, target);
  auto k_of = [&](const std::string& label) {
    const auto it = cfg.cr_rules.k.find(label);
    return it == cfg.cr_rules.k.end() ? 0.0 : it->second;
  };

  auto set_if = [&table](const std::string& label, double rate) {
    if (std::abs(rate) > 1e-12) table.set(label, rate);
  };
  set_if("ZI", k_of("ZI") * omega_mhz * omega_mhz);
  set_if("ZX", k_of("ZX") * j_mhz * omega_mhz * std::cos(phase_rad));
  set_if("ZY", k_of("ZY") * j_mhz * omega_mhz * std::sin(phase_rad));
  set_if("IX", k_of("IX") * j_mhz * omega_mhz);
  for (const char* label : {"IY", "IZ", "ZZ"}) {
    set_if(label, k_of(label) * j_mhz * j_mhz);
  }
  return table;
}

}  // namespace crsim
