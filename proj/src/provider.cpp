// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/provider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <utility>

#include <Eigen/Dense>

#include "crsim/density.hpp"
#include "crsim/pauli.hpp"

namespace crsim {

namespace {

constexpr char kPrepChars[] = "01+-im";

void check_times(const std::vector<double>& times) {
  require(!times.empty(), "provider: empty time list");
  double prev = -1.0;
  for (double t : times) {
    require(std::isfinite(t) && t >= 0.0, "provider: times must be finite and >= 0");
    require(t > prev, "provider: times must be strictly increasing");
    prev = t;
  }
}

/// Hex digest of a double's bit pattern (exact, locale-independent).
void append_bits(std::string& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  out += buf;
}

/// Full-register preparation string: register qubits carry their prep
/// character, all other qubits are |0>.
std::string scatter_prep(const ExperimentSpec& spec, int n) {
  std::string full(static_cast<std::size_t>(n), '0');
  for (std::size_t k = 0; k < spec.register_qubits.size(); ++k) {
    full[static_cast<std::size_t>(spec.register_qubits[k])] = spec.prep[k];
  }
  return full;
}

std::vector<double> register_flips(const DeviceConfig& cfg, const ExperimentSpec& spec) {
  std::vector<double> flips;
  flips.reserve(spec.register_qubits.size());
  for (int q : spec.register_qubits) flips.push_back(cfg.readout_flip_of(q));
  return flips;
}

MeasurementRecord measure(const Matrix& rho_register, const ExperimentSpec& spec,
                          const std::vector<double>& flips, std::uint64_t master_seed,
                          double time_us) {
  if (spec.shots == 0) {
    return exact_counts(rho_register, spec.basis, 1, flips);
  }
  Rng rng(experiment_seed(master_seed, spec, time_us));
  return sample_counts(rho_register, spec.basis, spec.shots, flips, rng);
}

/// Embeds a single-qubit operator at `site` of an n-qubit register.
Matrix embed_1q(const Matrix& op, int site, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    out = kron(out, k == site ? op : Matrix::Identity(2, 2));
  }
  return out;
}

/// Amplitude damping (T1) followed by pure dephasing at rate 1/T2 - 1/(2 T1)
/// applied for `dt` on one qubit; empty when the channel is the identity.
/// Matches the per-step channel of the pulse simulator, here applied once for
/// the whole evolution (the generator-level backends treat relaxation as an
/// end-of-evolution envelope, which is what the oscillation-fit models use).
std::vector<Matrix> relaxation_kraus_1q(std::optional<double> t1, std::optional<double> t2,
                                        double dt) {
  std::vector<Matrix> ops = {Matrix::Identity(2, 2)};
  if (t1) {
    const double p = 1.0 - std::exp(-dt / *t1);
    Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - p);
    k1(0, 1) = std::sqrt(p);
    ops = {k0, k1};
  }
  double phi_rate = 0.0;
  if (t2) phi_rate = 1.0 / *t2 - (t1 ? 1.0 / (2.0 * *t1) : 0.0);
  if (phi_rate > 0.0) {
    const double pz = 0.5 * (1.0 - std::exp(-phi_rate * dt));
    Matrix z = Matrix::Identity(2, 2);
    z(1, 1) = -1.0;
    std::vector<Matrix> combined;
    combined.reserve(2 * ops.size());
    for (const auto& op : ops) {
      combined.push_back(std::sqrt(1.0 - pz) * op);
      combined.push_back(std::sqrt(pz) * z * op);
    }
    ops = std::move(combined);
  }
  if (ops.size() == 1 && ops[0].isIdentity(1e-15)) return {};
  return ops;
}

/// Shared generator-level evolution: diagonalize H once, then for each time
/// apply the unitary, the relaxation channels, the register reduction and the
/// measurement.
std::vector<MeasurementRecord> evolve_generator(
    const Matrix& h_mhz, int n, const std::vector<std::optional<double>>& t1,
    const std::vector<std::optional<double>>& t2, const std::vector<double>& flips,
    const ExperimentSpec& spec, const std::vector<double>& times, std::uint64_t master_seed) {
  const Matrix rho0 = pure_density(prep_state(scatter_prep(spec, n)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h_mhz);
  require(eig.info() == Eigen::Success, "provider: generator eigendecomposition failed");
  const Matrix& v = eig.eigenvectors();
  const RealVector& lam = eig.eigenvalues();

  const bool any_noise = [&] {
    for (int q = 0; q < n; ++q) {
      const bool has_t1 = static_cast<std::size_t>(q) < t1.size() && t1[static_cast<std::size_t>(q)];
      const bool has_t2 = static_cast<std::size_t>(q) < t2.size() && t2[static_cast<std::size_t>(q)];
      if (has_t1 || has_t2) return true;
    }
    return false;
  }();

  std::vector<MeasurementRecord> records;
  records.reserve(times.size());
  for (double t : times) {
    Vector phases(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      phases[k] = std::exp(cplx(0.0, -kTwoPi * lam[k] * t));
    }
    const Matrix u = v * phases.asDiagonal() * v.adjoint();
    Matrix rho = u * rho0 * u.adjoint();
    if (any_noise && t > 0.0) {
      for (int q = 0; q < n; ++q) {
        std::optional<double> t1_q;
        std::optional<double> t2_q;
        if (static_cast<std::size_t>(q) < t1.size()) t1_q = t1[static_cast<std::size_t>(q)];
        if (static_cast<std::size_t>(q) < t2.size()) t2_q = t2[static_cast<std::size_t>(q)];
        const auto kraus = relaxation_kraus_1q(t1_q, t2_q, t);
        if (kraus.empty()) continue;
        Matrix next = Matrix::Zero(rho.rows(), rho.cols());
        for (const auto& op : kraus) {
          const Matrix full = embed_1q(op, q, n);
          next += full * rho * full.adjoint();
        }
        rho = std::move(next);
      }
    }
    const Matrix reduced = partial_trace(rho, spec.register_qubits, n);
    records.push_back(measure(reduced, spec, flips, master_seed, t));
  }
  return records;
}

}  // namespace

void MeasurementProvider::check_spec(const ExperimentSpec& spec,
                                     const std::vector<double>& times) const {
  check_times(times);
  const int n = n_qubits();
  require(!spec.register_qubits.empty(), "provider: empty register");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int q : spec.register_qubits) {
    require(q >= 0 && q < n, "provider: register qubit out of range");
    require(!seen[static_cast<std::size_t>(q)], "provider: duplicate register qubit");
    seen[static_cast<std::size_t>(q)] = true;
  }
  require(spec.prep.size() == spec.register_qubits.size(),
          "provider: prep must have one character per register qubit");
  require(spec.basis.size() == spec.register_qubits.size(),
          "provider: basis must have one character per register qubit");
  for (char c : spec.prep) {
    require(std::string(kPrepChars).find(c) != std::string::npos,
            "provider: prep characters must be one of 0 1 + - i m");
  }
  for (char c : spec.basis) {
    require(c == 'X' || c == 'Y' || c == 'Z', "provider: basis characters must be X, Y or Z");
  }
  require(spec.shots >= 0, "provider: shots must be >= 0");
  require(spec.tls_epoch >= 0, "provider: tls_epoch must be >= 0");
  for (const auto& d : spec.drives.drives) {
    require(d.qubit >= 0 && d.qubit < n, "provider: drive qubit out of range");
    require(d.carrier_target >= 0 && d.carrier_target < n,
            "provider: drive carrier_target out of range");
    require(d.amplitude >= 0.0, "provider: drive amplitude must be >= 0");
  }
}

std::vector<MeasurementRecord> MeasurementProvider::run_series(const ExperimentSpec& spec,
                                                               const std::vector<double>& times) {
  check_spec(spec, times);
  ++sessions_;
  return execute(spec, times);
}

std::uint64_t experiment_seed(std::uint64_t master_seed, const ExperimentSpec& spec,
                              double time_us) {
  std::string key = "reg:";
  for (int q : spec.register_qubits) {
    key += std::to_string(q);
    key += ',';
  }
  key += ";prep:" + spec.prep + ";basis:" + spec.basis;
  key += ";epoch:" + std::to_string(spec.tls_epoch);
  key += ";shots:" + std::to_string(spec.shots);
  key += ";drives:";
  for (const auto& d : spec.drives.drives) {
    key += std::to_string(d.qubit) + '>' + std::to_string(d.carrier_target) + ':';
    for (double v : {d.detuning, d.amplitude, d.phase, d.xy, d.hz, d.ramp_time}) {
      append_bits(key, v);
    }
    key += '|';
  }
  key += ";t:";
  append_bits(key, time_us);
  return splitmix64(master_seed ^ fnv1a(key));
}

// ---------------------------------------------------------------------------
// SimulatorProvider

SimulatorProvider::SimulatorProvider(DeviceConfig cfg, std::uint64_t master_seed, Frame frame,
                                     bool rwa)
    : cfg_(std::move(cfg)), master_seed_(master_seed), frame_(frame), rwa_(rwa) {
  cfg_.validate();
}

std::vector<MeasurementRecord> SimulatorProvider::execute(const ExperimentSpec& spec,
                                                          const std::vector<double>& times) {
  const Matrix init = pure_density(prep_state(scatter_prep(spec, cfg_.n)));
  const std::vector<double> flips = register_flips(cfg_, spec);
  SimulateOptions opts;
  opts.rwa = rwa_;
  opts.seed = master_seed_;
  opts.tls_epoch = spec.tls_epoch;

  const bool ramped = std::any_of(spec.drives.drives.begin(), spec.drives.drives.end(),
                                  [](const ConstantDrive& d) { return d.ramp_time > 0.0; });

  const auto reduce = [&](const Matrix& rho_ext) {
    return partial_trace(trace_out_tls(cfg_, rho_ext), spec.register_qubits, cfg_.n);
  };

  std::vector<MeasurementRecord> records;
  records.reserve(times.size());
  if (!ramped) {
    // Constant envelopes: the state at t under a longer tone equals the state
    // after a tone that stops at t, so one simulation with snapshots covers
    // the whole series.
    PulseSchedule schedule;
    if (!spec.drives.drives.empty() && times.back() > 0.0) {
      schedule = to_pulse_schedule(spec.drives, times.back());
    }
    const auto states = simulate_schedule(cfg_, schedule, init, frame_, times, opts);
    for (std::size_t k = 0; k < times.size(); ++k) {
      records.push_back(measure(reduce(states[k]), spec, flips, master_seed_, times[k]));
    }
    return records;
  }

  // Ramped envelopes: the ramp-down position depends on the tone length, so
  // each duration is its own schedule.
  for (double t : times) {
    Matrix rho;
    if (t <= 0.0 || spec.drives.drives.empty()) {
      const auto states = simulate_schedule(cfg_, PulseSchedule{}, init, frame_, {t}, opts);
      rho = states[0];
    } else {
      const auto states =
          simulate_schedule(cfg_, to_pulse_schedule(spec.drives, t), init, frame_, {t}, opts);
      rho = states[0];
    }
    records.push_back(measure(reduce(rho), spec, flips, master_seed_, t));
  }
  return records;
}

// ---------------------------------------------------------------------------
// EffectiveHamiltonianProvider

EffectiveHamiltonianProvider::EffectiveHamiltonianProvider(DeviceConfig cfg,
                                                           std::uint64_t master_seed)
    : cfg_(std::move(cfg)), master_seed_(master_seed) {
  cfg_.validate();
}

RateTable EffectiveHamiltonianProvider::generator_for(const DriveProgram& drives) const {
  RateTable total(cfg_.n);
  for (int q = 0; q < cfg_.n; ++q) {
    const double delta = cfg_.frame_detuning_of(q);
    if (delta != 0.0) {
      total.add(embed_label("Z", {q}, cfg_.n), 0.5 * delta);
    }
  }
  for (const auto& d : drives.drives) {
    require(d.detuning == 0.0,
            "EffectiveHamiltonianProvider: detuned tones are not representable at the "
            "generator level; use the pulse backend");
    const double delivered = awg_apply(cfg_.awg, d.amplitude * d.xy);
    const double phase = d.phase + cfg_.awg.phase_offset;
    if (d.carrier_target == d.qubit) {
      // Resonant tone: transverse field from the delivered amplitude, plus
      // the frequency-modulation component (a phase ramp, not amplitude
      // quantized).
      if (delivered > 0.0) {
        total.add(embed_label("X", {d.qubit}, cfg_.n), 0.5 * delivered * std::cos(phase));
        total.add(embed_label("Y", {d.qubit}, cfg_.n), 0.5 * delivered * std::sin(phase));
      }
      if (d.hz != 0.0) {
        total.add(embed_label("Z", {d.qubit}, cfg_.n), 0.5 * d.amplitude * d.hz);
      }
    } else {
      require(d.hz == 0.0,
              "EffectiveHamiltonianProvider: hz modulation on a cross-resonance tone is "
              "not supported");
      const RateTable pair =
          cross_resonance_rates(cfg_, d.qubit, d.carrier_target, delivered, phase);
      const RateTable embedded = pair.embedded({d.qubit, d.carrier_target}, cfg_.n);
      for (const auto& [label, rate] : embedded.raw()) {
        total.add(label, rate);
      }
    }
  }
  return total;
}

std::vector<MeasurementRecord> EffectiveHamiltonianProvider::execute(
    const ExperimentSpec& spec, const std::vector<double>& times) {
  const RateTable generator = generator_for(spec.drives);
  return evolve_generator(generator.to_matrix(), cfg_.n, cfg_.t1, cfg_.t2,
                          register_flips(cfg_, spec), spec, times, master_seed_);
}

// ---------------------------------------------------------------------------
// RateTableProvider

RateTableProvider::RateTableProvider(RateTable generator, std::uint64_t master_seed, Noise noise)
    : generator_(std::move(generator)), master_seed_(master_seed), noise_(std::move(noise)) {
  require(generator_.n_qubits() >= 1, "RateTableProvider: generator must have a register");
  const auto n = static_cast<std::size_t>(generator_.n_qubits());
  require(noise_.t1.empty() || noise_.t1.size() == n,
          "RateTableProvider: t1 must be empty or one entry per qubit");
  require(noise_.t2.empty() || noise_.t2.size() == n,
          "RateTableProvider: t2 must be empty or one entry per qubit");
  require(noise_.readout_flip.empty() || noise_.readout_flip.size() == n,
          "RateTableProvider: readout_flip must be empty or one entry per qubit");
}

std::vector<MeasurementRecord> RateTableProvider::execute(const ExperimentSpec& spec,
                                                          const std::vector<double>& times) {
  std::vector<double> flips;
  flips.reserve(spec.register_qubits.size());
  for (int q : spec.register_qubits) {
    flips.push_back(noise_.readout_flip.empty() ? 0.0
                                                : noise_.readout_flip[static_cast<std::size_t>(q)]);
  }
  return evolve_generator(generator_.to_matrix(), generator_.n_qubits(), noise_.t1, noise_.t2,
                          flips, spec, times, master_seed_);
}

}  // namespace crsim
