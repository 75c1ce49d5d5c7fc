// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "crsim/density.hpp"
#include "crsim/linalg.hpp"
#include "crsim/sampling.hpp"

namespace crsim {

namespace {

constexpr double kRejectBudgetRad = 0.1;  // max generator rotation per sample
constexpr double kOscBudgetRad = 0.1;     // max fast-phase advance per substep

// Cosine ramp window in segment-local time.
double ramp_window(double t_local, double duration, double ramp) {
  if (ramp <= 0.0) return 1.0;
  if (t_local < ramp) return 0.5 * (1.0 - std::cos(kPi * t_local / ramp));
  if (t_local > duration - ramp) {
    return 0.5 * (1.0 - std::cos(kPi * (duration - t_local) / ramp));
  }
  return 1.0;
}

// One drive segment with AWG-resolved per-sample amplitude and phase.
struct ResolvedSegment {
  int qubit = 0;
  double t0 = 0.0, t1 = 0.0;  // absolute time span
  double carrier_mhz = 0.0;   // nominal carrier + detuning
  double delta_mhz = 0.0;     // carrier minus the driven qubit's nominal freq
  std::vector<double> amp;    // delivered amplitude per sample (MHz)
  std::vector<double> phase;  // envelope direction + AWG offset per sample (rad)
  std::vector<double> hz_rate;         // d(phi_z)/dt per sample (rad/us)
  std::vector<double> phi_z_at_start;  // accumulated phi_z at each sample start

  int sample_of(double t, double dt) const {
    const auto idx = static_cast<long long>(std::floor((t - t0) / dt + 1e-9));
    return static_cast<int>(std::clamp<long long>(idx, 0, static_cast<long long>(amp.size()) - 1));
  }
};

struct PerQubitDrives {
  std::vector<ResolvedSegment> segments;
  double phi_z_final = 0.0;  // accumulated phase after the last segment

  const ResolvedSegment* active_at(double t) const {
    for (const auto& seg : segments) {
      if (t >= seg.t0 - 1e-12 && t < seg.t1 - 1e-12) return &seg;
    }
    return nullptr;
  }

  double phi_z_at(double t) const {
    for (const auto& seg : segments) {
      if (t < seg.t0) return seg.phi_z_at_start.empty() ? 0.0 : seg.phi_z_at_start.front();
      if (t < seg.t1 - 1e-12) {
        const int k = seg.sample_of(t, (seg.t1 - seg.t0) / static_cast<double>(seg.amp.size()));
        const double dt = (seg.t1 - seg.t0) / static_cast<double>(seg.amp.size());
        return seg.phi_z_at_start[static_cast<size_t>(k)] +
               seg.hz_rate[static_cast<size_t>(k)] * (t - (seg.t0 + k * dt));
      }
    }
    return phi_z_final;
  }
};

// Embeds a single-site operator at `site` among `n_sites` two-level systems.
Matrix embed_site(const Matrix& op, int site, int n_sites) {
  Matrix out = Matrix::Identity(1, 1);
  for (int s = 0; s < n_sites; ++s) {
    out = kron(out, s == site ? op : Matrix::Identity(2, 2));
  }
  return out;
}

struct NoiseChannel {
  std::vector<Matrix> kraus;  // full-dimension operators
};

// Amplitude damping (T1) followed by pure dephasing (rate 1/T2 - 1/(2 T1))
// on one site, embedded into the full register.
NoiseChannel make_noise(int site, int n_sites, std::optional<double> t1,
                        std::optional<double> t2, double dt) {
  std::vector<Matrix> site_ops = {Matrix::Identity(2, 2)};
  if (t1) {
    const double p = 1.0 - std::exp(-dt / *t1);
    Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - p);
    k1(0, 1) = std::sqrt(p);
    site_ops = {k0, k1};
  }
  double phi_rate = 0.0;
  if (t2) phi_rate = 1.0 / *t2 - (t1 ? 1.0 / (2.0 * *t1) : 0.0);
  if (phi_rate > 0.0) {
    const double pz = 0.5 * (1.0 - std::exp(-phi_rate * dt));
    Matrix z = Matrix::Identity(2, 2);
    z(1, 1) = -1.0;
    std::vector<Matrix> combined;
    for (const auto& op : site_ops) {
      combined.push_back(std::sqrt(1.0 - pz) * op);
      combined.push_back(std::sqrt(pz) * z * op);
    }
    site_ops = std::move(combined);
  }
  NoiseChannel channel;
  if (site_ops.size() == 1 && site_ops[0].isIdentity(1e-15)) return channel;
  for (const auto& op : site_ops) channel.kraus.push_back(embed_site(op, site, n_sites));
  return channel;
}

}  // namespace

std::vector<TlsSpec> resolve_tls(const DeviceConfig& cfg, std::uint64_t seed, int epoch) {
  std::vector<TlsSpec> resolved = cfg.tls;
  if (epoch <= 0) return resolved;
  for (size_t idx = 0; idx < resolved.size(); ++idx) {
    auto& spec = resolved[idx];
    if (!spec.chi_respawn && !spec.p_excited_respawn) continue;
    std::uint64_t s = seed;
    s = splitmix64(s ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(epoch)));
    s = splitmix64(s ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(idx + 1)));
    Rng rng(s);
    if (spec.chi_respawn) spec.chi = rng.uniform(spec.chi_respawn->lo, spec.chi_respawn->hi);
    if (spec.p_excited_respawn) {
      spec.p_excited = rng.uniform(spec.p_excited_respawn->lo, spec.p_excited_respawn->hi);
    }
  }
  return resolved;
}

Matrix trace_out_tls(const DeviceConfig& cfg, const Matrix& rho_full) {
  const int n_sites = cfg.n + static_cast<int>(cfg.tls.size());
  std::vector<int> keep(static_cast<size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) keep[static_cast<size_t>(i)] = i;
  return partial_trace(rho_full, keep, n_sites);
}

std::vector<Matrix> simulate_schedule(const DeviceConfig& cfg, const PulseSchedule& schedule,
                                      const Matrix& init, Frame frame,
                                      const std::vector<double>& times,
                                      const SimulateOptions& opts) {
  cfg.validate();
  schedule.validate(cfg.n);
  check_density_matrix(init);
  require(init.rows() == (1L << cfg.n), "simulate_schedule: init must live on the qubit register");
  require(std::is_sorted(times.begin(), times.end()), "simulate_schedule: times must be sorted");
  require(times.empty() || times.front() >= 0.0, "simulate_schedule: times must be >= 0");

  const std::vector<TlsSpec> tls = resolve_tls(cfg, opts.seed, opts.tls_epoch);
  const int n_tls = static_cast<int>(tls.size());
  const int n_sites = cfg.n + n_tls;
  const long dim = 1L << n_sites;
  const double dt = schedule.dt_sample;
  const bool rotating = frame == Frame::Rotating;

  // --- initial state: qubit register tensor TLS mixed states -------------
  Matrix rho = init;
  for (const auto& spec : tls) {
    Matrix tls_state = Matrix::Zero(2, 2);
    tls_state(0, 0) = 1.0 - spec.p_excited;
    tls_state(1, 1) = spec.p_excited;
    rho = kron(rho, tls_state);
  }

  // --- embedded operators -------------------------------------------------
  Matrix x1(2, 2), y1(2, 2), z1(2, 2);
  x1 << 0, 1, 1, 0;
  y1 << 0, cplx(0, -1), cplx(0, 1), 0;
  z1 << 1, 0, 0, -1;
  std::vector<Matrix> x_op(static_cast<size_t>(cfg.n)), y_op(static_cast<size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    x_op[static_cast<size_t>(i)] = embed_site(x1, i, n_sites);
    y_op[static_cast<size_t>(i)] = embed_site(y1, i, n_sites);
  }
  struct Pair {
    int i, j;
    double j_mhz;
    double delta_mhz;  // nominal frequency difference omega_i - omega_j
    Matrix xx, yy, xy, yx;
  };
  std::vector<Pair> pairs;
  for (const auto& [key, j_mhz] : cfg.coupling) {
    if (j_mhz == 0.0) continue;
    Pair p;
    p.i = key.first;
    p.j = key.second;
    p.j_mhz = j_mhz;
    p.delta_mhz = cfg.omega_of(p.i) - cfg.omega_of(p.j);
    p.xx = x_op[static_cast<size_t>(p.i)] * x_op[static_cast<size_t>(p.j)];
    p.yy = y_op[static_cast<size_t>(p.i)] * y_op[static_cast<size_t>(p.j)];
    p.xy = x_op[static_cast<size_t>(p.i)] * y_op[static_cast<size_t>(p.j)];
    p.yx = y_op[static_cast<size_t>(p.i)] * x_op[static_cast<size_t>(p.j)];
    pairs.push_back(std::move(p));
  }

  // Static parts (MHz). The co-rotating truncation keeps only the residual
  // Z fields (the frame rotates at the nominal frequencies) plus the
  // frame-commuting dispersive TLS terms; both the lab frame and the exact
  // frame conjugation start from the full lab static part.
  const bool lab_generator = !rotating || !opts.rwa;
  Matrix h_static = Matrix::Zero(dim, dim);
  for (int i = 0; i < cfg.n; ++i) {
    const double coeff =
        lab_generator ? cfg.true_frequency_of(i) / 2.0 : cfg.frame_detuning_of(i) / 2.0;
    if (coeff != 0.0) h_static += coeff * embed_site(z1, i, n_sites);
  }
  for (int k = 0; k < n_tls; ++k) {
    const auto& spec = tls[static_cast<size_t>(k)];
    if (spec.chi == 0.0) continue;
    h_static += (spec.chi / 2.0) * (embed_site(z1, spec.qubit, n_sites) *
                                    embed_site(z1, cfg.n + k, n_sites));
  }
  if (lab_generator) {
    for (const auto& p : pairs) h_static += p.j_mhz * p.yy;
  }

  // Frame phases per basis state (MHz), for exact conjugation when the
  // co-rotating truncation is disabled.
  RealVector frame_freq = RealVector::Zero(dim);
  if (rotating && !opts.rwa) {
    for (long b = 0; b < dim; ++b) {
      double f = 0.0;
      for (int i = 0; i < cfg.n; ++i) {
        const bool excited = (b >> (n_sites - 1 - i)) & 1;
        f += (excited ? -0.5 : 0.5) * cfg.omega_of(i);
      }
      frame_freq(b) = f;
    }
  }

  // --- resolve drive segments against the AWG -----------------------------
  std::map<int, PerQubitDrives> drives;
  double max_drive_amp = 0.0;
  double f_osc = 0.0;  // fastest oscillation the integrator must resolve (MHz)
  double schedule_end = 0.0;
  for (const auto& [qubit, segments] : schedule.qubit_segments) {
    PerQubitDrives& pq = drives[qubit];
    double t_cursor = 0.0;
    double phi_z = 0.0;
    for (const auto& seg : segments) {
      ResolvedSegment rs;
      rs.qubit = qubit;
      rs.t0 = t_cursor;
      rs.t1 = t_cursor + seg.duration;
      rs.carrier_mhz = cfg.omega_of(seg.carrier_target) + seg.detuning;
      rs.delta_mhz = rs.carrier_mhz - cfg.omega_of(qubit);
      const auto n_samples = seg.hx.size();
      rs.amp.resize(n_samples);
      rs.phase.resize(n_samples);
      rs.hz_rate.resize(n_samples);
      rs.phi_z_at_start.resize(n_samples);
      for (size_t k = 0; k < n_samples; ++k) {
        const double t_mid = (static_cast<double>(k) + 0.5) * dt;
        const double w = ramp_window(t_mid, seg.duration, seg.ramp_time);
        const double hxy = std::hypot(seg.hx[k], seg.hy[k]);
        rs.amp[k] = awg_apply(cfg.awg, seg.amplitude * hxy * w);
        rs.phase[k] = std::atan2(seg.hy[k], seg.hx[k]) + cfg.awg.phase_offset;
        rs.hz_rate[k] = -kTwoPi * seg.amplitude * seg.hz[k] * w;
        rs.phi_z_at_start[k] = phi_z;
        phi_z += rs.hz_rate[k] * dt;
        max_drive_amp = std::max(max_drive_amp, rs.amp[k]);
        f_osc = std::max(f_osc, seg.amplitude * std::abs(seg.hz[k]));
      }
      if (seg.ramp_time > 0.0) f_osc = std::max(f_osc, 0.5 / seg.ramp_time);
      if (rotating && opts.rwa) {
        f_osc = std::max(f_osc, std::abs(rs.delta_mhz));
      } else if (rotating) {
        f_osc = std::max(f_osc, rs.carrier_mhz + cfg.omega_of(qubit));
      } else {
        f_osc = std::max(f_osc, rs.carrier_mhz);
      }
      pq.segments.push_back(std::move(rs));
      t_cursor += seg.duration;
    }
    pq.phi_z_final = phi_z;
    schedule_end = std::max(schedule_end, t_cursor);
  }
  if (rotating) {
    for (const auto& p : pairs) {
      f_osc = std::max(f_osc, opts.rwa ? std::abs(p.delta_mhz)
                                       : std::abs(p.delta_mhz) + 2.0 * std::abs(cfg.omega_of(p.j)));
    }
  }

  // --- dt_sample rejection bound ------------------------------------------
  // The bound protects the piecewise-constant envelope representation, so it
  // only applies when the schedule actually has samples; idle evolution is
  // integrated on the snapshot grid with its own substep refinement.
  if (schedule_end > 0.0) {
    // Spectral norm of the static part of the generator in the frame being
    // integrated: in the rotating frame the nominal frame diagonal is
    // subtracted before taking the norm.
    Matrix static_for_bound = h_static;
    if (rotating && !opts.rwa) {
      for (long b = 0; b < dim; ++b) static_for_bound(b, b) -= frame_freq(b);
    }
    double norm_bound = 0.0;
    if (dim > 1) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(static_for_bound, Eigen::EigenvaluesOnly);
      norm_bound = std::max(std::abs(es.eigenvalues().minCoeff()),
                            std::abs(es.eigenvalues().maxCoeff()));
    }
    if (rotating && opts.rwa) {
      for (const auto& p : pairs) norm_bound += std::abs(p.j_mhz);  // exchange terms
    }
    norm_bound += max_drive_amp * (rotating && opts.rwa ? 0.5 : 1.0);
    const double rotation = kTwoPi * norm_bound * dt;
    if (rotation > kRejectBudgetRad) {
      std::ostringstream msg;
      msg << "simulate_schedule: dt_sample = " << dt << " us is too coarse: generator bound "
          << norm_bound << " MHz rotates " << rotation << " rad per sample (limit "
          << kRejectBudgetRad << "); required dt_sample <= "
          << kRejectBudgetRad / (kTwoPi * norm_bound) << " us";
      throw std::invalid_argument(msg.str());
    }
  }

  // --- generator at a given instant (MHz) ----------------------------------
  auto hamiltonian_at = [&](double t) {
    Matrix h = h_static;
    if (rotating && opts.rwa) {
      for (const auto& p : pairs) {
        const double theta = kTwoPi * p.delta_mhz * t;
        h += 0.5 * p.j_mhz *
             (std::cos(theta) * (p.xx + p.yy) + std::sin(theta) * (p.xy - p.yx));
      }
    }
    for (const auto& [qubit, pq] : drives) {
      const ResolvedSegment* seg = pq.active_at(t);
      if (seg == nullptr) continue;
      const int k = seg->sample_of(t, dt);
      const double amp = seg->amp[static_cast<size_t>(k)];
      if (amp == 0.0) continue;
      const double phi_z = pq.phi_z_at(t);
      if (rotating && opts.rwa) {
        const double psi = kTwoPi * seg->delta_mhz * t + seg->phase[static_cast<size_t>(k)] + phi_z;
        h += 0.5 * amp *
             (std::cos(psi) * x_op[static_cast<size_t>(qubit)] +
              std::sin(psi) * y_op[static_cast<size_t>(qubit)]);
      } else {
        const double lab_phase =
            kTwoPi * seg->carrier_mhz * t + seg->phase[static_cast<size_t>(k)] + phi_z;
        h += amp * std::cos(lab_phase) * x_op[static_cast<size_t>(qubit)];
      }
    }
    if (rotating && !opts.rwa) {
      // Exact frame conjugation: R h R^dag - H_frame with diagonal R.
      Matrix conj = h;
      for (long a = 0; a < dim; ++a) {
        for (long b = 0; b < dim; ++b) {
          const double phase = kTwoPi * (frame_freq(a) - frame_freq(b)) * t;
          conj(a, b) *= std::exp(cplx(0.0, phase));
        }
      }
      for (long a = 0; a < dim; ++a) conj(a, a) -= frame_freq(a);
      return conj;
    }
    return h;
  };

  // --- noise channels, cached per interval length --------------------------
  std::map<long long, std::vector<NoiseChannel>> noise_cache;
  auto noise_for = [&](double interval) -> const std::vector<NoiseChannel>& {
    const auto key = static_cast<long long>(std::llround(interval * 1e9));
    auto it = noise_cache.find(key);
    if (it != noise_cache.end()) return it->second;
    std::vector<NoiseChannel> channels;
    for (int i = 0; i < cfg.n; ++i) {
      auto ch = make_noise(i, n_sites, cfg.t1_of(i), cfg.t2_of(i), interval);
      if (!ch.kraus.empty()) channels.push_back(std::move(ch));
    }
    for (int k = 0; k < n_tls; ++k) {
      const auto& spec = tls[static_cast<size_t>(k)];
      if (!spec.lifetime) continue;
      auto ch = make_noise(cfg.n + k, n_sites, spec.lifetime, std::nullopt, interval);
      if (!ch.kraus.empty()) channels.push_back(std::move(ch));
    }
    return noise_cache.emplace(key, std::move(channels)).first->second;
  };

  // --- event grid: sample boundaries plus snapshot times --------------------
  std::vector<double> events;
  const auto n_sched_samples = static_cast<long long>(std::llround(schedule_end / dt));
  for (long long k = 1; k <= n_sched_samples; ++k) events.push_back(static_cast<double>(k) * dt);
  for (double t : times) {
    if (t > 1e-12) events.push_back(t);
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               events.end());

  auto gauge_report = [&](const Matrix& state, double t) {
    if (!rotating) return state;
    Vector v = Vector::Ones(dim);
    bool any = false;
    for (const auto& [qubit, pq] : drives) {
      const double phi = pq.phi_z_at(t);
      if (phi == 0.0) continue;
      any = true;
      for (long b = 0; b < dim; ++b) {
        const bool excited = (b >> (n_sites - 1 - qubit)) & 1;
        v(b) *= std::exp(cplx(0.0, excited ? phi / 2.0 : -phi / 2.0));
      }
    }
    if (!any) return state;
    Matrix out = state;
    for (long a = 0; a < dim; ++a) {
      for (long b = 0; b < dim; ++b) out(a, b) *= std::conj(v(a)) * v(b);
    }
    return out;
  };

  std::vector<Matrix> snapshots;
  snapshots.reserve(times.size());
  size_t next_time = 0;
  while (next_time < times.size() && times[next_time] <= 1e-12) {
    snapshots.push_back(gauge_report(rho, 0.0));
    ++next_time;
  }

  double cur = 0.0;
  for (double target : events) {
    const double interval = target - cur;
    if (interval <= 1e-15) continue;
    const int n_sub = std::max(
        1, static_cast<int>(std::ceil(interval * kTwoPi * f_osc / kOscBudgetRad)));
    require(n_sub <= 2'000'000, "simulate_schedule: schedule oscillates too fast to integrate");
    const double h_sub = interval / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      const double t_mid = cur + (s + 0.5) * h_sub;
      const Matrix u = expm_hermitian(kTwoPi * hamiltonian_at(t_mid), h_sub);
      rho = u * rho * u.adjoint();
    }
    for (const auto& channel : noise_for(interval)) {
      Matrix next = Matrix::Zero(dim, dim);
      for (const auto& k_op : channel.kraus) next += k_op * rho * k_op.adjoint();
      rho = next;
    }
    cur = target;
    while (next_time < times.size() && std::abs(times[next_time] - cur) < 1e-12) {
      snapshots.push_back(gauge_report(rho, cur));
      ++next_time;
    }
  }
  require(next_time == times.size(),
          "simulate_schedule: internal error: snapshot times not all visited");
  return snapshots;
}

}  // namespace crsim
