// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace crsim {

namespace {

bool divides(double dt, double duration) {
  const double ratio = duration / dt;
  return std::abs(ratio - std::round(ratio)) < 1e-6;
}

}  // namespace

double PulseSchedule::total_duration() const {
  double longest = 0.0;
  for (const auto& [qubit, segments] : qubit_segments) {
    double total = 0.0;
    for (const auto& seg : segments) total += seg.duration;
    longest = std::max(longest, total);
  }
  return longest;
}

void PulseSchedule::validate(int n_qubits) const {
  require(dt_sample > 0.0, "PulseSchedule: dt_sample must be positive");
  double common_total = -1.0;
  for (const auto& [qubit, segments] : qubit_segments) {
    require(qubit >= 0 && qubit < n_qubits, "PulseSchedule: driven qubit index out of range");
    double total = 0.0;
    for (const auto& seg : segments) {
      require(seg.duration > 0.0, "PulseSchedule: segment duration must be positive");
      require(seg.carrier_target >= 0 && seg.carrier_target < n_qubits,
              "PulseSchedule: carrier_target out of range");
      require(seg.ramp_time >= 0.0 && 2.0 * seg.ramp_time <= seg.duration + 1e-12,
              "PulseSchedule: ramps must fit inside the segment");
      require(seg.amplitude >= 0.0, "PulseSchedule: amplitude must be >= 0");
      require(divides(dt_sample, seg.duration),
              "PulseSchedule: dt_sample must divide every segment duration");
      const auto n_samples = static_cast<size_t>(std::llround(seg.duration / dt_sample));
      for (const auto* env : {&seg.hx, &seg.hy, &seg.hz}) {
        require(env->size() == n_samples,
                "PulseSchedule: envelope arrays must have duration/dt_sample samples");
        for (double h : *env) {
          require(std::abs(h) <= 1.0 + 1e-12, "PulseSchedule: envelopes must satisfy |h| <= 1");
        }
      }
      total += seg.duration;
    }
    if (segments.empty()) continue;
    if (common_total < 0.0) {
      common_total = total;
    } else {
      require(std::abs(common_total - total) < 1e-9,
              "PulseSchedule: total durations must be equal across driven qubits");
    }
  }
}

PulseSchedule to_pulse_schedule(const DriveProgram& program, double duration_us) {
  require(duration_us > 0.0, "to_pulse_schedule: duration must be positive");

  double dt = program.dt_sample;
  if (dt <= 0.0) {
    // Keep the per-sample rotation of the strongest tone an order of
    // magnitude below the simulator's 0.1 rad rejection bound, with a
    // floor to bound the sample count for very strong drives.
    double scale_mhz = 1.0;
    for (const auto& d : program.drives) {
      scale_mhz = std::max(scale_mhz, d.amplitude + std::abs(d.detuning));
    }
    dt = std::min(0.01, 0.01 / (kTwoPi * scale_mhz));
    dt = std::max(dt, 1e-5);
  }
  // Snap to an integer number of samples.
  const auto n_samples = static_cast<size_t>(std::max<long long>(1, std::llround(duration_us / dt)));
  dt = duration_us / static_cast<double>(n_samples);

  PulseSchedule schedule;
  schedule.dt_sample = dt;
  for (const auto& d : program.drives) {
    require(schedule.qubit_segments.count(d.qubit) == 0,
            "to_pulse_schedule: one constant tone per qubit (segments are sequential, "
            "not simultaneous); synthesize combined envelopes directly instead");
    PulseSegment seg;
    seg.duration = duration_us;
    seg.carrier_target = d.carrier_target;
    seg.detuning = d.detuning;
    seg.amplitude = d.amplitude;
    seg.ramp_time = d.ramp_time;
    require(d.xy >= 0.0 && d.xy <= 1.0, "to_pulse_schedule: xy scale must be in [0, 1]");
    seg.hx.assign(n_samples, d.xy * std::cos(d.phase));
    seg.hy.assign(n_samples, d.xy * std::sin(d.phase));
    seg.hz.assign(n_samples, d.hz);
    schedule.qubit_segments[d.qubit].push_back(std::move(seg));
  }
  return schedule;
}

}  // namespace crsim
