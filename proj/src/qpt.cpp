// Copyright 2026 the crsim authors
// SPDX-License-Identifier: Apache-2.0

#include "crsim/qpt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "crsim/density.hpp"
#include "crsim/linalg.hpp"
#include "crsim/pauli.hpp"

namespace crsim {
namespace {

constexpr char kPrepChars[4] = {'0', '1', '+', 'i'};
constexpr char kBasisChars[3] = {'X', 'Y', 'Z'};

std::string digits_string(int index, int n, const char* alphabet, int base) {
  std::string s(static_cast<std::size_t>(n), alphabet[0]);
  for (int q = n - 1; q >= 0; --q) {
    s[static_cast<std::size_t>(q)] = alphabet[index % base];
    index /= base;
  }
  return s;
}

int pow_int(int base, int exp) {
  int out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

/// Row-major vectorization; rows of m are stacked in order.
Vector vec_rowmajor(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  }
  return v;
}

/// Unitary change of basis between the Choi matrix and the Pauli-basis
/// process matrix: column m is the row-major vectorization of P_m / sqrt(d).
Matrix choi_to_chi_basis(int n_qubits) {
  const int d = 1 << n_qubits;
  const auto labels = all_pauli_labels(n_qubits);
  Matrix w(d * d, d * d);
  for (std::size_t m = 0; m < labels.size(); ++m) {
    w.col(static_cast<Eigen::Index>(m)) =
        vec_rowmajor(pauli_matrix(labels[m])) / std::sqrt(static_cast<double>(d));
  }
  return w;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

ConstantDrive cr_tone(int qubit, int carrier_target, double omega_mhz) {
  ConstantDrive d;
  d.qubit = qubit;
  d.carrier_target = carrier_target;
  d.amplitude = omega_mhz;
  return d;
}

}  // namespace

Matrix project_cp(const Matrix& chi_raw, std::vector<std::string>* warnings) {
  require(chi_raw.rows() == chi_raw.cols() && chi_raw.rows() > 0,
          "project_cp: chi must be square");
  const Matrix herm = 0.5 * (chi_raw + chi_raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  RealVector evals = es.eigenvalues();
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) < 0.0) {
      clipped -= evals(i);
      evals(i) = 0.0;
    }
  }
  const double total = evals.sum();
  require(total > 0.0, "project_cp: no positive eigenvalue mass to keep");
  if (warnings != nullptr && clipped > 1e-9) {
    warnings->push_back("positive-cone projection clipped eigenvalue mass " +
                        format_double("%.3e", clipped));
  }
  evals /= total;
  return es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
}

ChiMatrix chi_from_ptm(const RealMatrix& ptm, int n_qubits) {
  require(n_qubits >= 1 && n_qubits <= 3, "chi_from_ptm: 1 to 3 qubits");
  const int d = 1 << n_qubits;
  const int n_labels = d * d;
  require(ptm.rows() == n_labels && ptm.cols() == n_labels,
          "chi_from_ptm: transfer matrix must be 4^n x 4^n");
  const auto labels = all_pauli_labels(n_qubits);
  std::vector<Matrix> paulis;
  paulis.reserve(labels.size());
  for (const auto& l : labels) paulis.push_back(pauli_matrix(l));

  Matrix choi = Matrix::Zero(n_labels, n_labels);
  const double scale = 1.0 / static_cast<double>(n_labels);
  for (int l = 0; l < n_labels; ++l) {
    for (int m = 0; m < n_labels; ++m) {
      if (ptm(l, m) == 0.0) continue;
      choi += (ptm(l, m) * scale) *
              kron(paulis[static_cast<std::size_t>(l)],
                   paulis[static_cast<std::size_t>(m)].transpose());
    }
  }
  const Matrix w = choi_to_chi_basis(n_qubits);

  ChiMatrix chi;
  chi.n_qubits = n_qubits;
  chi.entries = project_cp(w.adjoint() * choi * w, &chi.warnings);
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi.entries);
  chi.lambda0 = es.eigenvalues()(es.eigenvalues().size() - 1);
  return chi;
}

RealMatrix ptm_from_chi(const ChiMatrix& chi) {
  const int d = 1 << chi.n_qubits;
  const int n_labels = d * d;
  require(chi.entries.rows() == n_labels && chi.entries.cols() == n_labels,
          "ptm_from_chi: entries do not match n_qubits");
  const auto labels = all_pauli_labels(chi.n_qubits);
  std::vector<Matrix> paulis;
  paulis.reserve(labels.size());
  for (const auto& l : labels) paulis.push_back(pauli_matrix(l));

  const Matrix w = choi_to_chi_basis(chi.n_qubits);
  const Matrix choi = w * chi.entries * w.adjoint();
  RealMatrix ptm(n_labels, n_labels);
  for (int l = 0; l < n_labels; ++l) {
    for (int m = 0; m < n_labels; ++m) {
      const Matrix k = kron(paulis[static_cast<std::size_t>(l)],
                            paulis[static_cast<std::size_t>(m)].transpose());
      // Tr(choi * k) without forming the product.
      ptm(l, m) = choi.cwiseProduct(k.transpose()).sum().real();
    }
  }
  return ptm;
}

ChiMatrix chi_of_unitary(const Matrix& u) {
  require(u.rows() == u.cols() && u.rows() > 0, "chi_of_unitary: square input");
  int n = 0;
  while ((1 << n) < u.rows()) ++n;
  require((1 << n) == u.rows() && n >= 1 && n <= 3,
          "chi_of_unitary: dimension must be 2^n, n in 1..3");
  require(unitarity_defect(u) < 1e-6, "chi_of_unitary: input is not unitary");
  const int d = 1 << n;
  const auto labels = all_pauli_labels(n);
  Vector v(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t l = 0; l < labels.size(); ++l) {
    v(static_cast<Eigen::Index>(l)) = (pauli_matrix(labels[l]) * u).trace() / double(d);
  }
  ChiMatrix chi;
  chi.n_qubits = n;
  chi.entries = (v * v.adjoint()) / v.squaredNorm();
  chi.lambda0 = 1.0;
  return chi;
}

DominantUnitary dominant_unitary(const ChiMatrix& chi) {
  const int d = 1 << chi.n_qubits;
  const int n_labels = d * d;
  require(chi.entries.rows() == n_labels && chi.entries.cols() == n_labels,
          "dominant_unitary: entries do not match n_qubits");
  const Matrix herm = 0.5 * (chi.entries + chi.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  const Eigen::Index top = es.eigenvalues().size() - 1;

  DominantUnitary out;
  out.lambda0 = es.eigenvalues()(top);
  out.gap = top > 0 ? out.lambda0 - es.eigenvalues()(top - 1) : out.lambda0;
  out.degenerate = out.gap < 1e-6;

  const auto labels = all_pauli_labels(chi.n_qubits);
  const Vector v = es.eigenvectors().col(top);
  Matrix u = Matrix::Zero(d, d);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    u += v(static_cast<Eigen::Index>(l)) * pauli_matrix(labels[l]);
  }
  u = polar_unitary(u);

  // Global phase: identity Pauli coefficient real nonnegative; when it
  // vanishes, the first nonzero coefficient in canonical order is made
  // real positive instead.
  cplx c = u.trace() / static_cast<double>(d);
  if (std::abs(c) <= 1e-9) {
    for (std::size_t l = 1; l < labels.size(); ++l) {
      const cplx cl = (pauli_matrix(labels[l]) * u).trace() / static_cast<double>(d);
      if (std::abs(cl) > 1e-9) {
        c = cl;
        break;
      }
    }
  }
  if (std::abs(c) > 0.0) u *= std::conj(c) / std::abs(c);
  out.u = u;
  return out;
}

RateTable effective_rates(const Matrix& u, double t_us) {
  require(t_us > 0.0, "effective_rates: duration must be positive");
  return RateTable::from_matrix(log_unitary(u, t_us));
}

std::vector<ChiMatrix> run_qpt_series(MeasurementProvider& provider,
                                      const std::vector<int>& qubits,
                                      const DriveProgram& drives,
                                      const std::vector<double>& durations_us, int shots) {
  const int n = static_cast<int>(qubits.size());
  require(n >= 1 && n <= 3, "run_qpt: register must have 1 to 3 qubits");
  require(!durations_us.empty(), "run_qpt: need at least one duration");
  for (std::size_t i = 0; i < durations_us.size(); ++i) {
    require(durations_us[i] > 0.0, "run_qpt: durations must be positive");
    require(i == 0 || durations_us[i] > durations_us[i - 1],
            "run_qpt: durations must be strictly increasing");
  }
  require(shots == 0 || shots >= 256,
          "run_qpt: use exact expectations (shots = 0) or at least 256 shots per circuit");

  const int d = 1 << n;
  const int n_labels = d * d;
  const int n_preps = n_labels;
  const int n_bases = pow_int(3, n);
  const auto labels = all_pauli_labels(n);

  // One provider session per (preparation, basis) pair, all durations at once.
  std::vector<std::vector<std::vector<MeasurementRecord>>> records(
      static_cast<std::size_t>(n_preps));
  ExperimentSpec spec;
  spec.register_qubits = qubits;
  spec.drives = drives;
  spec.shots = shots;
  for (int k = 0; k < n_preps; ++k) {
    spec.prep = digits_string(k, n, kPrepChars, 4);
    auto& per_basis = records[static_cast<std::size_t>(k)];
    per_basis.reserve(static_cast<std::size_t>(n_bases));
    for (int b = 0; b < n_bases; ++b) {
      spec.basis = digits_string(b, n, kBasisChars, 3);
      per_basis.push_back(provider.run_series(spec, durations_us));
    }
  }

  // Preparation overlaps s(M, k) = Tr(P_M rho_k), known exactly.
  RealMatrix s(n_labels, n_preps);
  for (int k = 0; k < n_preps; ++k) {
    const Matrix rho = pure_density(prep_state(digits_string(k, n, kPrepChars, 4)));
    s.col(k) = pauli_decompose(rho) * static_cast<double>(d);
  }
  Eigen::JacobiSVD<RealMatrix> svd(s);
  const double cond = svd.singularValues()(0) / svd.singularValues()(s.cols() - 1);
  std::vector<std::string> base_warnings;
  if (cond > 1e8) {
    base_warnings.push_back("preparation matrix is ill-conditioned (condition " +
                            format_double("%.3e", cond) + "); rates are unreliable");
  }
  const auto s_solver = s.transpose().colPivHouseholderQr();

  // Measurement bases consistent with each label (identity marginalized).
  std::vector<std::vector<int>> consistent(static_cast<std::size_t>(n_labels));
  for (int l = 1; l < n_labels; ++l) {
    const std::string& label = labels[static_cast<std::size_t>(l)];
    for (int b = 0; b < n_bases; ++b) {
      const std::string basis = digits_string(b, n, kBasisChars, 3);
      bool ok = true;
      for (int q = 0; q < n && ok; ++q) {
        const char lc = label[static_cast<std::size_t>(q)];
        ok = lc == 'I' || lc == basis[static_cast<std::size_t>(q)];
      }
      if (ok) consistent[static_cast<std::size_t>(l)].push_back(b);
    }
  }

  std::vector<ChiMatrix> out;
  out.reserve(durations_us.size());
  for (std::size_t di = 0; di < durations_us.size(); ++di) {
    RealMatrix m(n_labels, n_preps);
    m.row(0).setOnes();
    for (int l = 1; l < n_labels; ++l) {
      const auto& bases = consistent[static_cast<std::size_t>(l)];
      for (int k = 0; k < n_preps; ++k) {
        double acc = 0.0;
        for (int b : bases) {
          acc += records[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)][di]
                     .expectation(labels[static_cast<std::size_t>(l)]);
        }
        m(l, k) = acc / static_cast<double>(bases.size());
      }
    }
    // m = R s  =>  R^T = (s^T)^{-1} m^T.
    const RealMatrix ptm = s_solver.solve(m.transpose()).transpose();
    ChiMatrix chi = chi_from_ptm(ptm, n);
    chi.condition = cond;
    chi.warnings.insert(chi.warnings.begin(), base_warnings.begin(), base_warnings.end());
    out.push_back(std::move(chi));
  }
  return out;
}

ChiMatrix run_qpt(MeasurementProvider& provider, const std::vector<int>& qubits,
                  const DriveProgram& drives, double duration_us, int shots) {
  return run_qpt_series(provider, qubits, drives, {duration_us}, shots).front();
}

BranchResolved resolve_branch(const std::vector<std::pair<double, RateTable>>& tables,
                              int k_max, double std_threshold) {
  require(tables.size() >= 3, "resolve_branch: need at least 3 durations");
  require(k_max >= 0 && k_max <= 64, "resolve_branch: k_max must be in [0, 64]");
  require(std_threshold > 0.0, "resolve_branch: std_threshold must be positive");
  const int nq = tables.front().second.n_qubits();
  const int nt = static_cast<int>(tables.size());
  std::set<double> distinct;
  std::set<std::string> support;
  for (const auto& [t, table] : tables) {
    require(t > 0.0, "resolve_branch: durations must be positive");
    require(table.n_qubits() == nq, "resolve_branch: tables must share the register width");
    distinct.insert(t);
    for (const auto& [label, rate] : table.raw()) support.insert(label);
  }
  require(static_cast<int>(distinct.size()) == nt,
          "resolve_branch: durations must be distinct");

  BranchResolved out;
  out.rates = RateTable(nq);

  const int n_choices = 2 * k_max + 1;
  const bool exhaustive = std::pow(static_cast<double>(n_choices), nt) <= 1e6;

  std::vector<double> r(static_cast<std::size_t>(nt)), step(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) step[static_cast<std::size_t>(j)] = 0.5 / tables[static_cast<std::size_t>(j)].first;

  for (const std::string& label : support) {
    for (int j = 0; j < nt; ++j) {
      r[static_cast<std::size_t>(j)] = tables[static_cast<std::size_t>(j)].second.get(label);
    }

    double best_sse = std::numeric_limits<double>::infinity();
    int best_ksum = 0;
    double best_mean = 0.0;
    std::vector<int> best_k(static_cast<std::size_t>(nt), 0);

    const auto consider = [&](const std::vector<int>& k) {
      double mean = 0.0;
      for (int j = 0; j < nt; ++j) {
        mean += r[static_cast<std::size_t>(j)] +
                k[static_cast<std::size_t>(j)] * step[static_cast<std::size_t>(j)];
      }
      mean /= nt;
      double sse = 0.0;
      int ksum = 0;
      for (int j = 0; j < nt; ++j) {
        const double c = r[static_cast<std::size_t>(j)] +
                         k[static_cast<std::size_t>(j)] * step[static_cast<std::size_t>(j)];
        sse += (c - mean) * (c - mean);
        ksum += std::abs(k[static_cast<std::size_t>(j)]);
      }
      const double tie = 1e-9 * (1.0 + std::min(sse, best_sse));
      if (sse < best_sse - tie ||
          (std::abs(sse - best_sse) <= tie &&
           (ksum < best_ksum ||
            (ksum == best_ksum && std::abs(mean) < std::abs(best_mean) - 1e-15)))) {
        best_sse = sse;
        best_ksum = ksum;
        best_mean = mean;
        best_k = k;
      }
    };

    if (exhaustive) {
      std::vector<int> k(static_cast<std::size_t>(nt), -k_max);
      while (true) {
        consider(k);
        int j = 0;
        while (j < nt && k[static_cast<std::size_t>(j)] == k_max) {
          k[static_cast<std::size_t>(j)] = -k_max;
          ++j;
        }
        if (j == nt) break;
        ++k[static_cast<std::size_t>(j)];
      }
    } else {
      // Anchor scan: every correctable value of every duration is a
      // candidate constant; the per-duration choice decouples for a fixed
      // constant, and one mean-refinement pass tightens each candidate.
      std::vector<int> k(static_cast<std::size_t>(nt), 0);
      const auto nearest = [&](double target) {
        for (int j = 0; j < nt; ++j) {
          const double ideal =
              (target - r[static_cast<std::size_t>(j)]) / step[static_cast<std::size_t>(j)];
          k[static_cast<std::size_t>(j)] = static_cast<int>(
              std::clamp<long long>(std::llround(ideal), -k_max, k_max));
        }
      };
      for (int j0 = 0; j0 < nt; ++j0) {
        for (int k0 = -k_max; k0 <= k_max; ++k0) {
          const double anchor =
              r[static_cast<std::size_t>(j0)] + k0 * step[static_cast<std::size_t>(j0)];
          nearest(anchor);
          consider(k);
          double mean = 0.0;
          for (int j = 0; j < nt; ++j) {
            mean += r[static_cast<std::size_t>(j)] +
                    k[static_cast<std::size_t>(j)] * step[static_cast<std::size_t>(j)];
          }
          nearest(mean / nt);
          consider(k);
        }
      }
    }

    double var = 0.0;
    for (int j = 0; j < nt; ++j) {
      const double c = r[static_cast<std::size_t>(j)] +
                       best_k[static_cast<std::size_t>(j)] * step[static_cast<std::size_t>(j)];
      var += (c - best_mean) * (c - best_mean);
    }
    const double sample_std = std::sqrt(var / (nt - 1));
    out.per_label_std[label] = sample_std;
    out.corrections[label] = best_k;
    if (sample_std > std_threshold) {
      out.ambiguous.push_back(label);
      double principal_mean = 0.0;
      for (int j = 0; j < nt; ++j) principal_mean += r[static_cast<std::size_t>(j)];
      out.rates.set(label, principal_mean / nt);
      out.warnings.push_back("label " + label + " stays inconsistent across durations (std " +
                             format_double("%.3f", sample_std) +
                             " MHz); principal-branch mean returned");
    } else {
      out.rates.set(label, best_mean);
    }
  }
  return out;
}

AdditivityReport additivity_suite(MeasurementProvider& provider, int q1, int q2, int q3,
                                  double omega_mhz, const AdditivityOptions& options) {
  require(q1 != q2 && q2 != q3 && q1 != q3, "additivity_suite: qubits must be distinct");
  require(omega_mhz >= 0.0, "additivity_suite: drive amplitude must be nonnegative");
  require(options.durations.size() >= 3,
          "additivity_suite: need at least 3 durations for branch resolution");

  std::array<DriveProgram, 4> programs;
  programs[1].drives.push_back(cr_tone(q1, q2, omega_mhz));
  programs[2].drives.push_back(cr_tone(q3, q2, omega_mhz));
  programs[3].drives.push_back(cr_tone(q1, q2, omega_mhz));
  programs[3].drives.push_back(cr_tone(q3, q2, omega_mhz));

  AdditivityReport report;
  for (std::size_t p = 0; p < 4; ++p) {
    const std::string name = AdditivityReport::kProtocolNames[p];
    try {
      const auto chis = run_qpt_series(provider, {q1, q2}, programs[p], options.durations,
                                       options.shots);
      std::vector<std::pair<double, RateTable>> tables;
      tables.reserve(chis.size());
      for (std::size_t i = 0; i < chis.size(); ++i) {
        const auto dom = dominant_unitary(chis[i]);
        if (dom.degenerate) {
          report.warnings.push_back(name + ": degenerate dominant eigenvalue (gap " +
                                    format_double("%.2e", dom.gap) + ")");
        }
        for (const auto& w : chis[i].warnings) report.warnings.push_back(name + ": " + w);
        tables.emplace_back(options.durations[i],
                            effective_rates(dom.u, options.durations[i]));
      }
      report.protocols[p] = resolve_branch(tables, options.k_max, options.std_threshold);
      for (const auto& w : report.protocols[p].warnings) {
        report.warnings.push_back(name + ": " + w);
      }
      report.completed[p] = true;
    } catch (const std::exception& e) {
      report.warnings.push_back(name + " failed: " + e.what());
    }
  }

  if (report.completed[0] && report.completed[1] && report.completed[2]) {
    report.predicted = report.protocols[0].rates + report.protocols[1].rates +
                       report.protocols[2].rates;
  }
  if (report.completed[3]) report.measured = report.protocols[3].rates;
  if (report.completed[0] && report.completed[1] && report.completed[2] &&
      report.completed[3]) {
    std::set<std::string> labels;
    for (const auto& [l, v] : report.predicted.raw()) labels.insert(l);
    for (const auto& [l, v] : report.measured.raw()) labels.insert(l);
    for (const auto& l : labels) {
      report.deviations[l] = std::abs(report.predicted.get(l) - report.measured.get(l));
    }
  }
  return report;
}

ThreeQubitResult three_qubit_qpt(MeasurementProvider& provider, int q1, int q2, int q3,
                                 double omega_mhz, const ThreeQubitOptions& options) {
  require(q1 != q2 && q2 != q3 && q1 != q3, "three_qubit_qpt: qubits must be distinct");
  require(omega_mhz >= 0.0, "three_qubit_qpt: drive amplitude must be nonnegative");
  require(options.duration > 0.0, "three_qubit_qpt: duration must be positive");

  DriveProgram drives;
  drives.drives.push_back(cr_tone(q1, q2, omega_mhz));
  drives.drives.push_back(cr_tone(q3, q2, omega_mhz));

  ThreeQubitResult result;
  const ChiMatrix chi =
      run_qpt(provider, {q1, q2, q3}, drives, options.duration, options.shots);
  result.warnings = chi.warnings;
  const auto dom = dominant_unitary(chi);
  if (dom.degenerate) {
    result.warnings.push_back("degenerate dominant eigenvalue (gap " +
                              format_double("%.2e", dom.gap) + ")");
  }
  result.rates = effective_rates(dom.u, options.duration);
  result.expected_labels = {"IIZ", "IXI", "IXZ", "ZII", "ZXI"};

  result.min_expected = std::numeric_limits<double>::infinity();
  for (const auto& l : result.expected_labels) {
    result.min_expected = std::min(result.min_expected, std::abs(result.rates.get(l)));
  }
  for (const auto& l : all_pauli_labels(3)) {
    if (l == "III") continue;
    if (std::find(result.expected_labels.begin(), result.expected_labels.end(), l) !=
        result.expected_labels.end()) {
      continue;
    }
    result.max_spurious = std::max(result.max_spurious, std::abs(result.rates.get(l)));
  }
  result.spurious_ratio = result.min_expected > 0.0
                              ? result.max_spurious / result.min_expected
                              : std::numeric_limits<double>::infinity();
  if (result.min_expected == 0.0) {
    result.warnings.push_back("an expected label has zero rate; spurious ratio undefined");
  }
  return result;
}

}  // namespace crsim
