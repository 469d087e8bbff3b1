// SPDX-License-Identifier: Apache-2.0
#include "topoflock/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"

namespace topoflock {

namespace {
constexpr double quiet_nan = std::numeric_limits<double>::quiet_NaN();
}

void LagrangianState::save_csv(const std::string& path) const {
  csv::Writer w(path, "alpha,X,V,psi");
  for (int k = 0; k < size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    w.row({alpha[i], X[i], V[i], psi0[i]});
  }
  w.close();
}

ThresholdReport threshold_check(const std::vector<double>& labels,
                                const std::vector<double>& values) {
  if (labels.size() != values.size() || labels.empty()) {
    throw config_error("threshold check: labels and values must match and be nonempty");
  }
  ThresholdReport report;
  double run_max = values[0];
  double run_max_label = labels[0];
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double drop = run_max - values[j];
    if (drop > report.gap) {
      report.gap = drop;
      report.alpha = run_max_label;
      report.beta = labels[j];
      report.satisfied = false;
    }
    if (values[j] > run_max) {
      run_max = values[j];
      run_max_label = labels[j];
    }
  }
  return report;
}

MassThresholdReport mass_threshold(const VelocityGrid& v0, const Kernel& kernel) {
  if (kernel.kind() != kernel_kind::pure || !kernel.bounded()) {
    throw unsupported_operation("mass threshold requires a bounded pure kernel");
  }
  const int n = v0.n;
  MassThresholdReport report;
  report.m.resize(static_cast<std::size_t>(n));
  report.a.resize(static_cast<std::size_t>(n));
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    phi[static_cast<std::size_t>(k)] = kernel.eval(static_cast<double>(k) / n);
  }
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double f =
          phi[static_cast<std::size_t>(j - i)] * (static_cast<double>(j - i) / n);
      acc[static_cast<std::size_t>(j)] += f;
      acc[static_cast<std::size_t>(i)] -= f;
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    report.m[k] = v0.midpoint(i);
    report.a[k] = v0.values[k] + acc[k] / n;
  }
  report.verdict = threshold_check(report.m, report.a);
  return report;
}

std::vector<double> compute_psi0(const std::vector<double>& alpha,
                                 const std::function<double(double)>& u0,
                                 const Kernel& kernel, bool radial) {
  if (!kernel.bounded()) {
    throw unsupported_operation("psi0 requires a bounded kernel");
  }
  const int p = static_cast<int>(alpha.size());
  if (p < 1) throw config_error("psi0: empty particle set");
  std::vector<double> acc(alpha.size(), 0.0);
  const bool pure = kernel.kind() == kernel_kind::pure;
  std::vector<double> phi;
  if (pure) {
    phi.resize(alpha.size());
    for (int k = 0; k < p; ++k) {
      phi[static_cast<std::size_t>(k)] =
          kernel.eval(radial ? 0.0 : static_cast<double>(k) / p);
    }
  }
  for (int k = 0; k < p; ++k) {
    for (int j = k + 1; j < p; ++j) {
      const double z = alpha[static_cast<std::size_t>(j)] - alpha[static_cast<std::size_t>(k)];
      double f;
      if (pure) {
        f = phi[static_cast<std::size_t>(j - k)] * z;
      } else {
        const double d = radial ? 0.0 : static_cast<double>(j - k) / p;
        f = kernel.antiderivative(d, z);
      }
      acc[static_cast<std::size_t>(j)] += f;
      acc[static_cast<std::size_t>(k)] -= f;
    }
  }
  std::vector<double> psi0(alpha.size());
  for (int k = 0; k < p; ++k) {
    const auto i = static_cast<std::size_t>(k);
    psi0[i] = u0(alpha[i]) + acc[i] / p;
  }
  return psi0;
}

double flow_lower_bound(double psi0_alpha, double psi0_beta, double alpha, double beta,
                        double sup_phi, double t) {
  if (!(beta > alpha)) throw config_error("flow lower bound: need alpha < beta");
  const double g = (psi0_beta - psi0_alpha) / (beta - alpha);
  if (sup_phi <= 0.0) return 1.0 + g * t;
  const double decay = std::exp(-sup_phi * t);
  return decay + g * (1.0 - decay) / sup_phi;
}

BlowupPrediction radial_blowup_bound(const std::vector<double>& labels,
                                     const std::vector<double>& psi0) {
  if (labels.size() != psi0.size() || labels.size() < 2) {
    throw config_error("blow-up bound: need >= 2 labeled samples");
  }
  BlowupPrediction out;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double drop = psi0[i] - psi0[j];
      const double width = labels[j] - labels[i];
      if (drop > 0.0 && width > 0.0) {
        const double t = width / drop;
        if (t < best) {
          best = t;
          out.applicable = true;
          out.alpha = labels[i];
          out.beta = labels[j];
          out.crossing_time = t;
          out.alternate_reciprocal = drop / width;
        }
      }
    }
  }
  return out;
}

void EulerianField::save_csv(const std::string& path) const {
  csv::Writer w(path, "x,rho,u");
  for (std::size_t k = 0; k < x.size(); ++k) {
    w.row({x[k], rho[k], u[k]});
  }
  w.close();
}

EulerianField eulerian_reconstruct(const LagrangianState& state) {
  const int p = state.size();
  if (p < 2) throw config_error("eulerian reconstruction: need >= 2 particles");
  for (int k = 0; k + 1 < p; ++k) {
    if (!(state.X[static_cast<std::size_t>(k + 1)] > state.X[static_cast<std::size_t>(k)])) {
      throw stability_error("eulerian reconstruction: particle ordering lost");
    }
  }
  EulerianField field;
  field.x = state.X;
  field.u = state.V;
  field.rho.resize(static_cast<std::size_t>(p));
  const double w = 1.0 / p;
  for (int k = 0; k < p; ++k) {
    double span;
    if (k == 0) {
      span = state.X[1] - state.X[0];
    } else if (k == p - 1) {
      span = state.X[static_cast<std::size_t>(p - 1)] - state.X[static_cast<std::size_t>(p - 2)];
    } else {
      span = 0.5 * (state.X[static_cast<std::size_t>(k + 1)] -
                    state.X[static_cast<std::size_t>(k - 1)]);
    }
    field.rho[static_cast<std::size_t>(k)] = w / span;
  }
  return field;
}

MassProfile particle_mass_profile(const LagrangianState& state) {
  const int p = state.size();
  if (p < 2) throw config_error("particle mass profile: need >= 2 particles");
  std::vector<double> nodes;
  std::vector<double> values;
  nodes.reserve(static_cast<std::size_t>(p) + 2);
  values.reserve(static_cast<std::size_t>(p) + 2);
  const double left = state.X[0] - 0.5 * (state.X[1] - state.X[0]);
  const double right = state.X[static_cast<std::size_t>(p - 1)] +
                       0.5 * (state.X[static_cast<std::size_t>(p - 1)] -
                              state.X[static_cast<std::size_t>(p - 2)]);
  nodes.push_back(left);
  values.push_back(0.0);
  for (int k = 0; k < p; ++k) {
    if (!(state.X[static_cast<std::size_t>(k)] > nodes.back())) {
      throw stability_error("particle mass profile: particle ordering lost");
    }
    nodes.push_back(state.X[static_cast<std::size_t>(k)]);
    values.push_back((k + 0.5) / p);
  }
  nodes.push_back(right);
  values.push_back(1.0);
  return MassProfile::from_cdf(nodes, values);
}

EQDiagnostics e_q_diagnostics(const LagrangianState& state) {
  const int p = state.size();
  if (p < 2) throw config_error("e/q diagnostics: need >= 2 particles");
  EQDiagnostics diag;
  diag.mid_alpha.resize(static_cast<std::size_t>(p - 1));
  diag.e.resize(static_cast<std::size_t>(p - 1));
  diag.q.resize(static_cast<std::size_t>(p - 1));
  for (int k = 0; k + 1 < p; ++k) {
    const auto i = static_cast<std::size_t>(k);
    diag.mid_alpha[i] = 0.5 * (state.alpha[i] + state.alpha[i + 1]);
    const double dx = state.X[i + 1] - state.X[i];
    const double rho = (dx > 0.0) ? (1.0 / p) / dx : 0.0;
    if (dx <= 0.0 || rho < 1e-12) {
      diag.e[i] = (dx > 0.0) ? (state.psi0[i + 1] - state.psi0[i]) / dx : quiet_nan;
      diag.q[i] = quiet_nan;
      ++diag.masked;
    } else {
      diag.e[i] = (state.psi0[i + 1] - state.psi0[i]) / dx;
      diag.q[i] = diag.e[i] / rho;
    }
  }
  return diag;
}

LagrangianFlow::LagrangianFlow(const Kernel& kernel, const MassProfile& rho0,
                               const std::function<double(double)>& u0, int P, bool radial)
    : kernel_(&kernel), radial_(radial), P_(P) {
  if (P < 2) throw config_error("lagrangian flow: need P >= 2");
  if (!kernel.bounded()) {
    throw unsupported_operation("lagrangian flow requires a bounded kernel");
  }
  pure_ = kernel.kind() == kernel_kind::pure;
  sup_phi_ = kernel.sup_norm();
  if (pure_) {
    phi_table_.resize(static_cast<std::size_t>(P));
    for (int k = 0; k < P; ++k) {
      phi_table_[static_cast<std::size_t>(k)] =
          kernel.eval(radial ? 0.0 : static_cast<double>(k) / P);
    }
  }
  std::vector<double> alpha = rho0.pushforward_uniform(P);
  std::vector<double> psi0 = compute_psi0(alpha, u0, kernel, radial);
  initial_.time = 0.0;
  initial_.alpha = std::move(alpha);
  initial_.psi0 = std::move(psi0);
  initial_.X = initial_.alpha;
  initial_.V = velocities(initial_.X);
}

std::vector<double> LagrangianFlow::alignment(const std::vector<double>& X) const {
  const int p = P_;
  std::vector<double> acc(X.size(), 0.0);
  if (pure_) {
    for (int k = 0; k < p; ++k) {
      const double xk = X[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < p; ++j) {
        const double f = phi_table_[static_cast<std::size_t>(j - k)] *
                         (X[static_cast<std::size_t>(j)] - xk);
        acc[static_cast<std::size_t>(j)] += f;
        acc[static_cast<std::size_t>(k)] -= f;
      }
    }
  } else {
    for (int k = 0; k < p; ++k) {
      const double xk = X[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < p; ++j) {
        const double d = radial_ ? 0.0 : static_cast<double>(j - k) / p;
        const double f = kernel_->antiderivative(d, X[static_cast<std::size_t>(j)] - xk);
        acc[static_cast<std::size_t>(j)] += f;
        acc[static_cast<std::size_t>(k)] -= f;
      }
    }
  }
  for (double& s : acc) s /= p;
  return acc;
}

void LagrangianFlow::rhs(const std::vector<double>& X, std::vector<double>& out) const {
  out = alignment(X);
  for (int k = 0; k < P_; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out[i] = initial_.psi0[i] - out[i];
  }
}

std::vector<double> LagrangianFlow::velocities(const std::vector<double>& X) const {
  std::vector<double> v;
  rhs(X, v);
  return v;
}

void LagrangianFlow::rk4(std::vector<double>& X, double dt) const {
  const std::size_t n = X.size();
  std::vector<double> k1, k2, k3, k4, tmp(n);
  rhs(X, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = X[i] + 0.5 * dt * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = X[i] + 0.5 * dt * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = X[i] + dt * k3[i];
  rhs(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    X[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

LagrangianState LagrangianFlow::make_state(const std::vector<double>& X, double t) const {
  LagrangianState s;
  s.time = t;
  s.alpha = initial_.alpha;
  s.X = X;
  s.V = velocities(X);
  s.psi0 = initial_.psi0;
  return s;
}

LagrangianState LagrangianFlow::step(const LagrangianState& state, double dt) const {
  std::vector<double> X = state.X;
  rk4(X, dt);
  return make_state(X, state.time + dt);
}

FlowRun LagrangianFlow::run(double dt, const std::vector<double>& output_times) const {
  if (!(dt > 0.0)) throw config_error("lagrangian run: dt must be positive");
  FlowRun out;
  const int p = P_;
  std::vector<double> g0(static_cast<std::size_t>(p - 1));
  for (int k = 0; k + 1 < p; ++k) {
    g0[static_cast<std::size_t>(k)] = initial_.alpha[static_cast<std::size_t>(k + 1)] -
                                      initial_.alpha[static_cast<std::size_t>(k)];
  }

  std::vector<double> X = initial_.X;
  double t = 0.0;
  out.gap_times.push_back(0.0);
  out.gap_ratios.push_back(1.0);

  const double mean_v0 = [&] {
    long double s = 0.0L;
    for (double v : initial_.V) s += v;
    return static_cast<double>(s / p);
  }();

  auto scan_gaps = [&]() -> bool {
    double worst = std::numeric_limits<double>::infinity();
    int worst_cell = -1;
    bool inversion = false;
    for (int k = 0; k + 1 < p; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double gap = X[i + 1] - X[i];
      if (gap < 0.0) inversion = true;
      if (g0[i] > 0.0) {
        const double ratio = gap / g0[i];
        if (ratio < worst) {
          worst = ratio;
          worst_cell = k;
        }
      }
    }
    if (worst_cell >= 0) {
      out.gap_times.push_back(t);
      out.gap_ratios.push_back(worst);
    }
    if (inversion || (worst_cell >= 0 && worst < 1e-8)) {
      BlowupEvent event;
      event.time = t;
      event.cell = worst_cell;
      event.gap = (worst_cell >= 0)
                      ? X[static_cast<std::size_t>(worst_cell + 1)] -
                            X[static_cast<std::size_t>(worst_cell)]
                      : 0.0;
      event.inversion = inversion;
      out.blowup = event;
      out.halted = true;
      return false;
    }
    return true;
  };

  auto record_output = [&]() {
    LagrangianState s = make_state(X, t);
    // Momentum and per-particle psi reconstruction drift against t = 0.
    long double mv = 0.0L;
    for (double v : s.V) mv += v;
    out.momentum_drift =
        std::max(out.momentum_drift, std::abs(static_cast<double>(mv / p) - mean_v0));
    const std::vector<double> align = alignment(s.X);
    for (int k = 0; k < p; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double psi = s.V[i] + align[i];
      out.psi_drift = std::max(out.psi_drift, std::abs(psi - initial_.psi0[i]));
    }
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < p; ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (g0[i] <= 0.0) continue;
      const double quotient = (X[i + 1] - X[i]) / g0[i];
      const double bound =
          flow_lower_bound(initial_.psi0[i], initial_.psi0[i + 1], initial_.alpha[i],
                           initial_.alpha[i + 1], sup_phi_, t);
      margin = std::min(margin, quotient - bound);
    }
    out.gronwall_margins.push_back(margin);
    out.outputs.push_back(std::move(s));
  };

  for (double t_out : output_times) {
    if (t_out < t - 1e-12) {
      throw config_error("lagrangian run: output times must be nondecreasing");
    }
    const double span = t_out - t;
    if (span > 1e-14) {
      const int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
      const double h = span / steps;
      for (int s = 0; s < steps; ++s) {
        rk4(X, h);
        t += h;
        if (!scan_gaps()) {
          record_output();
          return out;
        }
      }
    }
    t = t_out;
    record_output();
  }
  return out;
}

}  // namespace topoflock
