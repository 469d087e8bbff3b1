// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topoflock/kernels.hpp"
#include "topoflock/mass_profile.hpp"
#include "topoflock/velocity_grid.hpp"

namespace topoflock {

// Particle snapshot of the flow-map ODE. Labels alpha are quantiles of the
// initial density, each particle carries mass 1/P, and psi0 is conserved.
struct LagrangianState {
  double time = 0.0;
  std::vector<double> alpha;
  std::vector<double> X;
  std::vector<double> V;
  std::vector<double> psi0;

  int size() const { return static_cast<int>(X.size()); }
  // Columns: alpha,X,V,psi.
  void save_csv(const std::string& path) const;
};

struct ThresholdReport {
  bool satisfied = true;
  // Worst violating pair (labels) and its positive drop psi0(alpha) - psi0(beta).
  double alpha = 0.0;
  double beta = 0.0;
  double gap = 0.0;
};

// Scans ordered samples for decreasing pairs; reports the steepest drop rate pair.
ThresholdReport threshold_check(const std::vector<double>& labels,
                                const std::vector<double>& values);

struct MassThresholdReport {
  std::vector<double> m;
  std::vector<double> a;
  ThresholdReport verdict;
};

// a(m) = v0(m) + (1/N) sum_j phi(|m_i - m_j|) (m_i - m_j) on the midpoint grid.
MassThresholdReport mass_threshold(const VelocityGrid& v0, const Kernel& kernel);

// psi0(alpha_k) = u0(alpha_k) + (1/P) sum_j Phi(d_kj, alpha_k - alpha_j) with
// d_kj = |k - j| / P (0 in radial mode).
std::vector<double> compute_psi0(const std::vector<double>& alpha,
                                 const std::function<double(double)>& u0,
                                 const Kernel& kernel, bool radial = false);

// Lower bound on the adjacent difference quotient (X(beta,t)-X(alpha,t))/(beta-alpha):
// exp(-s t) + g (1 - exp(-s t)) / s with s = sup|phi| and g the psi0 difference quotient.
double flow_lower_bound(double psi0_alpha, double psi0_beta, double alpha, double beta,
                        double sup_phi, double t);

struct BlowupPrediction {
  bool applicable = false;
  double alpha = 0.0;
  double beta = 0.0;
  // Crossing time (beta - alpha) / (psi0(alpha) - psi0(beta)) of the linear upper
  // bound on the gap; alternate_reciprocal is the reciprocal convention, reported
  // alongside in run manifests rather than silently discarded.
  double crossing_time = 0.0;
  double alternate_reciprocal = 0.0;
};

// Earliest crossing time over all violating pairs (radial mode).
BlowupPrediction radial_blowup_bound(const std::vector<double>& labels,
                                     const std::vector<double>& psi0);

struct BlowupEvent {
  double time = 0.0;
  int cell = 0;
  double gap = 0.0;
  bool inversion = false;
};

struct FlowRun {
  std::vector<LagrangianState> outputs;
  // Min over pairs of gap(t)/gap(0), recorded once per internal step.
  std::vector<double> gap_times;
  std::vector<double> gap_ratios;
  // Min over adjacent pairs of (difference quotient - Gronwall bound), per output.
  std::vector<double> gronwall_margins;
  std::optional<BlowupEvent> blowup;
  bool halted = false;
  double momentum_drift = 0.0;
  double psi_drift = 0.0;
};

struct EulerianField {
  std::vector<double> x;
  std::vector<double> rho;
  std::vector<double> u;
  // Columns: x,rho,u.
  void save_csv(const std::string& path) const;
};

// Piecewise-constant density between adjacent particles, velocities at particles.
EulerianField eulerian_reconstruct(const LagrangianState& state);

// CDF through the particle cloud: M = (k + 1/2)/P at X_k, extended by half a cell
// of the boundary gap density so the profile carries full unit mass.
MassProfile particle_mass_profile(const LagrangianState& state);

struct EQDiagnostics {
  // Midpoint labels of adjacent pairs, e = forward difference of psi0 over X,
  // q = e / rho = P * (psi0 difference); q entries on vacuum gaps are NaN.
  std::vector<double> mid_alpha;
  std::vector<double> e;
  std::vector<double> q;
  int masked = 0;
};

EQDiagnostics e_q_diagnostics(const LagrangianState& state);

// Closed P-particle ODE: dX_k/dt = psi0_k - (1/P) sum_j Phi(|k-j|/P, X_k - X_j).
// Radial mode forces the topological argument to 0. The pairwise sum is
// accumulated antisymmetrically so total momentum is conserved structurally.
class LagrangianFlow {
 public:
  LagrangianFlow(const Kernel& kernel, const MassProfile& rho0,
                 const std::function<double(double)>& u0, int P, bool radial = false);

  const LagrangianState& initial() const { return initial_; }
  bool radial() const { return radial_; }
  double sup_phi() const { return sup_phi_; }

  // Alignment sum S_k = (1/P) sum_j Phi(d_kj, X_k - X_j).
  std::vector<double> alignment(const std::vector<double>& X) const;
  // Alignment velocities at positions X (the full right-hand side psi0 - S).
  std::vector<double> velocities(const std::vector<double>& X) const;
  // One RK4 step; does not run blow-up detection.
  LagrangianState step(const LagrangianState& state, double dt) const;
  // Steps with uniform substeps landing exactly on each output time. Stops early
  // and records a blow-up event if a gap collapses below 1e-8 of its initial
  // value or the ordering inverts.
  FlowRun run(double dt, const std::vector<double>& output_times) const;

 private:
  void rhs(const std::vector<double>& X, std::vector<double>& out) const;
  void rk4(std::vector<double>& X, double dt) const;
  LagrangianState make_state(const std::vector<double>& X, double t) const;

  const Kernel* kernel_;
  bool radial_ = false;
  bool pure_ = true;
  int P_ = 0;
  double sup_phi_ = 0.0;
  std::vector<double> phi_table_;
  LagrangianState initial_;
};

}  // namespace topoflock
