// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "topoflock/conservation.hpp"
#include "topoflock/kernels.hpp"
#include "topoflock/mass_profile.hpp"
#include "topoflock/velocity_grid.hpp"

namespace topoflock {

struct RateFit {
  double rate = 0.0;
  double residual = 0.0;
  int points = 0;
  // True when the fit window spans at least two decades of energy decrease.
  bool valid = false;
};

// Least squares on log energy over the window where energy lies in
// [1e-10, 1e-1] times the initial energy.
RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& energy);

// Alignment diagnostics along a velocity trajectory.
struct DecayRecord {
  std::vector<double> times;
  std::vector<double> energy;     // ||v - vbar||^2
  std::vector<double> dirichlet;  // E_phi(v, v)
  std::vector<double> sup_dev;    // sup |v - vbar|
  RateFit fit;
  bool energy_monotone = true;

  // Columns: t,energy,dirichlet,supdev.
  void save_csv(const std::string& path) const;
};

DecayRecord make_decay_record(
    const std::vector<VelocityGrid>& trajectory,
    const std::function<double(const std::vector<double>&)>& dirichlet_form);

struct MarginReport {
  std::vector<double> times;
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

// Ratios ||v1(t) - v2(t)|| / (e^{-(t - t0)/c_phi} ||v1(t0) - v2(t0)||) in the
// L^2(dm) norm; the estimate holds when every ratio stays <= 1 + tolerance.
MarginReport poincare_decay_check(const std::vector<VelocityGrid>& first,
                                  const std::vector<VelocityGrid>& second, double c_phi);
// Single trajectory against its own conserved mean.
MarginReport poincare_decay_check(const std::vector<VelocityGrid>& trajectory,
                                  double c_phi);

struct CouplingReport {
  double mass_side = 0.0;      // (1/n) sum |v1 - v2|^2
  double eulerian_side = 0.0;  // quantile-sampled coupled distance
};

// The coupled squared distance between two solutions, computed on the mass
// grid and re-derived through the coupling (M1^{-1}, M2^{-1}) pushforward by
// quantile sampling; the two readings agree to quadrature tolerance.
CouplingReport coupling_distance(const VelocityGrid& v1, const MassProfile& m1,
                                 const VelocityGrid& v2, const MassProfile& m2,
                                 int n_samples = 100000);

struct SupDecayReport {
  double c0 = 0.0;  // sup-deviation at tau over the Sobolev seminorm at tau
  std::vector<double> times;
  std::vector<double> growth;  // C(t)/C(tau) for t >= tau
  double max_growth = 0.0;
  bool stable = false;  // max growth <= 2
};

// Checks sup|v - vbar|(t) <= C e^{-lambda1 (t - tau)} sobolev_tau with C
// fitted at the first snapshot at or after tau.
SupDecayReport sup_decay_check(const std::vector<VelocityGrid>& trajectory,
                               double lambda1, double tau, double sobolev_tau);

// Total variation distance between the measures: L^1 of density differences
// plus atom mass mismatches.
double l1_density_distance(const MassProfile& a, const MassProfile& b);

struct FlockingReport {
  std::vector<double> times;  // time of the later snapshot in each pair
  std::vector<double> distances;
  double threshold = 1e-3;
  bool declared = false;  // heuristic reporting convention, not a theorem
};

// Drift-compensated L^1 distances between consecutive density snapshots
// rho(. - ubar t, t); declared when the tail decreases below the threshold.
FlockingReport flocking_diagnostic(const std::vector<double>& times,
                                   const std::vector<MassProfile>& profiles, double u_bar);

struct CrossValidateRow {
  int particles = 0;
  int n_x = 0;
  double l1_rho = 0.0;
  double linf_v = 0.0;
};

struct CrossValidateReport {
  std::vector<CrossValidateRow> rows;
  double fitted_order = 0.0;

  // Columns: P,n_x,l1_rho,linf_v.
  void save_csv(const std::string& path) const;
};

// Runs the particle pipeline and the mass-coordinate pipeline side by side on
// the same data and reports the discrepancy at t_final per resolution pair.
CrossValidateReport cross_validate(const Kernel& kernel, const MassProfile& rho0,
                                   const std::function<double(double)>& u0,
                                   const std::vector<std::pair<int, int>>& resolutions,
                                   double t_final, const ConservationParams& domain,
                                   double dt_particles = 0.005);

}  // namespace topoflock
