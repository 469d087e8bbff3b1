// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topoflock/mass_profile.hpp"
#include "topoflock/velocity_grid.hpp"

namespace topoflock {

// Time-dependent mass velocity supplied to the conservation-law solver as
// snapshots; evaluation interpolates linearly in time between the bracketing
// snapshots and clamps outside their span. All snapshots share one grid.
class VelocityTrajectory {
 public:
  explicit VelocityTrajectory(std::vector<VelocityGrid> snapshots);
  static VelocityTrajectory frozen(VelocityGrid v);
  VelocityGrid at(double t) const;
  double max_sup_norm() const;
  int grid_size() const;
  const std::vector<VelocityGrid>& snapshots() const { return snaps_; }

 private:
  std::vector<VelocityGrid> snaps_;
};

struct ConservationParams {
  double x_lo = 0.0;
  double x_hi = 1.0;
  int n_x = 0;
  double cfl = 0.5;            // dt * max|v| / dx, must be <= 1/2
  double slope_factor = 50.0;  // admissibility monitor threshold
};

struct ConservationState {
  double time = 0.0;
  double dx = 0.0;
  double x_lo = 0.0;
  std::vector<double> M;  // cell values, nondecreasing, in [0, 1]
  double center(int i) const { return x_lo + (i + 0.5) * dx; }
  // CDF samples -> mass profile (continuous part only).
  MassProfile profile() const;
  void save_csv(const std::string& path) const;  // x, M, rho
};

struct SlopeEvent {
  double time = 0.0;
  int cell = 0;
  double slope = 0.0;
};

struct ConservationRun {
  std::vector<ConservationState> outputs;
  std::vector<SlopeEvent> slope_events;
  // Time-integrated boundary fluxes (left, right) for conservation audits.
  double boundary_flux_left = 0.0;
  double boundary_flux_right = 0.0;
  int steps_taken = 0;
  double dt_effective = 0.0;
  int monotonicity_violations = 0;
  int range_violations = 0;
};

// Engquist-Osher flux F(Ml, Mr) = int_0^{Ml} max(v,0) + int_0^{Mr} min(v,0),
// exact for the piecewise-constant grid velocity (A(0) = 0).
double engquist_osher_flux(const FluxPrimitive& A, double m_left, double m_right);

class ConservationSolver {
 public:
  explicit ConservationSolver(ConservationParams params);

  // Explicit conservative update with constant-state ghost cells M = 0 on
  // the left and M = 1 on the right. The step size is chosen from the CFL
  // bound over the whole trajectory and refined to land exactly on output
  // times. `record_every > 0` additionally stores every k-th step state in
  // ConservationRun::outputs (used by the entropy audit).
  ConservationRun run(const std::vector<double>& m_initial,
                      const VelocityTrajectory& velocity, double t_start,
                      const std::vector<double>& output_times,
                      int record_every = 0) const;

  const ConservationParams& params() const { return params_; }

 private:
  ConservationParams params_;
};

// Kruzhkov entropy audit over a stored trajectory: for each level, the
// negative part of the space-time weak entropy inequality tested against a
// smooth compactly supported bump. Values should be O(dx) for a monotone
// scheme. The trajectory must be uniformly spaced in time.
struct EntropyReport {
  std::vector<double> levels;
  std::vector<double> residuals;  // max(0, -Q(level))
  double max_residual = 0.0;
};

EntropyReport entropy_residual(const std::vector<ConservationState>& trajectory,
                               const VelocityTrajectory& velocity,
                               const std::vector<double>& levels);

}  // namespace topoflock
