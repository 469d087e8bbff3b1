// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "topoflock/kernels.hpp"
#include "topoflock/velocity_grid.hpp"

namespace topoflock {

// Nonlocal alignment operator for bounded pure kernels on the mass grid:
// (L v)_i = (1/n) sum_j phi(|m_i - m_j|) (v_i - v_j). The velocity equation
// is dv/dt = -L v, advanced with classical RK4 under the explicit-step bound
// dt * sup phi <= 1 and a runtime maximum-principle check.
class BoundedOperator {
 public:
  BoundedOperator(const Kernel& kernel, int n);

  int n() const { return n_; }
  double sup_phi() const { return sup_phi_; }

  // out = L v.
  void apply(const std::vector<double>& v, std::vector<double>& out) const;

  // One RK4 step; throws stability_error when the step bound or the maximum
  // principle (tolerance 1e-10) is violated.
  VelocityGrid step(const VelocityGrid& v, double dt) const;

  // Advances from v0, landing exactly on each requested output time with
  // uniform substeps of size at most dt. Returns the snapshots at
  // output_times (which must be nondecreasing, starting at >= v0.time).
  std::vector<VelocityGrid> evolve(const VelocityGrid& v0, double dt,
                                   const std::vector<double>& output_times) const;

  // Dirichlet form of the bounded kernel,
  // E_phi(v, w) = 1/(2 n^2) sum_{i,j} phi_ij (v_i - v_j)(w_i - w_j).
  double dirichlet_form(const std::vector<double>& v, const std::vector<double>& w) const;

  // Dense matrix of L (symmetric), for spectra and small-system oracles.
  Eigen::MatrixXd generator() const;

 private:
  int n_ = 0;
  double sup_phi_ = 0.0;
  std::vector<double> phi_tab_;   // phi(k / n), k = 0..n-1
  std::vector<double> row_mean_;  // (1/n) sum_j phi(|i-j|/n)
  void rhs(const std::vector<double>& v, std::vector<double>& out) const;
};

}  // namespace topoflock
