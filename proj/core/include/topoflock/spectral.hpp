// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "topoflock/velocity_grid.hpp"

namespace topoflock {

enum class spectral_bc { neumann, dirichlet };

// Dirichlet-form discretization of the regional fractional operator on the
// mass interval: Q(v, v) = C_s sum_{i<j} w_ij (v_i - v_j)^2 with exact pair
// weights w_ij = int int_{cell_i x cell_j} |m - m'|^{-1-2s} dm dm'. For
// s >= 1/2 the exact adjacent-cell integral diverges (piecewise constants
// leave W^{s,2}); the adjacent weight is then the second-moment matched
// finite weight h^{-2} int int (m - m')^2 |m - m'|^{-1-2s}, which preserves
// symmetry, positivity and the Neumann null space. The Dirichlet variant
// pins the first and last cells to zero and is intended for comparison runs.
// Dense eigendecomposition; n is capped at 2048.
class SpectralOperator {
 public:
  SpectralOperator(double s, spectral_bc bc, int n);

  double s() const { return s_; }
  spectral_bc bc() const { return bc_; }
  int n() const { return n_; }

  // Pair weight for cell distance k >= 1 (before the C_s factor).
  double pair_weight(int k) const;

  int n_modes() const { return static_cast<int>(lambda_.size()); }
  double lambda(int i) const { return lambda_[static_cast<std::size_t>(i)]; }
  // Smallest nonzero eigenvalue under Neumann (the spectral gap); smallest
  // eigenvalue under Dirichlet.
  double lambda1() const;
  // Eigenvector i, orthonormal in the cell-average inner product
  // <v, w> = (1/n) sum v_i w_i.
  const Eigen::VectorXd& mode(int i) const { return modes_[static_cast<std::size_t>(i)]; }

  // Semigroup evolution v(t) = sum e^{-lambda_i t} <v0, e_i> e_i. Under
  // Dirichlet the pinned cells are forced to zero.
  VelocityGrid evolve(const VelocityGrid& v0, double t) const;

  // E(v, w) = (C_s/2) int int (v(m)-v(m'))(w(m)-w(m')) |m-m'|^{-1-2s}.
  double dirichlet_form(const std::vector<double>& v, const std::vector<double>& w) const;
  // Rayleigh quotient E(v, v) / ||v||^2 (caller supplies the admissible v).
  double rayleigh(const std::vector<double>& v) const;
  // sqrt(||v||^2 + E(v, v)).
  double sobolev_norm(const std::vector<double>& v) const;

  void save_spectrum_csv(const std::string& path) const;

 private:
  double s_ = 0.0;
  double c_s_ = 0.0;
  spectral_bc bc_ = spectral_bc::neumann;
  int n_ = 0;
  Eigen::MatrixXd form_;  // K with E(v, w) = v^T K w
  std::vector<double> lambda_;
  std::vector<Eigen::VectorXd> modes_;
};

}  // namespace topoflock
