// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace topoflock {

// Normalization constant of the fractional kernel C_s r^{-1-2s},
// C_s = s 4^s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 - s)), s in (0, 1).
double fractional_constant(double s);

enum class kernel_kind { pure, general };

// Communication protocol phi. Pure kernels depend on the mass distance d
// only; general kernels additionally depend on the spatial offset z and are
// even in z (tables are specified for z >= 0). Phi(d, z) denotes the
// antiderivative int_0^z phi(d, zeta) dzeta, odd in z.
class Kernel {
 public:
  // phi = value (pure) or phi(d, z) = value (general, z-independent).
  static Kernel constant(double value, kernel_kind kind = kernel_kind::pure);
  // phi(r) = C_s r^{-1-2s}, unbounded at r = 0. Pure only.
  static Kernel power_law(double s);
  // phi(r) = scale * max(1 - slope r, 0)^alpha. Pure.
  static Kernel affine_decay(double scale, double slope, double alpha);
  // phi(d, z) = max(a - b d, 0) * 1_{|z| <= halfwidth}. General.
  static Kernel affine_decay_general(double a, double b, double halfwidth);
  // Linear interpolation of (d_i, phi_i), clamped outside the table. Pure.
  static Kernel custom_table(std::vector<double> d, std::vector<double> phi);
  // Bilinear interpolation on a (d_i) x (z_j >= 0) lattice, z mirrored. General.
  static Kernel custom_table_general(std::vector<double> d, std::vector<double> z,
                                     std::vector<double> phi);

  kernel_kind kind() const { return kind_; }
  bool bounded() const;
  // s for power_law kernels; throws unsupported_operation otherwise.
  double fractional_order() const;

  // phi(d) for pure kernels; throws for general ones.
  double eval(double d) const;
  // phi(d, z); pure kernels ignore z. Throws domain_error where phi is
  // unbounded (power law at d = 0).
  double eval(double d, double z) const;
  // Phi(d, z). Closed form for the named families, quadrature for general
  // tables. Throws unsupported_operation for unbounded kernels.
  double antiderivative(double d, double z) const;

  // sup phi; +inf for power_law.
  double sup_norm() const;

  // Smallest r >= 0 with phi identically 0 on [r, inf); +inf if none.
  double vanishing_radius() const;

  std::string describe() const;

 private:
  Kernel() = default;
  enum class family { constant, power_law, affine, affine_general, table, table_general };
  family family_ = family::constant;
  kernel_kind kind_ = kernel_kind::pure;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0;  // family parameters
  std::vector<double> tab_d_, tab_z_, tab_phi_;
  double eval_raw(double d, double z) const;  // +inf instead of throwing
  friend double poincare_constant(const Kernel&, int);
};

// Poincare constant c_phi = esssup_m int_0^1 1/phi(|m - m'|) dm', estimated
// as the max of the integral over a uniform grid of m values (endpoints
// included). Returns +inf when phi vanishes on a set of positive measure in
// [0, 1] (detected on midpoint samples). Pure kernels only.
double poincare_constant(const Kernel& kernel, int n_grid = 2048);

}  // namespace topoflock
