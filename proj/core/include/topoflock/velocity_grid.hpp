// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace topoflock {

// Velocity field on the mass interval [0, 1]: n uniform cells with values
// read as cell averages at midpoints m_i = (i + 1/2) / n.
struct VelocityGrid {
  int n = 0;
  double time = 0.0;
  std::vector<double> values;

  VelocityGrid() = default;
  VelocityGrid(int n_cells, double t = 0.0);

  static VelocityGrid sample(int n_cells, const std::function<double(double)>& v,
                             double t = 0.0);

  double midpoint(int i) const { return (i + 0.5) / n; }
  // Piecewise-constant read at mass m in [0, 1].
  double at_mass(double m) const;
  // Continuous representative: linear interpolation of midpoint values,
  // clamped on the outer half-cells.
  double interp(double m) const;

  double mean() const;
  double energy() const;            // (1/n) sum v_i^2
  double deviation_energy() const;  // (1/n) sum (v_i - mean)^2
  double sup_deviation() const;     // max_i |v_i - mean|
  double sup_norm() const;

  void save_csv(const std::string& path) const;
  static VelocityGrid load_csv(const std::string& path);
};

// Exact primitive A(m) = int_0^m v of a piecewise-constant velocity grid,
// with the sign-split parts used by the Engquist-Osher flux. Prefix sums are
// accumulated in extended precision.
class FluxPrimitive {
 public:
  explicit FluxPrimitive(const VelocityGrid& v);

  double operator()(double m) const;     // A(m)
  double positive_part(double m) const;  // int_0^m max(v, 0)
  double negative_part(double m) const;  // int_0^m min(v, 0)
  double lipschitz() const { return lipschitz_; }
  double total() const;  // A(1)

 private:
  int n_ = 0;
  std::vector<double> values_;
  std::vector<double> prefix_, prefix_pos_, prefix_neg_;
  double lipschitz_ = 0.0;
};

}  // namespace topoflock
