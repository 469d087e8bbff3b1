// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace topoflock {

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

// Cumulative distribution function of a probability measure on the line:
// a continuous piecewise-linear part plus point masses kept as an explicit
// side list. Evaluation is right-continuous, 0 left of the support and 1 at
// and right of its upper end.
class MassProfile {
 public:
  // nodes: strictly increasing; values: the continuous part sampled at the
  // nodes (nondecreasing, values[0] = 0); atoms: point masses inside
  // [nodes.front(), nodes.back()]. Continuous mass plus atom mass must be 1
  // within 1e-9 (exactly normalized internally).
  static MassProfile from_cdf(std::vector<double> nodes, std::vector<double> values,
                              std::vector<Atom> atoms = {});
  // Trapezoidal integration of density samples; renormalized to total mass 1
  // with the factor retained.
  static MassProfile from_density_samples(const std::vector<double>& x,
                                          const std::vector<double>& rho);
  static MassProfile uniform(double lo, double hi);
  // mass0 on [a0, b0], 1 - mass0 on [a1, b1], vacuum between.
  static MassProfile two_block(double a0, double b0, double a1, double b1,
                               double mass0 = 0.5);

  // M(x), right-continuous.
  double operator()(double x) const;
  // Generalized inverse inf{x : M(x) >= m} for m in (0, 1]. Atom plateaus in
  // m map to the atom position; vacuum plateaus in x map to their left
  // endpoint.
  double quantile(double m) const;
  // d_rho(x, y) = |M(y) - M(x)|.
  double topo_distance(double x, double y) const;
  // Positions quantile((i + 1/2) / n), i = 0..n-1.
  std::vector<double> pushforward_uniform(int n) const;

  bool has_atoms() const { return !atoms_.empty(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double renormalization() const { return renormalization_; }
  double support_lo() const { return x_.front(); }
  double support_hi() const { return x_.back(); }

  // Piecewise-constant density (breakpoints of size k+1, values of size k).
  // Throws unsupported_operation when atoms are present.
  std::pair<std::vector<double>, std::vector<double>> density() const;

  // Profile translated by dx.
  MassProfile shifted(double dx) const;

  static MassProfile load_csv(const std::string& path);
  void save_csv(const std::string& path) const;

 private:
  MassProfile() = default;
  // Breakpoints with left/right CDF values; right - left is the atom mass at
  // the breakpoint. Linear between right_[i] and left_[i+1].
  std::vector<double> x_;
  std::vector<double> left_, right_;
  std::vector<Atom> atoms_;
  double renormalization_ = 1.0;
};

// u composed with the quantile map: v(m) = u(M^{-1}(m)).
std::function<double(double)> to_mass_velocity(const MassProfile& M,
                                               std::function<double(double)> u);
// v composed with the CDF: u(x) = v(M(x)).
std::function<double(double)> to_space_velocity(const MassProfile& M,
                                                std::function<double(double)> v);

}  // namespace topoflock
