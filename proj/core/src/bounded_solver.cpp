// SPDX-License-Identifier: Apache-2.0
#include "topoflock/bounded_solver.hpp"

#include <algorithm>
#include <cmath>

#include "topoflock/errors.hpp"

namespace topoflock {

namespace {
constexpr double max_principle_tol = 1e-10;
}

BoundedOperator::BoundedOperator(const Kernel& kernel, int n) : n_(n) {
  if (n < 1) throw config_error("bounded operator: n must be positive");
  if (kernel.kind() != kernel_kind::pure || !kernel.bounded()) {
    throw unsupported_operation("bounded operator: requires a bounded pure kernel");
  }
  sup_phi_ = kernel.sup_norm();
  phi_tab_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    phi_tab_[static_cast<std::size_t>(k)] = kernel.eval(static_cast<double>(k) / n);
  }
  row_mean_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < n; ++j) {
      acc += phi_tab_[static_cast<std::size_t>(std::abs(i - j))];
    }
    row_mean_[static_cast<std::size_t>(i)] = static_cast<double>(acc / n);
  }
}

void BoundedOperator::apply(const std::vector<double>& v, std::vector<double>& out) const {
  out.assign(v.size(), 0.0);
  for (int i = 0; i < n_; ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < n_; ++j) {
      acc += static_cast<long double>(phi_tab_[static_cast<std::size_t>(std::abs(i - j))]) *
             v[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] =
        row_mean_[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)] -
        static_cast<double>(acc / n_);
  }
}

void BoundedOperator::rhs(const std::vector<double>& v, std::vector<double>& out) const {
  apply(v, out);
  for (double& x : out) x = -x;
}

VelocityGrid BoundedOperator::step(const VelocityGrid& v, double dt) const {
  if (static_cast<int>(v.values.size()) != n_) {
    throw config_error("bounded operator: grid size mismatch");
  }
  if (!(dt > 0.0) || dt * sup_phi_ > 1.0 + 1e-12) {
    throw config_error("bounded step: dt * sup phi must be <= 1");
  }
  const std::size_t n = v.values.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(v.values, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = v.values[i] + 0.5 * dt * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = v.values[i] + 0.5 * dt * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = v.values[i] + dt * k3[i];
  rhs(tmp, k4);

  VelocityGrid out(n_, v.time + dt);
  const auto [lo_it, hi_it] = std::minmax_element(v.values.begin(), v.values.end());
  const double lo = *lo_it, hi = *hi_it;
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] =
        v.values[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (out.values[i] < lo - max_principle_tol || out.values[i] > hi + max_principle_tol) {
      throw stability_error("bounded step: maximum principle violated");
    }
  }
  return out;
}

std::vector<VelocityGrid> BoundedOperator::evolve(
    const VelocityGrid& v0, double dt, const std::vector<double>& output_times) const {
  if (!(dt > 0.0)) throw config_error("bounded evolve: dt must be positive");
  std::vector<VelocityGrid> out;
  out.reserve(output_times.size());
  VelocityGrid state = v0;
  for (double t_out : output_times) {
    if (t_out < state.time - 1e-12) {
      throw config_error("bounded evolve: output times must be nondecreasing");
    }
    const double span = t_out - state.time;
    if (span > 1e-14) {
      const int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
      const double h = span / steps;
      for (int s = 0; s < steps; ++s) state = step(state, h);
    }
    state.time = t_out;
    out.push_back(state);
  }
  return out;
}

double BoundedOperator::dirichlet_form(const std::vector<double>& v,
                                       const std::vector<double>& w) const {
  long double acc = 0.0L;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const double dv = v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)];
      const double dw = w[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(j)];
      acc += static_cast<long double>(phi_tab_[static_cast<std::size_t>(j - i)]) * dv * dw;
    }
  }
  return static_cast<double>(acc) / (static_cast<double>(n_) * n_);
}

Eigen::MatrixXd BoundedOperator::generator() const {
  Eigen::MatrixXd L(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      L(i, j) = (i == j ? row_mean_[static_cast<std::size_t>(i)] : 0.0) -
                phi_tab_[static_cast<std::size_t>(std::abs(i - j))] / n_;
    }
  }
  return L;
}

}  // namespace topoflock
