// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "topoflock/bounded_solver.hpp"
#include "topoflock/errors.hpp"
#include "topoflock/kernels.hpp"

using topoflock::BoundedOperator;
using topoflock::Kernel;
using topoflock::VelocityGrid;

namespace {

VelocityGrid grid_of(const std::vector<double>& values) {
  VelocityGrid g(static_cast<int>(values.size()));
  g.values = values;
  return g;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

TEST_CASE("pinned tendency: N=4, phi==1, v=(1,0,0,0)") {
  const BoundedOperator op(Kernel::constant(1.0), 4);
  std::vector<double> out(4);
  op.apply({1.0, 0.0, 0.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(out[3] == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("apply against a brute-force double loop for a decaying kernel") {
  const Kernel k = Kernel::affine_decay(1.5, 1.0, 1.0);
  const int n = 33;
  const BoundedOperator op(k, n);
  auto gen = oracle::rng(7);
  const std::vector<double> v = oracle::random_uniform(gen, n, -1.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  op.apply(v, out);
  for (int i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < n; ++j) {
      acc += k.eval(std::abs(i - j) / static_cast<double>(n)) * (v[i] - v[j]);
    }
    CHECK(out[i] == doctest::Approx(static_cast<double>(acc / n)).epsilon(1e-13));
  }
  // Constant input has zero tendency.
  op.apply(std::vector<double>(n, 3.7), out);
  for (double x : out) CHECK(std::abs(x) <= 1e-14);
}

TEST_CASE("phi==1 collapses to the closed-form solution") {
  const BoundedOperator op(Kernel::constant(1.0), 64);
  const VelocityGrid v0 = VelocityGrid::sample(64, [](double m) {
    return std::sin(2 * M_PI * m) + 0.3;
  });
  const double mean = v0.mean();
  const auto times = linspace(0.0, 5.0, 11);
  const auto traj = op.evolve(v0, 1e-3, times);
  REQUIRE(traj.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double decay = std::exp(-times[k]);
    for (int i = 0; i < 64; ++i) {
      const double expected = mean + decay * (v0.values[i] - mean);
      CHECK(traj[k].values[i] == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("two-cell difference decays as e^{-t}") {
  const BoundedOperator op(Kernel::constant(1.0), 2);
  const auto traj = op.evolve(grid_of({1.0, -1.0}), 1e-3, {0.7});
  const double diff = traj[0].values[0] - traj[0].values[1];
  CHECK(diff == doctest::Approx(2.0 * std::exp(-0.7)).epsilon(1e-10));
}

TEST_CASE("one RK4 step matches the exact flow to O(dt^5)") {
  const BoundedOperator op(Kernel::constant(1.0), 8);
  const VelocityGrid v0 =
      VelocityGrid::sample(8, [](double m) { return std::cos(2 * M_PI * m); });
  const double mean = v0.mean();
  for (double dt : {0.1, 0.05}) {
    const VelocityGrid v1 = op.step(v0, dt);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double exact = mean + std::exp(-dt) * (v0.values[i] - mean);
      worst = std::max(worst, std::abs(v1.values[i] - exact));
    }
    // RK4 local error ~ dt^5 / 120 for this linear flow.
    CHECK(worst <= std::pow(dt, 5));
  }
}

TEST_CASE("brute-force equivalence with the matrix exponential, N <= 8") {
  for (const Kernel& k : {Kernel::constant(0.8), Kernel::affine_decay(1.0, 1.0, 0.5)}) {
    const int n = 8;
    const BoundedOperator op(k, n);
    auto gen = oracle::rng(42);
    const VelocityGrid v0 = grid_of(oracle::random_uniform(gen, n, -1.0, 1.0));
    Eigen::VectorXd e0(n);
    for (int i = 0; i < n; ++i) e0[i] = v0.values[i];
    for (double t : {0.25, 1.0}) {
      const auto traj = op.evolve(v0, 1e-3, {t});
      const Eigen::VectorXd expected = oracle::heat_flow(op.generator(), e0, t);
      for (int i = 0; i < n; ++i) {
        CHECK(traj[0].values[i] == doctest::Approx(expected[i]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("mean preservation and maximum principle on a long run") {
  const Kernel k = Kernel::affine_decay(1.0, 1.0, 0.5);
  const int n = 64;
  const BoundedOperator op(k, n);
  auto gen = oracle::rng(2024);
  VelocityGrid v0 = grid_of(oracle::random_uniform(gen, n, -2.0, 2.0));
  const double m0 = v0.mean();
  const double lo = *std::min_element(v0.values.begin(), v0.values.end());
  const double hi = *std::max_element(v0.values.begin(), v0.values.end());
  const auto traj = op.evolve(v0, 5e-3, linspace(0.0, 10.0, 21));
  for (const auto& v : traj) {
    CHECK(std::abs(v.mean() - m0) <= 1e-10);
    for (double x : v.values) {
      CHECK(x >= lo - 1e-10);
      CHECK(x <= hi + 1e-10);
    }
  }
}

TEST_CASE("dirichlet form: symmetry, positivity, generator consistency") {
  const Kernel k = Kernel::affine_decay(2.0, 1.0, 1.0);
  const int n = 17;
  const BoundedOperator op(k, n);
  auto gen = oracle::rng(5);
  const auto v = oracle::random_uniform(gen, n, -1.0, 1.0);
  const auto w = oracle::random_uniform(gen, n, -1.0, 1.0);
  CHECK(op.dirichlet_form(v, w) == doctest::Approx(op.dirichlet_form(w, v)));
  CHECK(op.dirichlet_form(v, v) >= 0.0);
  // E_phi(v, w) = <L v, w> in the (1/n) inner product.
  std::vector<double> lv(static_cast<std::size_t>(n));
  op.apply(v, lv);
  long double ip = 0.0L;
  for (int i = 0; i < n; ++i) ip += lv[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
  CHECK(op.dirichlet_form(v, w) ==
        doctest::Approx(static_cast<double>(ip / n)).epsilon(1e-12));
}

TEST_CASE("energy identity residual halves at second order") {
  const Kernel k = Kernel::affine_decay(1.0, 1.0, 0.5);
  const BoundedOperator op(k, 32);
  VelocityGrid v = VelocityGrid::sample(32, [](double m) {
    return std::sin(2 * M_PI * m) + 0.5 * std::cos(6 * M_PI * m);
  });
  v = op.evolve(v, 1e-3, {0.4})[0];  // move off the initial transient
  const auto residual = [&](double dt) {
    const VelocityGrid mid = op.step(v, 0.5 * dt);
    const VelocityGrid next = op.step(v, dt);
    return std::abs((next.energy() - v.energy()) / dt +
                    2.0 * op.dirichlet_form(mid.values, mid.values));
  };
  const double r1 = residual(0.02);
  const double r2 = residual(0.01);
  CHECK(r1 / r2 >= 3.5);
}

TEST_CASE("step guards: dt bound is a config error, size mismatch rejected") {
  const BoundedOperator op(Kernel::constant(2.0), 8);
  const VelocityGrid v0 = VelocityGrid::sample(8, [](double m) { return m; });
  CHECK_THROWS_AS(op.step(v0, 0.6), topoflock::config_error);  // dt * sup phi = 1.2
  CHECK_THROWS_AS(op.step(v0, -0.1), topoflock::config_error);
  CHECK_THROWS_AS(op.step(VelocityGrid::sample(4, [](double m) { return m; }), 0.1),
                  topoflock::config_error);
  CHECK_THROWS_AS(BoundedOperator(Kernel::power_law(0.5), 8),
                  topoflock::unsupported_operation);
}

TEST_CASE("decay rate is bounded below by the Poincare rate") {
  // Sharp form: the L2 norm of v - vbar decays at least at rate 1/c_phi.
  const Kernel k = Kernel::affine_decay(1.0, 1.0, 0.5);
  const double c_phi = topoflock::poincare_constant(k);
  const int n = 48;
  const BoundedOperator op(k, n);
  auto gen = oracle::rng(99);
  const VelocityGrid v0 = grid_of(oracle::random_uniform(gen, n, -1.0, 1.0));
  const double e0 = v0.deviation_energy();
  const auto traj = op.evolve(v0, 2e-3, linspace(0.0, 5.0, 26));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double bound = e0 * std::exp(-2.0 * traj[i].time / c_phi);
    CHECK(traj[i].deviation_energy() <= bound * (1.0 + 1e-6));
  }
}
