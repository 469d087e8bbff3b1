// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "topoflock/analysis.hpp"
#include "topoflock/bounded_solver.hpp"
#include "topoflock/conservation.hpp"
#include "topoflock/kernels.hpp"
#include "topoflock/lagrangian.hpp"
#include "topoflock/mass_profile.hpp"
#include "topoflock/spectral.hpp"
#include "topoflock/velocity_grid.hpp"

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

using namespace topoflock;

void bm_bounded_apply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BoundedOperator op(Kernel::affine_decay(1.0, 1.0, 0.5), n);
  const VelocityGrid v =
      VelocityGrid::sample(n, [](double m) { return std::sin(kTwoPi * m); });
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto _ : state) {
    op.apply(v.values, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_bounded_apply)->Arg(256)->Arg(1024);

void bm_bounded_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BoundedOperator op(Kernel::affine_decay(1.0, 1.0, 0.5), n);
  VelocityGrid v = VelocityGrid::sample(n, [](double m) { return std::sin(kTwoPi * m); });
  for (auto _ : state) {
    v = op.step(v, 1e-3);
    benchmark::DoNotOptimize(v.values.data());
  }
}
BENCHMARK(bm_bounded_step)->Arg(256)->Arg(1024);

void bm_spectral_assembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const SpectralOperator op(0.75, spectral_bc::neumann, n);
    benchmark::DoNotOptimize(op.lambda1());
  }
}
BENCHMARK(bm_spectral_assembly)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void bm_spectral_evolve(benchmark::State& state) {
  const SpectralOperator op(0.75, spectral_bc::neumann, 256);
  const VelocityGrid v =
      VelocityGrid::sample(256, [](double m) { return std::sin(kTwoPi * m); });
  for (auto _ : state) {
    const VelocityGrid w = op.evolve(v, 0.1);
    benchmark::DoNotOptimize(w.values.data());
  }
}
BENCHMARK(bm_spectral_evolve);

void bm_conservation_run(benchmark::State& state) {
  const int n_x = static_cast<int>(state.range(0));
  const VelocityTrajectory vel = VelocityTrajectory::frozen(
      VelocityGrid::sample(256, [](double m) { return 0.5 - m; }));
  ConservationParams p;
  p.x_lo = -0.5;
  p.x_hi = 1.5;
  p.n_x = n_x;
  const ConservationSolver solver(p);
  std::vector<double> m0(static_cast<std::size_t>(n_x));
  const double dx = (p.x_hi - p.x_lo) / n_x;
  for (int i = 0; i < n_x; ++i) {
    m0[static_cast<std::size_t>(i)] =
        std::clamp(p.x_lo + (i + 0.5) * dx, 0.0, 1.0);
  }
  for (auto _ : state) {
    const ConservationRun run = solver.run(m0, vel, 0.0, {0.1});
    benchmark::DoNotOptimize(run.outputs.back().M.data());
  }
}
BENCHMARK(bm_conservation_run)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void bm_lagrangian_velocities(benchmark::State& state) {
  const int P = static_cast<int>(state.range(0));
  const LagrangianFlow flow(Kernel::affine_decay(1.0, 1.0, 0.5),
                            MassProfile::uniform(0.0, 1.0),
                            [](double x) { return -0.5 * x; }, P);
  const std::vector<double> X = flow.initial().X;
  for (auto _ : state) {
    const std::vector<double> v = flow.velocities(X);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(bm_lagrangian_velocities)->Arg(200)->Arg(800);

void bm_poincare_constant(benchmark::State& state) {
  const int n_grid = static_cast<int>(state.range(0));
  const Kernel k = Kernel::affine_decay(1.0, 1.0, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(poincare_constant(k, n_grid));
  }
}
BENCHMARK(bm_poincare_constant)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
