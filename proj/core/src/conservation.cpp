// SPDX-License-Identifier: Apache-2.0
#include "topoflock/conservation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"

namespace topoflock {

VelocityTrajectory::VelocityTrajectory(std::vector<VelocityGrid> snapshots)
    : snaps_(std::move(snapshots)) {
  if (snaps_.empty()) throw config_error("velocity trajectory: no snapshots");
  for (std::size_t i = 0; i < snaps_.size(); ++i) {
    if (snaps_[i].n != snaps_[0].n) {
      throw config_error("velocity trajectory: snapshots must share one grid");
    }
    if (i > 0 && !(snaps_[i].time > snaps_[i - 1].time)) {
      throw config_error("velocity trajectory: snapshot times must increase");
    }
  }
}

VelocityTrajectory VelocityTrajectory::frozen(VelocityGrid v) {
  std::vector<VelocityGrid> one;
  one.push_back(std::move(v));
  return VelocityTrajectory(std::move(one));
}

VelocityGrid VelocityTrajectory::at(double t) const {
  if (snaps_.size() == 1 || t <= snaps_.front().time) {
    VelocityGrid out = snaps_.front();
    out.time = t;
    return out;
  }
  if (t >= snaps_.back().time) {
    VelocityGrid out = snaps_.back();
    out.time = t;
    return out;
  }
  const auto it = std::upper_bound(
      snaps_.begin(), snaps_.end(), t,
      [](double value, const VelocityGrid& g) { return value < g.time; });
  const std::size_t i = static_cast<std::size_t>(it - snaps_.begin());
  const VelocityGrid& a = snaps_[i - 1];
  const VelocityGrid& b = snaps_[i];
  const double w = (t - a.time) / (b.time - a.time);
  VelocityGrid out(a.n, t);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = (1.0 - w) * a.values[k] + w * b.values[k];
  }
  return out;
}

double VelocityTrajectory::max_sup_norm() const {
  double best = 0.0;
  for (const auto& s : snaps_) best = std::max(best, s.sup_norm());
  return best;
}

int VelocityTrajectory::grid_size() const { return snaps_[0].n; }

MassProfile ConservationState::profile() const {
  // Anchor the CDF at both cell faces, where the ghost convention pins it to 0
  // on the left and 1 on the right; cell values are point samples at the
  // centers. Scheme smearing leaves the outermost samples off the pinned
  // values by a tiny tail that the anchors absorb; a deviation past pin_tol
  // means mass actually reached the boundary, which the reconstruction must
  // not mask.
  if (M.empty()) throw config_error("state profile: empty state");
  constexpr double pin_tol = 1e-6;
  const double left_tail = std::abs(M.front());
  const double right_tail = std::abs(1.0 - M.back());
  if (left_tail > pin_tol || right_tail > pin_tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "state profile: boundary cells deviate from the ghost values "
                  "(left %.3g, right %.3g); the domain margins are too small "
                  "for this horizon",
                  left_tail, right_tail);
    throw stability_error(buf);
  }
  std::vector<double> nodes(M.size() + 2);
  std::vector<double> values(M.size() + 2);
  nodes[0] = x_lo;
  values[0] = 0.0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    nodes[i + 1] = center(static_cast<int>(i));
    values[i + 1] = M[i];
  }
  nodes[M.size() + 1] = x_lo + dx * static_cast<double>(M.size());
  values[M.size() + 1] = 1.0;
  return MassProfile::from_cdf(nodes, values);
}

void ConservationState::save_csv(const std::string& path) const {
  csv::Writer w(path, "x,M,rho");
  const int n = static_cast<int>(M.size());
  for (int i = 0; i < n; ++i) {
    double rho;
    if (i == 0) {
      rho = (M[1] - M[0]) / dx;
    } else if (i == n - 1) {
      rho = (M[static_cast<std::size_t>(n - 1)] - M[static_cast<std::size_t>(n - 2)]) / dx;
    } else {
      rho = (M[static_cast<std::size_t>(i + 1)] - M[static_cast<std::size_t>(i - 1)]) /
            (2.0 * dx);
    }
    w.row({center(i), M[static_cast<std::size_t>(i)], rho});
  }
  w.close();
}

double engquist_osher_flux(const FluxPrimitive& A, double m_left, double m_right) {
  return A.positive_part(m_left) + A.negative_part(m_right);
}

ConservationSolver::ConservationSolver(ConservationParams params) : params_(params) {
  if (params_.n_x < 4) throw config_error("conservation solver: n_x must be >= 4");
  if (!(params_.x_hi > params_.x_lo)) {
    throw config_error("conservation solver: empty spatial domain");
  }
  if (!(params_.cfl > 0.0) || params_.cfl > 0.5 + 1e-12) {
    throw config_error("conservation solver: CFL number must lie in (0, 1/2]");
  }
  if (!(params_.slope_factor > 0.0)) {
    throw config_error("conservation solver: slope_factor must be positive");
  }
}

ConservationRun ConservationSolver::run(const std::vector<double>& m_initial,
                                        const VelocityTrajectory& velocity, double t_start,
                                        const std::vector<double>& output_times,
                                        int record_every) const {
  const int n = params_.n_x;
  if (static_cast<int>(m_initial.size()) != n) {
    throw config_error("conservation run: initial data size mismatch");
  }
  const double dx = (params_.x_hi - params_.x_lo) / n;
  const double lip = velocity.max_sup_norm();
  const double dt_max = (lip > 0.0) ? params_.cfl * dx / lip : std::numeric_limits<double>::infinity();

  ConservationRun out;
  ConservationState state;
  state.time = t_start;
  state.dx = dx;
  state.x_lo = params_.x_lo;
  state.M = m_initial;

  double slope0 = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    slope0 = std::max(slope0, std::abs(state.M[static_cast<std::size_t>(i + 1)] -
                                       state.M[static_cast<std::size_t>(i)]) / dx);
  }
  const double slope_threshold = params_.slope_factor * slope0;

  auto audit = [&](const ConservationState& s) {
    for (int i = 0; i + 1 < n; ++i) {
      const double a = s.M[static_cast<std::size_t>(i)];
      const double b = s.M[static_cast<std::size_t>(i + 1)];
      if (b < a - 1e-12) ++out.monotonicity_violations;
      const double slope = std::abs(b - a) / dx;
      if (slope0 > 0.0 && slope > slope_threshold &&
          out.slope_events.size() < 256) {
        out.slope_events.push_back({s.time, i, slope});
      }
    }
    for (double m : s.M) {
      if (m < -1e-12 || m > 1.0 + 1e-12) ++out.range_violations;
    }
  };

  std::vector<double> flux(static_cast<std::size_t>(n) + 1, 0.0);
  if (record_every > 0) out.outputs.push_back(state);

  for (double t_out : output_times) {
    if (t_out < state.time - 1e-12) {
      throw config_error("conservation run: output times must be nondecreasing");
    }
    const double span = t_out - state.time;
    if (span > 1e-14) {
      int steps;
      if (std::isfinite(dt_max)) {
        steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
      } else {
        steps = 1;
      }
      const double h = span / steps;
      out.dt_effective = h;
      for (int s = 0; s < steps; ++s) {
        const FluxPrimitive A(velocity.at(state.time));
        flux[0] = engquist_osher_flux(A, 0.0, state.M[0]);
        for (int i = 1; i < n; ++i) {
          flux[static_cast<std::size_t>(i)] =
              engquist_osher_flux(A, state.M[static_cast<std::size_t>(i - 1)],
                                  state.M[static_cast<std::size_t>(i)]);
        }
        flux[static_cast<std::size_t>(n)] =
            engquist_osher_flux(A, state.M[static_cast<std::size_t>(n - 1)], 1.0);
        for (int i = 0; i < n; ++i) {
          state.M[static_cast<std::size_t>(i)] -=
              h / dx * (flux[static_cast<std::size_t>(i + 1)] -
                        flux[static_cast<std::size_t>(i)]);
        }
        out.boundary_flux_left += h * flux[0];
        out.boundary_flux_right += h * flux[static_cast<std::size_t>(n)];
        state.time += h;
        ++out.steps_taken;
        if (record_every > 0 && out.steps_taken % record_every == 0) {
          out.outputs.push_back(state);
        }
      }
    }
    state.time = t_out;
    if (record_every == 0) {
      audit(state);
      out.outputs.push_back(state);
    }
  }
  if (record_every > 0) audit(state);
  return out;
}

namespace {

// Smooth compact bump: B(u) = cos^2(pi u / 2) for |u| < 1, else 0.
double bump(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * M_PI * u);
  return c * c;
}

double bump_prime(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return -0.5 * M_PI * std::sin(M_PI * u);
}

}  // namespace

EntropyReport entropy_residual(const std::vector<ConservationState>& trajectory,
                               const VelocityTrajectory& velocity,
                               const std::vector<double>& levels) {
  if (trajectory.size() < 3) throw config_error("entropy audit: need >= 3 snapshots");
  const double dt = trajectory[1].time - trajectory[0].time;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (std::abs(trajectory[k].time - trajectory[k - 1].time - dt) > 1e-10) {
      throw config_error("entropy audit: snapshots must be uniformly spaced in time");
    }
  }
  const ConservationState& first = trajectory.front();
  const int n = static_cast<int>(first.M.size());
  const double dx = first.dx;
  const double x_lo = first.x_lo;
  const double x_hi = x_lo + n * dx;
  const double xc = 0.5 * (x_lo + x_hi);
  const double rx = 0.35 * (x_hi - x_lo);
  const double t0 = first.time;
  const double t1 = trajectory.back().time;
  const double tc = 0.5 * (t0 + t1);
  const double rt = 0.45 * (t1 - t0);

  EntropyReport report;
  report.levels = levels;
  report.residuals.assign(levels.size(), 0.0);

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double k = levels[li];
    long double q = 0.0L;
    for (const ConservationState& s : trajectory) {
      const double bt = bump((s.time - tc) / rt);
      const double bt_prime = bump_prime((s.time - tc) / rt) / rt;
      if (bt == 0.0 && bt_prime == 0.0) continue;
      const FluxPrimitive A(velocity.at(s.time));
      const double a_k = A(k);
      for (int i = 0; i < n; ++i) {
        const double x = s.center(i);
        const double bx = bump((x - xc) / rx);
        const double bx_prime = bump_prime((x - xc) / rx) / rx;
        if (bx == 0.0 && bx_prime == 0.0) continue;
        const double m = s.M[static_cast<std::size_t>(i)];
        const double sgn = (m > k) ? 1.0 : (m < k ? -1.0 : 0.0);
        const double entropy = std::abs(m - k);
        const double entropy_flux = sgn * (A(m) - a_k);
        q += static_cast<long double>(entropy * bx * bt_prime +
                                      entropy_flux * bx_prime * bt) *
             dx * dt;
      }
    }
    const double residual = std::max(0.0, -static_cast<double>(q));
    report.residuals[li] = residual;
    report.max_residual = std::max(report.max_residual, residual);
  }
  return report;
}

}  // namespace topoflock
