// SPDX-License-Identifier: Apache-2.0
#include "topoflock/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topoflock/bounded_solver.hpp"
#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"
#include "topoflock/lagrangian.hpp"

namespace topoflock {

RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& energy) {
  if (times.size() != energy.size() || times.empty()) {
    throw config_error("rate fit: times and energy must match and be nonempty");
  }
  RateFit fit;
  const double e0 = energy[0];
  if (!(e0 > 0.0)) return fit;
  const double lo = 1e-10 * e0;
  const double hi = 1e-1 * e0;
  std::vector<double> t, loge;
  double e_min = std::numeric_limits<double>::infinity();
  double e_max = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (energy[i] >= lo && energy[i] <= hi) {
      t.push_back(times[i]);
      loge.push_back(std::log(energy[i]));
      e_min = std::min(e_min, energy[i]);
      e_max = std::max(e_max, energy[i]);
    }
  }
  fit.points = static_cast<int>(t.size());
  if (fit.points < 2) return fit;
  long double st = 0.0L, sy = 0.0L, stt = 0.0L, sty = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += loge[i];
    stt += static_cast<long double>(t[i]) * t[i];
    sty += static_cast<long double>(t[i]) * loge[i];
  }
  const long double n = static_cast<long double>(t.size());
  const long double denom = n * stt - st * st;
  if (denom <= 0.0L) return fit;
  const double slope = static_cast<double>((n * sty - st * sy) / denom);
  const double intercept = static_cast<double>((sy - slope * st) / n);
  fit.rate = -slope;
  long double ss = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = loge[i] - (intercept + slope * t[i]);
    ss += static_cast<long double>(r) * r;
  }
  fit.residual = std::sqrt(static_cast<double>(ss / n));
  fit.valid = e_max >= 100.0 * e_min;
  return fit;
}

void DecayRecord::save_csv(const std::string& path) const {
  csv::Writer w(path, "t,energy,dirichlet,supdev");
  for (std::size_t i = 0; i < times.size(); ++i) {
    w.row({times[i], energy[i], dirichlet[i], sup_dev[i]});
  }
  w.close();
}

DecayRecord make_decay_record(
    const std::vector<VelocityGrid>& trajectory,
    const std::function<double(const std::vector<double>&)>& dirichlet_form) {
  if (trajectory.empty()) throw config_error("decay record: empty trajectory");
  DecayRecord rec;
  for (const VelocityGrid& g : trajectory) {
    rec.times.push_back(g.time);
    rec.energy.push_back(g.deviation_energy());
    rec.dirichlet.push_back(dirichlet_form(g.values));
    rec.sup_dev.push_back(g.sup_deviation());
  }
  const double tol = 1e-12 * (rec.energy[0] + 1.0);
  for (std::size_t i = 1; i < rec.energy.size(); ++i) {
    if (rec.energy[i] > rec.energy[i - 1] + tol) rec.energy_monotone = false;
  }
  rec.fit = fit_decay_rate(rec.times, rec.energy);
  return rec;
}

namespace {

double l2_mass_norm(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i];
    acc += d * d;
  }
  return std::sqrt(static_cast<double>(acc / static_cast<double>(a.size())));
}

MarginReport poincare_ratios(const std::vector<double>& times,
                             const std::vector<double>& distances, double c_phi) {
  if (!(c_phi > 0.0) || !std::isfinite(c_phi)) {
    throw config_error("poincare check: c_phi must be finite and positive");
  }
  MarginReport report;
  report.times = times;
  const double d0 = distances[0];
  const double t0 = times[0];
  for (std::size_t i = 0; i < times.size(); ++i) {
    double ratio = 0.0;
    if (d0 > 0.0) {
      ratio = distances[i] / (std::exp(-(times[i] - t0) / c_phi) * d0);
    }
    report.ratios.push_back(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  return report;
}

}  // namespace

MarginReport poincare_decay_check(const std::vector<VelocityGrid>& first,
                                  const std::vector<VelocityGrid>& second, double c_phi) {
  if (first.size() != second.size() || first.empty()) {
    throw config_error("poincare check: trajectories must match in length");
  }
  std::vector<double> times, distances;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].n != second[i].n ||
        std::abs(first[i].time - second[i].time) > 1e-12) {
      throw config_error("poincare check: snapshots must share grid and times");
    }
    times.push_back(first[i].time);
    distances.push_back(l2_mass_norm(first[i].values, second[i].values));
  }
  return poincare_ratios(times, distances, c_phi);
}

MarginReport poincare_decay_check(const std::vector<VelocityGrid>& trajectory,
                                  double c_phi) {
  if (trajectory.empty()) throw config_error("poincare check: empty trajectory");
  const double mean0 = trajectory[0].mean();
  std::vector<double> times, distances;
  for (const VelocityGrid& g : trajectory) {
    times.push_back(g.time);
    long double acc = 0.0L;
    for (double v : g.values) {
      const long double d = static_cast<long double>(v) - mean0;
      acc += d * d;
    }
    distances.push_back(std::sqrt(static_cast<double>(acc / g.n)));
  }
  return poincare_ratios(times, distances, c_phi);
}

CouplingReport coupling_distance(const VelocityGrid& v1, const MassProfile& m1,
                                 const VelocityGrid& v2, const MassProfile& m2,
                                 int n_samples) {
  if (v1.n != v2.n) throw config_error("coupling distance: common mass grid required");
  if (n_samples < 1) throw config_error("coupling distance: n_samples must be positive");
  CouplingReport report;
  long double acc = 0.0L;
  for (int i = 0; i < v1.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const long double d = static_cast<long double>(v1.values[k]) - v2.values[k];
    acc += d * d;
  }
  report.mass_side = static_cast<double>(acc / v1.n);

  long double acc_e = 0.0L;
  for (int q = 0; q < n_samples; ++q) {
    const double m = (q + 0.5) / n_samples;
    const double x = m1.quantile(m);
    const double y = m2.quantile(m);
    const long double d = static_cast<long double>(v1.at_mass(m1(x))) - v2.at_mass(m2(y));
    acc_e += d * d;
  }
  report.eulerian_side = static_cast<double>(acc_e / n_samples);
  return report;
}

SupDecayReport sup_decay_check(const std::vector<VelocityGrid>& trajectory,
                               double lambda1, double tau, double sobolev_tau) {
  if (trajectory.empty()) throw config_error("sup decay check: empty trajectory");
  SupDecayReport report;
  std::size_t i0 = trajectory.size();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory[i].time >= tau - 1e-12) {
      i0 = i;
      break;
    }
  }
  if (i0 == trajectory.size()) {
    throw config_error("sup decay check: no snapshot at or after tau");
  }
  if (!(sobolev_tau > 0.0)) {
    report.stable = true;
    return report;
  }
  const double t_ref = trajectory[i0].time;
  report.c0 = trajectory[i0].sup_deviation() / sobolev_tau;
  for (std::size_t i = i0; i < trajectory.size(); ++i) {
    const VelocityGrid& g = trajectory[i];
    const double c_t =
        g.sup_deviation() * std::exp(lambda1 * (g.time - t_ref)) / sobolev_tau;
    report.times.push_back(g.time);
    double growth;
    if (report.c0 > 0.0) {
      growth = c_t / report.c0;
    } else {
      growth = (c_t > 0.0) ? std::numeric_limits<double>::infinity() : 0.0;
    }
    report.growth.push_back(growth);
    report.max_growth = std::max(report.max_growth, growth);
  }
  report.stable = report.max_growth <= 2.0 + 1e-9;
  return report;
}

double l1_density_distance(const MassProfile& a, const MassProfile& b) {
  if (a.has_atoms() || b.has_atoms()) {
    throw unsupported_operation(
        "density distance requires absolutely continuous profiles");
  }
  const auto [ax, as] = a.density();
  const auto [bx, bs] = b.density();
  std::vector<double> cuts;
  cuts.reserve(ax.size() + bx.size());
  cuts.insert(cuts.end(), ax.begin(), ax.end());
  cuts.insert(cuts.end(), bx.begin(), bx.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto slope_at = [](const std::vector<double>& x, const std::vector<double>& s,
                     double point) {
    if (point < x.front() || point >= x.back()) return 0.0;
    const auto it = std::upper_bound(x.begin(), x.end(), point);
    const std::size_t cell = static_cast<std::size_t>(it - x.begin()) - 1;
    return (cell < s.size()) ? s[cell] : 0.0;
  };

  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double diff = slope_at(ax, as, mid) - slope_at(bx, bs, mid);
    total += std::abs(static_cast<long double>(diff)) * (cuts[i + 1] - cuts[i]);
  }
  return static_cast<double>(total);
}

FlockingReport flocking_diagnostic(const std::vector<double>& times,
                                   const std::vector<MassProfile>& profiles,
                                   double u_bar) {
  if (times.size() != profiles.size() || times.size() < 2) {
    throw config_error("flocking diagnostic: need >= 2 matched snapshots");
  }
  FlockingReport report;
  std::vector<MassProfile> shifted;
  shifted.reserve(profiles.size());
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    shifted.push_back(profiles[k].shifted(-u_bar * times[k]));
  }
  for (std::size_t k = 0; k + 1 < shifted.size(); ++k) {
    report.times.push_back(times[k + 1]);
    report.distances.push_back(l1_density_distance(shifted[k], shifted[k + 1]));
  }
  const std::size_t n = report.distances.size();
  const std::size_t tail = std::max<std::size_t>(2, n / 3);
  bool decreasing = true;
  if (n >= 2) {
    for (std::size_t k = n - std::min(tail, n); k + 1 < n; ++k) {
      if (report.distances[k + 1] > 1.05 * report.distances[k]) decreasing = false;
    }
  }
  report.declared = decreasing && report.distances.back() < report.threshold;
  return report;
}

void CrossValidateReport::save_csv(const std::string& path) const {
  csv::Writer w(path, "P,n_x,l1_rho,linf_v");
  for (const CrossValidateRow& r : rows) {
    w.row({static_cast<double>(r.particles), static_cast<double>(r.n_x), r.l1_rho,
           r.linf_v});
  }
  w.close();
}

CrossValidateReport cross_validate(const Kernel& kernel, const MassProfile& rho0,
                                   const std::function<double(double)>& u0,
                                   const std::vector<std::pair<int, int>>& resolutions,
                                   double t_final, const ConservationParams& domain,
                                   double dt_particles) {
  if (resolutions.empty()) throw config_error("cross validate: no resolutions");
  if (!(t_final > 0.0)) throw config_error("cross validate: t_final must be positive");
  CrossValidateReport report;
  const auto v0_of_mass = to_mass_velocity(rho0, u0);

  for (const auto& [particles, n_x] : resolutions) {
    // Mass-coordinate pipeline: velocity decoupled on the mass grid, then the
    // scalar conservation law for M driven by the stored trajectory.
    BoundedOperator op(kernel, n_x);
    const VelocityGrid v0 = VelocityGrid::sample(n_x, v0_of_mass);
    const int snaps = std::max(8, n_x / 4);
    std::vector<double> times(static_cast<std::size_t>(snaps) + 1);
    for (int j = 0; j <= snaps; ++j) times[static_cast<std::size_t>(j)] = t_final * j / snaps;
    const double dt_v = std::min(0.025, 0.5 / std::max(op.sup_phi(), 1e-12));
    const std::vector<VelocityGrid> v_traj = op.evolve(v0, dt_v, times);
    const VelocityTrajectory velocity(v_traj);

    ConservationParams params = domain;
    params.n_x = n_x;
    const ConservationSolver solver(params);
    const double dx = (params.x_hi - params.x_lo) / n_x;
    std::vector<double> m0(static_cast<std::size_t>(n_x));
    for (int i = 0; i < n_x; ++i) {
      m0[static_cast<std::size_t>(i)] = rho0(params.x_lo + (i + 0.5) * dx);
    }
    const ConservationRun mass_run = solver.run(m0, velocity, 0.0, {t_final});
    const MassProfile rho_mass = mass_run.outputs.back().profile();

    // Particle pipeline on the same data.
    const LagrangianFlow flow(kernel, rho0, u0, particles);
    const FlowRun particle_run = flow.run(dt_particles, {t_final});
    const LagrangianState& final_state = particle_run.outputs.back();
    const MassProfile rho_particles = particle_mass_profile(final_state);

    CrossValidateRow row;
    row.particles = particles;
    row.n_x = n_x;
    row.l1_rho = l1_density_distance(rho_mass, rho_particles);
    const VelocityGrid& v_final = v_traj.back();
    double linf = 0.0;
    for (int k = 0; k < particles; ++k) {
      const double m = (k + 0.5) / particles;
      linf = std::max(linf, std::abs(v_final.at_mass(m) -
                                     final_state.V[static_cast<std::size_t>(k)]));
    }
    row.linf_v = linf;
    report.rows.push_back(row);
  }

  if (report.rows.size() >= 2) {
    const CrossValidateRow& coarse = report.rows[report.rows.size() - 2];
    const CrossValidateRow& fine = report.rows.back();
    if (coarse.l1_rho > 0.0 && fine.l1_rho > 0.0 && fine.n_x != coarse.n_x) {
      report.fitted_order = std::log(coarse.l1_rho / fine.l1_rho) /
                            std::log(static_cast<double>(fine.n_x) / coarse.n_x);
    }
  }
  return report;
}

}  // namespace topoflock
