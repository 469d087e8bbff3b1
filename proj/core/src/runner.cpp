// SPDX-License-Identifier: Apache-2.0
#include "topoflock/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "topoflock/analysis.hpp"
#include "topoflock/bounded_solver.hpp"
#include "topoflock/conservation.hpp"
#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"
#include "topoflock/lagrangian.hpp"
#include "topoflock/spectral.hpp"

namespace topoflock {

namespace {

namespace fs = std::filesystem;

std::string indexed_name(const char* stem, int k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.csv", stem, k);
  return buf;
}

void write_json_file(const fs::path& path, const ojson& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw io_error("write failed: " + path.string());
}

ojson num_or_null(double v) {
  if (std::isfinite(v)) return ojson(v);
  return ojson(nullptr);
}

struct ReportFields {
  std::optional<double> rate_fit;
  std::optional<double> rate_bound;
  std::optional<double> lambda1;
  std::optional<double> max_ratio;
  std::optional<bool> flocking;
};

void write_report(const fs::path& dir, const ReportFields& r,
                  std::vector<std::string>& outputs) {
  ojson doc;
  doc["rate_fit"] = r.rate_fit ? ojson(*r.rate_fit) : ojson(nullptr);
  doc["rate_bound_2_over_cphi"] = r.rate_bound ? ojson(*r.rate_bound) : ojson(nullptr);
  doc["lambda1"] = r.lambda1 ? ojson(*r.lambda1) : ojson(nullptr);
  doc["max_ratio"] = r.max_ratio ? ojson(*r.max_ratio) : ojson(nullptr);
  doc["flocking_declared"] = r.flocking ? ojson(*r.flocking) : ojson(nullptr);
  write_json_file(dir / "report.json", doc);
  outputs.push_back("report.json");
}

struct Manifest {
  ojson derived = ojson::object();
  std::vector<ojson> flags;
  std::vector<std::string> outputs;
};

void write_manifest(const fs::path& dir, const RunConfig& cfg, Manifest& man) {
  ojson doc;
  doc["tool"] = "topoflock";
  doc["version"] = "0.1.0";
  doc["mode"] = cfg.mode;
  doc["seed"] = cfg.seed;
  doc["config"] = cfg.echo;
  doc["derived"] = man.derived;
  doc["flags"] = ojson::array();
  for (const ojson& f : man.flags) doc["flags"].push_back(f);
  man.outputs.push_back("manifest.json");
  doc["outputs"] = man.outputs;
  write_json_file(dir / "manifest.json", doc);
}

// Dense, sorted snapshot schedule covering the output times.
std::vector<double> dense_times(const std::vector<double>& output_times, double t_final,
                                int base_points) {
  std::vector<double> times;
  for (int j = 0; j <= base_points; ++j) {
    times.push_back(t_final * j / base_points);
  }
  times.insert(times.end(), output_times.begin(), output_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());
  return times;
}

const VelocityGrid& snapshot_at(const std::vector<VelocityGrid>& traj, double t) {
  for (const VelocityGrid& g : traj) {
    if (std::abs(g.time - t) <= 1e-9) return g;
  }
  throw config_error("internal: no velocity snapshot at requested time");
}

ojson threshold_flag(const char* name, const ThresholdReport& verdict) {
  ojson f;
  f["flag"] = name;
  f["verdict"] = verdict.satisfied ? "satisfied" : "violated";
  if (!verdict.satisfied) {
    f["alpha"] = verdict.alpha;
    f["beta"] = verdict.beta;
    f["gap"] = verdict.gap;
  }
  return f;
}

void add_flocking(const std::vector<double>& times, const std::vector<MassProfile>& profs,
                  double u_bar, ReportFields& rep, Manifest& man, const fs::path& dir) {
  if (profs.size() < 2) return;
  const FlockingReport fr = flocking_diagnostic(times, profs, u_bar);
  rep.flocking = fr.declared;
  ojson f;
  f["flag"] = "flocking_heuristic";
  f["declared"] = fr.declared;
  f["threshold"] = fr.threshold;
  f["note"] = "reporting convention; velocity alignment is the proved statement";
  man.flags.push_back(f);
  csv::Writer w((dir / "flocking.csv").string(), "t,l1_shifted_distance");
  for (std::size_t i = 0; i < fr.times.size(); ++i) {
    w.row({fr.times[i], fr.distances[i]});
  }
  w.close();
  man.outputs.push_back("flocking.csv");
}

void run_mass(const RunConfig& cfg, const fs::path& dir) {
  Manifest man;
  ReportFields rep;
  const BoundedOperator op(cfg.kernel, cfg.n_mass);
  const VelocityGrid v0 = cfg.initial_mass_velocity(cfg.n_mass);
  const double dt =
      cfg.dt > 0.0 ? cfg.dt : std::min(0.01, 0.5 / std::max(op.sup_phi(), 1e-12));

  const std::vector<double> vel_times = dense_times(cfg.output_times, cfg.t_final, 128);
  const std::vector<VelocityGrid> v_traj = op.evolve(v0, dt, vel_times);
  const VelocityTrajectory velocity(v_traj);

  man.flags.push_back(threshold_flag("mass_threshold", mass_threshold(v0, cfg.kernel).verdict));

  ConservationParams params;
  params.x_lo = cfg.x_lo;
  params.x_hi = cfg.x_hi;
  params.n_x = cfg.n_x;
  params.cfl = cfg.cfl;
  params.slope_factor = cfg.slope_factor;
  const ConservationSolver solver(params);
  const double dx = (cfg.x_hi - cfg.x_lo) / cfg.n_x;
  std::vector<double> m0(static_cast<std::size_t>(cfg.n_x));
  for (int i = 0; i < cfg.n_x; ++i) {
    m0[static_cast<std::size_t>(i)] = cfg.rho0(cfg.x_lo + (i + 0.5) * dx);
  }
  const ConservationRun run = solver.run(m0, velocity, 0.0, cfg.output_times);

  std::vector<MassProfile> profiles;
  for (std::size_t k = 0; k < cfg.output_times.size(); ++k) {
    const double t_out = cfg.output_times[k];
    const std::string vname = indexed_name("velocity", static_cast<int>(k));
    snapshot_at(v_traj, t_out).save_csv((dir / vname).string());
    man.outputs.push_back(vname);
    const std::string sname = indexed_name("state", static_cast<int>(k));
    run.outputs[k].save_csv((dir / sname).string());
    man.outputs.push_back(sname);
    profiles.push_back(run.outputs[k].profile());
  }

  const DecayRecord rec = make_decay_record(
      v_traj, [&](const std::vector<double>& v) { return op.dirichlet_form(v, v); });
  rec.save_csv((dir / "decay.csv").string());
  man.outputs.push_back("decay.csv");
  if (rec.fit.points >= 2) rep.rate_fit = rec.fit.rate;
  if (!rec.energy_monotone) {
    man.flags.push_back({{"flag", "energy_not_monotone"}});
  }

  const double c_phi = poincare_constant(cfg.kernel);
  if (std::isfinite(c_phi)) {
    rep.rate_bound = 2.0 / c_phi;
    rep.max_ratio = poincare_decay_check(v_traj, c_phi).max_ratio;
  } else {
    man.flags.push_back(
        {{"flag", "cphi_infinite"},
         {"note", "kernel vanishes on part of the unit interval; no uniform rate"}});
  }

  add_flocking(cfg.output_times, profiles, v0.mean(), rep, man, dir);

  if (run.monotonicity_violations > 0 || run.range_violations > 0 ||
      !run.slope_events.empty()) {
    ojson f;
    f["flag"] = "admissibility";
    f["monotonicity_violations"] = run.monotonicity_violations;
    f["range_violations"] = run.range_violations;
    ojson events = ojson::array();
    for (const SlopeEvent& e : run.slope_events) {
      events.push_back({{"time", e.time}, {"cell", e.cell}, {"slope", e.slope}});
    }
    f["slope_events"] = events;
    f["note"] = "heuristic monitor; absolute continuity of M is not asserted";
    man.flags.push_back(f);
  }

  man.derived["c_phi"] = num_or_null(c_phi);
  man.derived["sup_phi"] = num_or_null(op.sup_phi());
  man.derived["dt_velocity"] = dt;
  man.derived["dt_mass_effective"] = run.dt_effective;
  man.derived["mass_steps"] = run.steps_taken;
  man.derived["boundary_flux_left"] = run.boundary_flux_left;
  man.derived["boundary_flux_right"] = run.boundary_flux_right;
  man.derived["rho0_renormalization"] = cfg.rho0.renormalization();

  write_report(dir, rep, man.outputs);
  write_manifest(dir, cfg, man);
}

void run_spectral(const RunConfig& cfg, const fs::path& dir) {
  Manifest man;
  ReportFields rep;
  const double s = cfg.kernel.fractional_order();
  const SpectralOperator op(s, cfg.bc, cfg.n_mass);
  const VelocityGrid v0 = cfg.initial_mass_velocity(cfg.n_mass);

  std::vector<VelocityGrid> traj;
  for (std::size_t k = 0; k < cfg.output_times.size(); ++k) {
    traj.push_back(op.evolve(v0, cfg.output_times[k]));
    const std::string vname = indexed_name("velocity", static_cast<int>(k));
    traj.back().save_csv((dir / vname).string());
    man.outputs.push_back(vname);
  }
  op.save_spectrum_csv((dir / "spectrum.csv").string());
  man.outputs.push_back("spectrum.csv");

  const DecayRecord rec = make_decay_record(
      traj, [&](const std::vector<double>& v) { return op.dirichlet_form(v, v); });
  rec.save_csv((dir / "decay.csv").string());
  man.outputs.push_back("decay.csv");
  if (rec.fit.points >= 2) rep.rate_fit = rec.fit.rate;

  rep.lambda1 = op.lambda1();
  const double c_phi = poincare_constant(cfg.kernel);
  if (std::isfinite(c_phi)) rep.rate_bound = 2.0 / c_phi;

  if (cfg.bc == spectral_bc::neumann) {
    if (std::isfinite(c_phi)) {
      rep.max_ratio = poincare_decay_check(traj, c_phi).max_ratio;
    }
    if (s > 0.5 && traj.size() >= 2) {
      std::vector<double> dev = traj.front().values;
      const double mean = traj.front().mean();
      for (double& v : dev) v -= mean;
      const SupDecayReport sup = sup_decay_check(traj, op.lambda1(),
                                                 traj.front().time, op.sobolev_norm(dev));
      ojson f;
      f["flag"] = "sup_decay";
      f["stable"] = sup.stable;
      f["max_growth"] = num_or_null(sup.max_growth);
      man.flags.push_back(f);
    }
  } else {
    man.flags.push_back(
        {{"flag", "dirichlet_convention"},
         {"note", "pinned first/last cells; comparison convention, not a claim about "
                  "the mean-zero subspace"}});
  }
  man.flags.push_back(
      {{"flag", "spectral_adjacent_weight"},
       {"convention", s < 0.5 ? "exact_pair_integral" : "second_moment_matched"}});

  man.derived["s"] = s;
  man.derived["fractional_constant"] = fractional_constant(s);
  man.derived["lambda1"] = num_or_null(op.lambda1());
  man.derived["lambda_max"] = num_or_null(op.lambda(op.n_modes() - 1));
  man.derived["c_phi"] = num_or_null(c_phi);

  write_report(dir, rep, man.outputs);
  write_manifest(dir, cfg, man);
}

void run_lagrangian(const RunConfig& cfg, const fs::path& dir) {
  Manifest man;
  ReportFields rep;
  const auto u0 = cfg.initial_space_velocity();
  const LagrangianFlow flow(cfg.kernel, cfg.rho0, u0, cfg.particles, cfg.radial);
  const double dt = cfg.dt > 0.0 ? cfg.dt : 0.005;
  const FlowRun run = flow.run(dt, cfg.output_times);

  const LagrangianState& init = flow.initial();
  man.flags.push_back(threshold_flag("psi0_threshold",
                                     threshold_check(init.alpha, init.psi0)));
  const bool pure = cfg.kernel.kind() == kernel_kind::pure;
  if (pure) {
    const VelocityGrid v0m =
        VelocityGrid::sample(cfg.n_mass, to_mass_velocity(cfg.rho0, u0));
    man.flags.push_back(
        threshold_flag("mass_threshold", mass_threshold(v0m, cfg.kernel).verdict));
  }
  if (cfg.radial) {
    const BlowupPrediction pred = radial_blowup_bound(init.alpha, init.psi0);
    ojson f;
    f["flag"] = "radial_blowup_prediction";
    f["applicable"] = pred.applicable;
    if (pred.applicable) {
      f["alpha"] = pred.alpha;
      f["beta"] = pred.beta;
      f["crossing_time"] = pred.crossing_time;
      f["alternate_reciprocal_convention"] = pred.alternate_reciprocal;
      f["note"] = "crossing time of the linear gap bound; the reciprocal reading is "
                  "reported alongside rather than silently resolved";
    }
    man.flags.push_back(f);
  }
  if (run.blowup) {
    ojson f;
    f["flag"] = "blowup";
    f["time"] = run.blowup->time;
    f["cell"] = run.blowup->cell;
    f["gap"] = run.blowup->gap;
    f["inversion"] = run.blowup->inversion;
    man.flags.push_back(f);
  }

  bool euler_skipped = false;
  std::vector<double> out_times;
  std::vector<MassProfile> profiles;
  std::vector<VelocityGrid> v_grids;
  for (std::size_t k = 0; k < run.outputs.size(); ++k) {
    const LagrangianState& state = run.outputs[k];
    const std::string pname = indexed_name("particles", static_cast<int>(k));
    state.save_csv((dir / pname).string());
    man.outputs.push_back(pname);
    bool ordered = true;
    for (int i = 0; i + 1 < state.size(); ++i) {
      if (!(state.X[static_cast<std::size_t>(i + 1)] > state.X[static_cast<std::size_t>(i)])) {
        ordered = false;
        break;
      }
    }
    if (ordered) {
      const std::string ename = indexed_name("euler", static_cast<int>(k));
      eulerian_reconstruct(state).save_csv((dir / ename).string());
      man.outputs.push_back(ename);
      out_times.push_back(state.time);
      profiles.push_back(particle_mass_profile(state));
    } else {
      euler_skipped = true;
    }
    VelocityGrid g(cfg.particles, state.time);
    g.values = state.V;
    v_grids.push_back(std::move(g));
  }
  if (euler_skipped) {
    man.flags.push_back({{"flag", "euler_reconstruction_skipped"},
                         {"note", "particle ordering lost; classical mode ended"}});
  }

  {
    csv::Writer w((dir / "gaps.csv").string(), "t,min_gap_ratio");
    for (std::size_t i = 0; i < run.gap_times.size(); ++i) {
      w.row({run.gap_times[i], run.gap_ratios[i]});
    }
    w.close();
    man.outputs.push_back("gaps.csv");
  }

  if (v_grids.size() >= 2) {
    std::vector<double> times, energies;
    for (const VelocityGrid& g : v_grids) {
      times.push_back(g.time);
      energies.push_back(g.deviation_energy());
    }
    const RateFit fit = fit_decay_rate(times, energies);
    if (fit.points >= 2) rep.rate_fit = fit.rate;
  }
  if (pure) {
    const double c_phi = poincare_constant(cfg.kernel);
    if (std::isfinite(c_phi)) {
      rep.rate_bound = 2.0 / c_phi;
      if (v_grids.size() >= 2) {
        rep.max_ratio = poincare_decay_check(v_grids, c_phi).max_ratio;
      }
      man.derived["c_phi"] = c_phi;
    } else {
      man.derived["c_phi"] = nullptr;
      man.flags.push_back(
          {{"flag", "cphi_infinite"},
           {"note", "kernel vanishes on part of the unit interval; no uniform rate"}});
    }
    const BoundedOperator op(cfg.kernel, cfg.particles);
    const DecayRecord rec = make_decay_record(
        v_grids, [&](const std::vector<double>& v) { return op.dirichlet_form(v, v); });
    rec.save_csv((dir / "decay.csv").string());
    man.outputs.push_back("decay.csv");
  }

  if (!cfg.radial && profiles.size() >= 2) {
    double mean_v0 = 0.0;
    for (double v : init.V) mean_v0 += v;
    mean_v0 /= init.size();
    add_flocking(out_times, profiles, mean_v0, rep, man, dir);
  }

  man.derived["sup_phi"] = num_or_null(flow.sup_phi());
  man.derived["dt"] = dt;
  man.derived["momentum_drift"] = run.momentum_drift;
  man.derived["psi_drift"] = run.psi_drift;
  man.derived["halted"] = run.halted;

  write_report(dir, rep, man.outputs);
  write_manifest(dir, cfg, man);
}

void run_compare(const RunConfig& cfg, const fs::path& dir) {
  Manifest man;
  ReportFields rep;
  const auto u0 = cfg.initial_space_velocity();
  ConservationParams params;
  params.x_lo = cfg.x_lo;
  params.x_hi = cfg.x_hi;
  params.n_x = cfg.n_x;
  params.cfl = cfg.cfl;
  params.slope_factor = cfg.slope_factor;
  const double dt_particles = cfg.dt > 0.0 ? cfg.dt : 0.005;
  const CrossValidateReport report = cross_validate(
      cfg.kernel, cfg.rho0, u0, cfg.compare_resolutions, cfg.t_final, params, dt_particles);
  report.save_csv((dir / "compare.csv").string());
  man.outputs.push_back("compare.csv");

  std::cout << "P,n_x,l1_rho,linf_v\n";
  for (const CrossValidateRow& row : report.rows) {
    std::printf("%d,%d,%.6g,%.6g\n", row.particles, row.n_x, row.l1_rho, row.linf_v);
  }
  std::printf("fitted_order,%.4g\n", report.fitted_order);

  man.derived["fitted_order"] = report.fitted_order;
  write_report(dir, rep, man.outputs);
  write_manifest(dir, cfg, man);
}

}  // namespace

void run_config(const RunConfig& cfg, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory: " + out_dir.string());
  if (cfg.mode == "mass") {
    run_mass(cfg, out_dir);
  } else if (cfg.mode == "spectral") {
    run_spectral(cfg, out_dir);
  } else if (cfg.mode == "lagrangian") {
    run_lagrangian(cfg, out_dir);
  } else if (cfg.mode == "compare") {
    run_compare(cfg, out_dir);
  } else {
    throw config_error("config: mode: unknown mode '" + cfg.mode + "'");
  }
}

void run_sweep(const RunConfig& cfg, const fs::path& out_dir) {
  if (!cfg.sweep) {
    throw config_error("config: sweep: sweep mode requires a sweep block");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory: " + out_dir.string());

  // Split the dotted path into keys.
  std::vector<std::string> keys;
  {
    std::string rest = cfg.sweep->path;
    while (!rest.empty()) {
      const std::size_t dot = rest.find('.');
      keys.push_back(rest.substr(0, dot));
      if (dot == std::string::npos) break;
      rest = rest.substr(dot + 1);
    }
  }
  if (keys.empty()) throw config_error("config: sweep.path: empty path");

  csv::Writer summary((out_dir / "sweep_summary.csv").string(),
                      "index,value,rate_fit,rate_bound_2_over_cphi,lambda1,max_ratio,"
                      "flocking_declared");
  for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
    ojson doc = cfg.echo;
    doc.erase("sweep");
    doc["mode"] = cfg.mode;  // resolved per-point mode
    ojson* node = &doc;
    for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
      if (!node->contains(keys[k]) || !(*node)[keys[k]].is_object()) {
        throw config_error("config: sweep.path: '" + keys[k] + "' is not an object");
      }
      node = &(*node)[keys[k]];
    }
    if (!node->contains(keys.back())) {
      throw config_error("config: sweep.path: key '" + keys.back() + "' not present");
    }
    (*node)[keys.back()] = cfg.sweep->values[i];

    const RunConfig point = RunConfig::parse(doc, cfg.base_dir);
    char sub[32];
    std::snprintf(sub, sizeof sub, "point_%03d", static_cast<int>(i));
    run_config(point, out_dir / sub);

    std::ifstream rin(out_dir / sub / "report.json");
    ojson report = ojson::parse(rin);
    auto field = [&](const char* key) {
      return report.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN()
                                      : report.at(key).get<double>();
    };
    const double flock = report.at("flocking_declared").is_null()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : (report.at("flocking_declared").get<bool>() ? 1.0 : 0.0);
    summary.row({static_cast<double>(i), cfg.sweep->values[i], field("rate_fit"),
                 field("rate_bound_2_over_cphi"), field("lambda1"), field("max_ratio"),
                 flock});
  }
  summary.close();
}

}  // namespace topoflock
