// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "topoflock/config.hpp"
#include "topoflock/errors.hpp"

namespace fs = std::filesystem;
using topoflock::config_error;
using topoflock::io_error;
using topoflock::ojson;
using topoflock::RunConfig;

namespace {

ojson minimal_mass() {
  ojson doc;
  doc["mode"] = "mass";
  doc["kernel"] = {{"family", "constant"}};
  return doc;
}

// Returns the config_error message for a document, or "" if it parses.
std::string parse_error(const ojson& doc) {
  try {
    (void)RunConfig::parse(doc, ".");
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Runs the installed CLI binary with the given argument string, capturing
// stdout+stderr into *output; returns the process exit code.
int run_cli(const std::string& args, const fs::path& scratch, std::string* output) {
  static int counter = 0;
  const fs::path log = scratch / ("cli_log_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(TOPOFLOCK_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (output != nullptr) *output = oracle::read_file(log);
  if (!WIFEXITED(raw)) return -1;
  return WEXITSTATUS(raw);
}

void write_config(const fs::path& path, const ojson& doc) {
  oracle::write_file(path, doc.dump(2) + "\n");
}

}  // namespace

TEST_CASE("a minimal document fills every default") {
  const RunConfig cfg = RunConfig::parse(minimal_mass(), ".");
  CHECK(cfg.mode == "mass");
  CHECK(cfg.seed == 12345);
  CHECK(cfg.particles == 200);
  CHECK(cfg.n_mass == 256);
  CHECK(cfg.n_x == 400);
  CHECK(cfg.x_lo == doctest::Approx(-0.5));
  CHECK(cfg.x_hi == doctest::Approx(1.5));
  CHECK(cfg.t_final == doctest::Approx(1.0));
  CHECK(cfg.dt == 0.0);
  CHECK(cfg.cfl == doctest::Approx(0.5));
  CHECK(cfg.slope_factor == doctest::Approx(50.0));
  CHECK_FALSE(cfg.radial);
  CHECK(cfg.bc == topoflock::spectral_bc::neumann);
  REQUIRE(cfg.output_times.size() == 11);
  for (int k = 0; k <= 10; ++k) {
    CHECK(cfg.output_times[static_cast<std::size_t>(k)] == doctest::Approx(0.1 * k));
  }
  CHECK(cfg.velocity.family == "constant");
  CHECK(cfg.velocity.frame == "mass");
  REQUIRE(cfg.compare_resolutions.size() == 2);
  CHECK(cfg.compare_resolutions[0] == std::pair<int, int>{400, 400});
  CHECK(cfg.compare_resolutions[1] == std::pair<int, int>{800, 800});
  // Uniform density on [0, 1] by default.
  CHECK(cfg.rho0(0.25) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(cfg.kernel.eval(0.0) == doctest::Approx(1.0));
}

TEST_CASE("a fully specified document round-trips every field") {
  ojson doc;
  doc["mode"] = "lagrangian";
  doc["seed"] = 7;
  doc["kernel"] = {{"family", "affine_decay"}, {"scale", 2.0}, {"slope", 1.0},
                   {"alpha", 0.5}};
  doc["rho0"] = {{"family", "uniform"}, {"lo", -1.0}, {"hi", 3.0}};
  doc["velocity"] = {{"family", "step"}, {"left", -1.0}, {"right", 2.0},
                     {"threshold", 0.25}};
  doc["resolutions"] = {{"P", 40}, {"N", 64}, {"n_x", 128}};
  doc["domain"] = {{"x_lo", -2.0}, {"x_hi", 4.0}};
  doc["t_final"] = 2.5;
  doc["output_times"] = {0.0, 1.0, 2.5};
  doc["dt"] = 0.01;
  doc["cfl"] = 0.25;
  doc["slope_factor"] = 80.0;
  doc["radial"] = true;
  doc["spectral_bc"] = "dirichlet";
  doc["compare"] = {{"resolutions", {{100, 200}, {200, 400}}}};
  const RunConfig cfg = RunConfig::parse(doc, "/tmp");
  CHECK(cfg.mode == "lagrangian");
  CHECK(cfg.seed == 7);
  CHECK(cfg.particles == 40);
  CHECK(cfg.n_mass == 64);
  CHECK(cfg.n_x == 128);
  CHECK(cfg.x_lo == doctest::Approx(-2.0));
  CHECK(cfg.x_hi == doctest::Approx(4.0));
  CHECK(cfg.t_final == doctest::Approx(2.5));
  CHECK(cfg.dt == doctest::Approx(0.01));
  CHECK(cfg.cfl == doctest::Approx(0.25));
  CHECK(cfg.slope_factor == doctest::Approx(80.0));
  CHECK(cfg.radial);
  CHECK(cfg.bc == topoflock::spectral_bc::dirichlet);
  REQUIRE(cfg.output_times.size() == 3);
  CHECK(cfg.output_times[2] == doctest::Approx(2.5));
  // Lagrangian mode defaults the velocity frame to space.
  CHECK(cfg.velocity.family == "step");
  CHECK(cfg.velocity.frame == "space");
  CHECK(cfg.velocity.threshold == doctest::Approx(0.25));
  REQUIRE(cfg.compare_resolutions.size() == 2);
  CHECK(cfg.compare_resolutions[0] == std::pair<int, int>{100, 200});
  CHECK(cfg.base_dir == fs::path("/tmp"));
  CHECK(cfg.kernel.eval(0.0) == doctest::Approx(2.0));
}

TEST_CASE("unknown keys are rejected with a dotted path") {
  ojson doc = minimal_mass();
  doc["bogus"] = 1;
  CHECK(contains(parse_error(doc), "(root).bogus: unknown key"));

  doc = minimal_mass();
  doc["domain"] = {{"x_lo", 0.0}, {"x_high", 1.0}};
  CHECK(contains(parse_error(doc), "domain.x_high: unknown key"));

  doc = minimal_mass();
  doc["resolutions"] = {{"P", 8}, {"cells", 100}};
  CHECK(contains(parse_error(doc), "resolutions.cells: unknown key"));

  doc = minimal_mass();
  doc["kernel"] = {{"family", "constant"}, {"s", 0.5}};
  CHECK(contains(parse_error(doc), "kernel.s: unknown key"));

  doc = minimal_mass();
  doc["velocity"] = {{"family", "sine"}, {"omega", 2.0}};
  CHECK(contains(parse_error(doc), "velocity.omega: unknown key"));

  doc = minimal_mass();
  doc["rho0"] = {{"family", "uniform"}, {"width", 1.0}};
  CHECK(contains(parse_error(doc), "rho0.width: unknown key"));
}

TEST_CASE("mode and kernel family must be compatible") {
  ojson doc = minimal_mass();
  doc["mode"] = "spectral";
  CHECK(contains(parse_error(doc), "spectral mode requires a power_law kernel"));

  doc = minimal_mass();
  doc["kernel"] = {{"family", "power_law"}, {"s", 0.75}};
  CHECK(contains(parse_error(doc), "mass mode requires a bounded kernel"));

  doc = minimal_mass();
  doc["kernel"] = {{"family", "affine_decay_general"}, {"a", 1.0}, {"b", 1.0},
                   {"halfwidth", 0.5}};
  CHECK(contains(parse_error(doc), "mass mode requires a pure kernel"));

  doc["mode"] = "compare";
  CHECK(contains(parse_error(doc), "compare mode requires a pure kernel"));

  // General bounded kernels are fine for the particle system.
  doc["mode"] = "lagrangian";
  CHECK(parse_error(doc).empty());

  doc = minimal_mass();
  doc["mode"] = "lagrangian";
  doc["kernel"] = {{"family", "power_law"}, {"s", 0.5}};
  CHECK(contains(parse_error(doc), "lagrangian mode requires a bounded kernel"));

  // Spectral mode with a power-law kernel parses.
  doc = minimal_mass();
  doc["mode"] = "spectral";
  doc["kernel"] = {{"family", "power_law"}, {"s", 0.75}};
  CHECK(parse_error(doc).empty());
}

TEST_CASE("sweep mode delegates the per-point mode to the sweep block") {
  ojson doc = minimal_mass();
  doc["mode"] = "sweep";
  CHECK(contains(parse_error(doc), "mode 'sweep' requires a sweep block"));

  doc["sweep"] = {{"path", "kernel.value"}, {"values", {0.5, 1.0}}};
  CHECK(contains(parse_error(doc), "sweep.mode: required when mode is 'sweep'"));

  doc["sweep"]["mode"] = "mass";
  const RunConfig cfg = RunConfig::parse(doc, ".");
  CHECK(cfg.mode == "mass");
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->path == "kernel.value");
  REQUIRE(cfg.sweep->values.size() == 2);
  CHECK(cfg.sweep->values[1] == doctest::Approx(1.0));

  doc["sweep"] = {{"values", {1.0}}, {"mode", "mass"}};
  CHECK(contains(parse_error(doc), "sweep.path: missing dotted key path"));

  doc["sweep"] = {{"path", "cfl"}, {"values", {"a"}}, {"mode", "mass"}};
  CHECK(contains(parse_error(doc), "sweep.values: expected numbers"));

  doc["sweep"] = {{"path", "cfl"}, {"values", ojson::array()}, {"mode", "mass"}};
  CHECK(contains(parse_error(doc), "sweep.values: expected a nonempty numeric array"));
}

TEST_CASE("out-of-range parameters are rejected") {
  ojson doc = minimal_mass();
  doc["seed"] = -1;
  CHECK(contains(parse_error(doc), "seed: expected a nonnegative integer"));

  doc = minimal_mass();
  doc["resolutions"] = {{"P", 1}};
  CHECK(contains(parse_error(doc), "P must be >= 2"));
  doc["resolutions"] = {{"N", 1}};
  CHECK(contains(parse_error(doc), "N must be >= 2"));
  doc["resolutions"] = {{"n_x", 3}};
  CHECK(contains(parse_error(doc), "n_x must be >= 4"));

  doc = minimal_mass();
  doc["domain"] = {{"x_lo", 1.0}, {"x_hi", 1.0}};
  CHECK(contains(parse_error(doc), "x_lo must be < x_hi"));

  doc = minimal_mass();
  doc["t_final"] = 0.0;
  CHECK(contains(parse_error(doc), "t_final: must be positive"));

  doc = minimal_mass();
  doc["dt"] = -0.1;
  CHECK(contains(parse_error(doc), "dt: must be nonnegative"));

  doc = minimal_mass();
  doc["cfl"] = 0.6;
  CHECK(contains(parse_error(doc), "cfl: must lie in (0, 1/2]"));
  doc["cfl"] = 0.0;
  CHECK(contains(parse_error(doc), "cfl: must lie in (0, 1/2]"));

  doc = minimal_mass();
  doc["spectral_bc"] = "periodic";
  CHECK(contains(parse_error(doc), "spectral_bc: expected neumann|dirichlet"));

  doc = minimal_mass();
  doc["output_times"] = {0.0, 0.5, 0.25};
  CHECK(contains(parse_error(doc), "output_times: entries must be sorted"));
  doc["output_times"] = {0.0, 2.0};
  CHECK(contains(parse_error(doc), "entries must lie in [0, t_final]"));
  doc["output_times"] = ojson::array();
  CHECK(contains(parse_error(doc), "output_times: expected a nonempty array"));
  doc["output_times"] = {0.0, "later"};
  CHECK(contains(parse_error(doc), "output_times: expected numbers"));

  doc = minimal_mass();
  doc["compare"] = {{"resolutions", {3}}};
  CHECK(contains(parse_error(doc), "expected [P, n_x] integer pairs"));
  doc["compare"] = {{"resolutions", {{2}}}};
  CHECK(contains(parse_error(doc), "expected [P, n_x] integer pairs"));
  doc["compare"] = {{"resolutions", {{2, 4.5}}}};
  CHECK(contains(parse_error(doc), "expected [P, n_x] integer pairs"));
  doc["compare"] = {{"resolutions", {{1, 8}}}};
  CHECK(contains(parse_error(doc), "resolutions must be positive"));

  doc = minimal_mass();
  doc["rho0"] = {{"family", "uniform"}, {"lo", 1.0}, {"hi", 0.0}};
  CHECK(contains(parse_error(doc), "uniform needs lo < hi"));

  doc = minimal_mass();
  doc["kernel"] = {{"family", "power_law"}, {"s", 1.5}};
  CHECK(contains(parse_error(doc), "s must lie in (0, 1)"));
  doc["kernel"] = {{"family", "gaussian"}};
  CHECK(contains(parse_error(doc), "kernel.family: expected"));

  doc = minimal_mass();
  doc["velocity"] = {{"family", "sawtooth"}};
  CHECK(contains(parse_error(doc), "unknown velocity family 'sawtooth'"));
  doc["velocity"] = {{"family", "sine"}, {"frame", "phase"}};
  CHECK(contains(parse_error(doc), "velocity.frame: expected mass|space"));
  doc["velocity"] = {{"family", "custom_csv"}};
  CHECK(contains(parse_error(doc), "velocity.csv: missing CSV path"));

  doc = minimal_mass();
  doc.erase("kernel");
  CHECK(contains(parse_error(doc), "kernel: missing required object"));

  doc = minimal_mass();
  doc["mode"] = "eulerian";
  CHECK(contains(parse_error(doc), "expected mass|spectral|lagrangian|compare|sweep"));
}

TEST_CASE("analytic velocity families evaluate exactly") {
  ojson doc = minimal_mass();
  doc["velocity"] = {{"family", "constant"}, {"value", 0.7}};
  RunConfig cfg = RunConfig::parse(doc, ".");
  const auto g_const = cfg.initial_mass_velocity(8);
  for (double v : g_const.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(cfg.initial_space_velocity()(0.3) == doctest::Approx(0.7).epsilon(1e-15));

  doc["velocity"] = {{"family", "linear"}, {"intercept", -0.25}, {"slope", 0.5}};
  cfg = RunConfig::parse(doc, ".");
  auto g = cfg.initial_mass_velocity(16);
  for (int i = 0; i < 16; ++i) {
    const double m = (i + 0.5) / 16.0;
    CHECK(g.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(-0.25 + 0.5 * m).epsilon(1e-15));
  }

  doc["velocity"] = {{"family", "sine"}, {"amplitude", 0.3}, {"frequency", 2.0},
                     {"phase", 0.25}};
  cfg = RunConfig::parse(doc, ".");
  g = cfg.initial_mass_velocity(32);
  for (int i = 0; i < 32; ++i) {
    const double m = (i + 0.5) / 32.0;
    CHECK(g.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(0.3 * std::sin(2.0 * M_PI * 2.0 * m + 0.25)).epsilon(1e-15));
  }

  doc["velocity"] = {{"family", "step"}, {"left", -1.0}, {"right", 2.0},
                     {"threshold", 0.4}};
  cfg = RunConfig::parse(doc, ".");
  g = cfg.initial_mass_velocity(10);
  for (int i = 0; i < 10; ++i) {
    const double m = (i + 0.5) / 10.0;
    CHECK(g.values[static_cast<std::size_t>(i)] == (m < 0.4 ? -1.0 : 2.0));
  }

  // Space-frame families are composed with the quantile map; rho0 uniform on
  // [0, 2] has quantile(m) = 2m.
  doc["rho0"] = {{"family", "uniform"}, {"lo", 0.0}, {"hi", 2.0}};
  doc["velocity"] = {{"family", "linear"}, {"intercept", 0.1}, {"slope", 0.5},
                     {"frame", "space"}};
  cfg = RunConfig::parse(doc, ".");
  g = cfg.initial_mass_velocity(8);
  for (int i = 0; i < 8; ++i) {
    const double m = (i + 0.5) / 8.0;
    CHECK(g.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(0.1 + 0.5 * (2.0 * m)).epsilon(1e-13));
  }
  // And mass-frame families compose with the CDF in space: M(x) = x/2.
  doc["velocity"] = {{"family", "linear"}, {"intercept", 0.0}, {"slope", 1.0},
                     {"frame", "mass"}};
  cfg = RunConfig::parse(doc, ".");
  CHECK(cfg.initial_space_velocity()(1.2) == doctest::Approx(0.6).epsilon(1e-13));
}

TEST_CASE("the random family is deterministic, mean zero, and mass-frame only") {
  ojson doc = minimal_mass();
  doc["seed"] = 424242;
  doc["velocity"] = {{"family", "random_mean_zero"}, {"amplitude", 0.5}};
  const RunConfig cfg = RunConfig::parse(doc, ".");
  const auto g1 = cfg.initial_mass_velocity(256);
  const auto g2 = cfg.initial_mass_velocity(256);
  REQUIRE(g1.n == 256);
  for (int i = 0; i < 256; ++i) {
    CHECK(g1.values[static_cast<std::size_t>(i)] ==
          g2.values[static_cast<std::size_t>(i)]);
  }
  CHECK(std::abs(g1.mean()) <= 1e-13);
  for (double v : g1.values) CHECK(std::abs(v) <= 1.0 + 1e-12);

  doc["seed"] = 424243;
  const auto g3 = RunConfig::parse(doc, ".").initial_mass_velocity(256);
  bool any_diff = false;
  for (int i = 0; i < 256; ++i) {
    any_diff = any_diff || g1.values[static_cast<std::size_t>(i)] !=
                               g3.values[static_cast<std::size_t>(i)];
  }
  CHECK(any_diff);

  // Grid-based family cannot be read back as a function of space.
  CHECK_THROWS_AS((void)cfg.initial_space_velocity(), config_error);

  doc["velocity"]["frame"] = "space";
  CHECK(contains(parse_error(doc),
                 "random_mean_zero is grid-based and requires the mass frame"));
}

TEST_CASE("custom CSV velocities must match the requested grid") {
  const fs::path dir = oracle::scratch_dir("config_csv");
  std::string csv = "m,v\n";
  for (int i = 0; i < 8; ++i) {
    csv += std::to_string((i + 0.5) / 8.0) + "," + std::to_string(0.1 * i) + "\n";
  }
  oracle::write_file(dir / "v.csv", csv);

  ojson doc = minimal_mass();
  doc["velocity"] = {{"family", "custom_csv"}, {"csv", "v.csv"}};
  const RunConfig cfg = RunConfig::parse(doc, dir);
  const auto g = cfg.initial_mass_velocity(8);
  CHECK(g.values[3] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_WITH_AS((void)cfg.initial_mass_velocity(16),
                       doctest::Contains("grid has 8 cells, expected 16"), config_error);
}

TEST_CASE("file-level errors carry position or file information") {
  const fs::path dir = oracle::scratch_dir("config_files");
  const fs::path bad = dir / "bad.json";
  oracle::write_file(bad, "{\n  \"mode\": ,\n}\n");
  try {
    (void)RunConfig::parse_file(bad);
    CHECK(false);
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(contains(msg, bad.string()));
    CHECK(contains(msg, ":2:"));
  }

  CHECK_THROWS_WITH_AS((void)RunConfig::parse_file(dir / "missing.json"),
                       doctest::Contains("cannot open config file"), io_error);
}

TEST_CASE("cli: run produces outputs, honors exit codes, and is deterministic") {
  const fs::path dir = oracle::scratch_dir("cli");

  ojson doc = minimal_mass();
  doc["velocity"] = {{"family", "sine"}, {"amplitude", 0.3}};
  doc["resolutions"] = {{"P", 8}, {"N", 32}, {"n_x", 64}};
  doc["t_final"] = 0.2;
  doc["output_times"] = {0.0, 0.2};
  const fs::path cfg_path = dir / "run.json";
  write_config(cfg_path, doc);

  std::string out;
  const fs::path out_a = dir / "out_a";
  int code = run_cli("run " + cfg_path.string() + " --out " + out_a.string(), dir, &out);
  CHECK(code == 0);
  CHECK(contains(out, "wrote"));
  CHECK(fs::exists(out_a / "report.json"));
  CHECK(fs::exists(out_a / "manifest.json"));
  CHECK(fs::exists(out_a / "velocity_0000.csv"));
  CHECK(fs::exists(out_a / "state_0000.csv"));
  CHECK(fs::exists(out_a / "decay.csv"));

  // Identical invocation lands byte-identical files.
  const fs::path out_b = dir / "out_b";
  code = run_cli("run " + cfg_path.string() + " --out " + out_b.string(), dir, &out);
  CHECK(code == 0);
  std::string detail;
  const bool same = oracle::directories_identical(out_a, out_b, &detail);
  INFO(detail);
  CHECK(same);

  // validate reports the mode and kernel without running.
  code = run_cli("validate " + cfg_path.string(), dir, &out);
  CHECK(code == 0);
  CHECK(contains(out, "ok: mode=mass"));

  // Exit 2: config validation problems of several flavors.
  ojson bad = doc;
  bad["bogus"] = true;
  write_config(dir / "unknown_key.json", bad);
  code = run_cli("run " + (dir / "unknown_key.json").string() + " --out " +
                     (dir / "x1").string(),
                 dir, &out);
  CHECK(code == 2);
  CHECK(contains(out, "unknown key"));

  bad = doc;
  bad["cfl"] = 0.9;
  write_config(dir / "bad_cfl.json", bad);
  code = run_cli("validate " + (dir / "bad_cfl.json").string(), dir, &out);
  CHECK(code == 2);

  oracle::write_file(dir / "syntax.json", "{\"mode\": \"mass\",}");
  code = run_cli("validate " + (dir / "syntax.json").string(), dir, &out);
  CHECK(code == 2);

  code = run_cli("", dir, &out);
  CHECK(code == 2);

  code = run_cli("run", dir, &out);
  CHECK(code == 2);

  // Exit 4: unreadable config path.
  code = run_cli("run " + (dir / "absent.json").string(), dir, &out);
  CHECK(code == 4);
  CHECK(contains(out, "cannot open config file"));
}

TEST_CASE("cli: sweep subcommand fans out into per-point directories") {
  const fs::path dir = oracle::scratch_dir("cli_sweep");
  ojson doc = minimal_mass();
  // The swept key must exist in the document; the patcher refuses to invent keys.
  doc["kernel"]["value"] = 1.0;
  doc["velocity"] = {{"family", "sine"}, {"amplitude", 0.5}};
  doc["resolutions"] = {{"P", 8}, {"N", 32}, {"n_x", 64}};
  doc["t_final"] = 0.2;
  doc["output_times"] = {0.0, 0.2};
  doc["mode"] = "sweep";
  doc["sweep"] = {{"path", "kernel.value"}, {"values", {0.5, 1.0}}, {"mode", "mass"}};
  write_config(dir / "sweep.json", doc);

  std::string out;
  const fs::path out_dir = dir / "sweep_out";
  int code = run_cli("sweep " + (dir / "sweep.json").string() + " --out " +
                         out_dir.string(),
                     dir, &out);
  CHECK(code == 0);
  CHECK(fs::exists(out_dir / "sweep_summary.csv"));
  CHECK(fs::exists(out_dir / "point_000" / "report.json"));
  CHECK(fs::exists(out_dir / "point_001" / "manifest.json"));

  // A sweep invocation without a sweep block is a validation error.
  doc.erase("sweep");
  doc["mode"] = "mass";
  write_config(dir / "plain.json", doc);
  code = run_cli("sweep " + (dir / "plain.json").string() + " --out " +
                     (dir / "x").string(),
                 dir, &out);
  CHECK(code == 2);
  CHECK(contains(out, "requires a sweep block"));
}
