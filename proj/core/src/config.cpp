// SPDX-License-Identifier: Apache-2.0
#include "topoflock/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"

namespace topoflock {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw config_error("config: " + path + ": " + what);
}

void expect_object(const ojson& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const ojson& j, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      fail(path + "." + item.key(), "unknown key");
    }
  }
}

double get_num(const ojson& j, const std::string& path, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

double req_num(const ojson& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required number");
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int get_int(const ojson& j, const std::string& path, const char* key, int def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

std::string get_str(const ojson& j, const std::string& path, const char* key,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

bool get_bool(const ojson& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

Kernel parse_kernel(const ojson& j) {
  const std::string path = "kernel";
  expect_object(j, path);
  const std::string family = get_str(j, path, "family", "");
  if (family == "constant") {
    check_keys(j, path, {"family", "value", "kind"});
    const double value = get_num(j, path, "value", 1.0);
    const std::string kind = get_str(j, path, "kind", "pure");
    if (kind != "pure" && kind != "general") fail(path + ".kind", "expected pure|general");
    return Kernel::constant(value, kind == "pure" ? kernel_kind::pure
                                                  : kernel_kind::general);
  }
  if (family == "power_law") {
    check_keys(j, path, {"family", "s"});
    const double s = req_num(j, path, "s");
    if (!(s > 0.0 && s < 1.0)) fail(path + ".s", "s must lie in (0, 1)");
    return Kernel::power_law(s);
  }
  if (family == "affine_decay") {
    check_keys(j, path, {"family", "scale", "slope", "alpha"});
    return Kernel::affine_decay(get_num(j, path, "scale", 1.0),
                                get_num(j, path, "slope", 1.0),
                                get_num(j, path, "alpha", 1.0));
  }
  if (family == "affine_decay_general") {
    check_keys(j, path, {"family", "a", "b", "halfwidth"});
    return Kernel::affine_decay_general(get_num(j, path, "a", 1.0),
                                        get_num(j, path, "b", 1.0),
                                        get_num(j, path, "halfwidth", 1.0));
  }
  fail(path + ".family",
       "expected constant|power_law|affine_decay|affine_decay_general, got '" + family +
           "'");
}

MassProfile parse_rho0(const ojson& j, const std::filesystem::path& base_dir) {
  const std::string path = "rho0";
  expect_object(j, path);
  const std::string family = get_str(j, path, "family", "");
  if (family == "uniform") {
    check_keys(j, path, {"family", "lo", "hi"});
    const double lo = get_num(j, path, "lo", 0.0);
    const double hi = get_num(j, path, "hi", 1.0);
    if (!(hi > lo)) fail(path, "uniform needs lo < hi");
    return MassProfile::uniform(lo, hi);
  }
  if (family == "two_block") {
    check_keys(j, path, {"family", "a0", "b0", "a1", "b1", "mass0"});
    return MassProfile::two_block(req_num(j, path, "a0"), req_num(j, path, "b0"),
                                  req_num(j, path, "a1"), req_num(j, path, "b1"),
                                  get_num(j, path, "mass0", 0.5));
  }
  if (family == "custom_csv") {
    check_keys(j, path, {"family", "csv"});
    const std::string csv = get_str(j, path, "csv", "");
    if (csv.empty()) fail(path + ".csv", "missing CSV path");
    return MassProfile::load_csv((base_dir / csv).string());
  }
  fail(path + ".family", "expected uniform|two_block|custom_csv, got '" + family + "'");
}

VelocitySpec parse_velocity(const ojson& j, const std::string& mode) {
  const std::string path = "velocity";
  expect_object(j, path);
  check_keys(j, path,
             {"family", "frame", "value", "intercept", "slope", "amplitude", "frequency",
              "phase", "left", "right", "threshold", "csv"});
  VelocitySpec spec;
  spec.family = get_str(j, path, "family", "constant");
  const std::set<std::string> families = {"constant", "linear",          "sine",
                                          "step",     "random_mean_zero", "custom_csv"};
  if (families.find(spec.family) == families.end()) {
    fail(path + ".family", "unknown velocity family '" + spec.family + "'");
  }
  spec.frame = get_str(j, path, "frame", mode == "lagrangian" ? "space" : "mass");
  if (spec.frame != "mass" && spec.frame != "space") {
    fail(path + ".frame", "expected mass|space");
  }
  spec.value = get_num(j, path, "value", 0.0);
  spec.intercept = get_num(j, path, "intercept", 0.0);
  spec.slope = get_num(j, path, "slope", 1.0);
  spec.amplitude = get_num(j, path, "amplitude", 1.0);
  spec.frequency = get_num(j, path, "frequency", 1.0);
  spec.phase = get_num(j, path, "phase", 0.0);
  spec.left = get_num(j, path, "left", 0.0);
  spec.right = get_num(j, path, "right", 0.0);
  spec.threshold = get_num(j, path, "threshold", 0.5);
  spec.csv_path = get_str(j, path, "csv", "");
  if (spec.family == "custom_csv" && spec.csv_path.empty()) {
    fail(path + ".csv", "missing CSV path");
  }
  return spec;
}

// Deterministic uniform double in [0, 1) independent of library distribution
// implementations.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::function<double(double)> family_function(const VelocitySpec& spec) {
  if (spec.family == "constant") {
    const double c = spec.value;
    return [c](double) { return c; };
  }
  if (spec.family == "linear") {
    const double a = spec.intercept, b = spec.slope;
    return [a, b](double x) { return a + b * x; };
  }
  if (spec.family == "sine") {
    const double amp = spec.amplitude, freq = spec.frequency, phase = spec.phase;
    return [amp, freq, phase](double x) {
      return amp * std::sin(2.0 * M_PI * freq * x + phase);
    };
  }
  if (spec.family == "step") {
    const double l = spec.left, r = spec.right, th = spec.threshold;
    return [l, r, th](double x) { return x < th ? l : r; };
  }
  throw config_error("config: velocity.family: '" + spec.family +
                     "' has no closed-form representative");
}

}  // namespace

RunConfig RunConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Convert the byte offset to a line:column position.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw config_error("config: " + path.string() + ":" + std::to_string(line) + ":" +
                       std::to_string(col) + ": " + e.what());
  }
  return parse(doc, path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path("."));
}

RunConfig RunConfig::parse(const ojson& doc, const std::filesystem::path& base_dir) {
  expect_object(doc, "(root)");
  check_keys(doc, "(root)",
             {"mode", "seed", "kernel", "rho0", "velocity", "resolutions", "domain",
              "t_final", "output_times", "dt", "cfl", "slope_factor", "radial",
              "spectral_bc", "compare", "sweep"});

  RunConfig cfg;
  cfg.echo = doc;
  cfg.base_dir = base_dir;
  cfg.mode = get_str(doc, "(root)", "mode", "");
  const std::set<std::string> modes = {"mass", "spectral", "lagrangian", "compare"};
  if (cfg.mode == "sweep") {
    // mode "sweep" delegates the per-point mode to sweep.mode.
    if (!doc.contains("sweep") || !doc.at("sweep").is_object()) {
      fail("sweep", "mode 'sweep' requires a sweep block");
    }
    cfg.mode = get_str(doc.at("sweep"), "sweep", "mode", "");
    if (cfg.mode.empty()) fail("sweep.mode", "required when mode is 'sweep'");
  }
  if (modes.find(cfg.mode) == modes.end()) {
    fail("mode", "expected mass|spectral|lagrangian|compare|sweep, got '" + cfg.mode + "'");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      fail("seed", "expected a nonnegative integer");
    }
    const auto seed = doc.at("seed").get<long long>();
    if (seed < 0) fail("seed", "expected a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  if (!doc.contains("kernel")) fail("kernel", "missing required object");
  cfg.kernel = parse_kernel(doc.at("kernel"));
  if (doc.contains("rho0")) cfg.rho0 = parse_rho0(doc.at("rho0"), base_dir);
  if (doc.contains("velocity")) cfg.velocity = parse_velocity(doc.at("velocity"), cfg.mode);

  if (doc.contains("resolutions")) {
    const ojson& r = doc.at("resolutions");
    expect_object(r, "resolutions");
    check_keys(r, "resolutions", {"P", "N", "n_x"});
    cfg.particles = get_int(r, "resolutions", "P", cfg.particles);
    cfg.n_mass = get_int(r, "resolutions", "N", cfg.n_mass);
    cfg.n_x = get_int(r, "resolutions", "n_x", cfg.n_x);
  }
  if (cfg.particles < 2) fail("resolutions.P", "P must be >= 2");
  if (cfg.n_mass < 2) fail("resolutions.N", "N must be >= 2");
  if (cfg.n_x < 4) fail("resolutions.n_x", "n_x must be >= 4");

  if (doc.contains("domain")) {
    const ojson& d = doc.at("domain");
    expect_object(d, "domain");
    check_keys(d, "domain", {"x_lo", "x_hi"});
    cfg.x_lo = get_num(d, "domain", "x_lo", cfg.x_lo);
    cfg.x_hi = get_num(d, "domain", "x_hi", cfg.x_hi);
  }
  if (!(cfg.x_hi > cfg.x_lo)) fail("domain", "x_lo must be < x_hi");

  cfg.t_final = get_num(doc, "(root)", "t_final", cfg.t_final);
  if (!(cfg.t_final > 0.0)) fail("t_final", "must be positive");
  cfg.dt = get_num(doc, "(root)", "dt", 0.0);
  if (cfg.dt < 0.0) fail("dt", "must be nonnegative");
  cfg.cfl = get_num(doc, "(root)", "cfl", cfg.cfl);
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.5)) fail("cfl", "must lie in (0, 1/2]");
  cfg.slope_factor = get_num(doc, "(root)", "slope_factor", cfg.slope_factor);
  cfg.radial = get_bool(doc, "(root)", "radial", false);

  const std::string bc = get_str(doc, "(root)", "spectral_bc", "neumann");
  if (bc == "neumann") {
    cfg.bc = spectral_bc::neumann;
  } else if (bc == "dirichlet") {
    cfg.bc = spectral_bc::dirichlet;
  } else {
    fail("spectral_bc", "expected neumann|dirichlet");
  }

  if (doc.contains("output_times")) {
    const ojson& arr = doc.at("output_times");
    if (!arr.is_array() || arr.empty()) fail("output_times", "expected a nonempty array");
    for (const auto& v : arr) {
      if (!v.is_number()) fail("output_times", "expected numbers");
      cfg.output_times.push_back(v.get<double>());
    }
    for (std::size_t i = 0; i < cfg.output_times.size(); ++i) {
      const double t = cfg.output_times[i];
      if (t < 0.0 || t > cfg.t_final + 1e-12) {
        fail("output_times", "entries must lie in [0, t_final]");
      }
      if (i > 0 && t < cfg.output_times[i - 1]) {
        fail("output_times", "entries must be sorted");
      }
    }
  } else {
    for (int k = 0; k <= 10; ++k) cfg.output_times.push_back(cfg.t_final * k / 10.0);
  }

  if (doc.contains("compare")) {
    const ojson& c = doc.at("compare");
    expect_object(c, "compare");
    check_keys(c, "compare", {"resolutions"});
    if (!c.contains("resolutions")) fail("compare.resolutions", "missing array");
    const ojson& arr = c.at("resolutions");
    if (!arr.is_array() || arr.empty()) {
      fail("compare.resolutions", "expected a nonempty array of [P, n_x] pairs");
    }
    cfg.compare_resolutions.clear();
    for (const auto& pair : arr) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer()) {
        fail("compare.resolutions", "expected [P, n_x] integer pairs");
      }
      cfg.compare_resolutions.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    for (const auto& [p, nx] : cfg.compare_resolutions) {
      if (p < 2 || nx < 4) fail("compare.resolutions", "resolutions must be positive");
    }
  }

  if (doc.contains("sweep")) {
    const ojson& s = doc.at("sweep");
    expect_object(s, "sweep");
    check_keys(s, "sweep", {"path", "values", "mode"});
    SweepSpec sweep;
    sweep.path = get_str(s, "sweep", "path", "");
    if (sweep.path.empty()) fail("sweep.path", "missing dotted key path");
    if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty()) {
      fail("sweep.values", "expected a nonempty numeric array");
    }
    for (const auto& v : s.at("values")) {
      if (!v.is_number()) fail("sweep.values", "expected numbers");
      sweep.values.push_back(v.get<double>());
    }
    cfg.sweep = sweep;
  }

  // Mode/kernel compatibility.
  if (cfg.mode == "spectral") {
    bool power = true;
    try {
      (void)cfg.kernel.fractional_order();
    } catch (const unsupported_operation&) {
      power = false;
    }
    if (!power) fail("mode", "spectral mode requires a power_law kernel");
  } else {
    if (!cfg.kernel.bounded()) {
      fail("mode", cfg.mode + " mode requires a bounded kernel");
    }
    if ((cfg.mode == "mass" || cfg.mode == "compare") &&
        cfg.kernel.kind() != kernel_kind::pure) {
      fail("mode", cfg.mode + " mode requires a pure kernel");
    }
  }
  if (cfg.velocity.family == "random_mean_zero" && cfg.velocity.frame != "mass") {
    fail("velocity.frame", "random_mean_zero is grid-based and requires the mass frame");
  }

  return cfg;
}

VelocityGrid RunConfig::initial_mass_velocity(int n) const {
  if (velocity.family == "random_mean_zero") {
    VelocityGrid g(n, 0.0);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n; ++i) {
      g.values[static_cast<std::size_t>(i)] =
          velocity.amplitude * (2.0 * unit_double(rng) - 1.0);
    }
    const double mean = g.mean();
    for (double& v : g.values) v -= mean;
    return g;
  }
  if (velocity.family == "custom_csv") {
    const std::string full = (base_dir / velocity.csv_path).string();
    if (velocity.frame == "mass") {
      VelocityGrid g = VelocityGrid::load_csv(full);
      if (g.n != n) {
        throw config_error("config: velocity.csv: grid has " + std::to_string(g.n) +
                           " cells, expected " + std::to_string(n));
      }
      return g;
    }
    const csv::Table table = csv::read(full);
    auto [x, u] = csv::two_columns(table, full);
    const MassProfile& m = rho0;
    VelocityGrid g(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double pos = m.quantile(g.midpoint(i));
      // Piecewise-linear read of the (x, u) table, clamped outside.
      const auto it = std::lower_bound(x.begin(), x.end(), pos);
      double val;
      if (it == x.begin()) {
        val = u.front();
      } else if (it == x.end()) {
        val = u.back();
      } else {
        const std::size_t hi = static_cast<std::size_t>(it - x.begin());
        const double w = (pos - x[hi - 1]) / (x[hi] - x[hi - 1]);
        val = (1.0 - w) * u[hi - 1] + w * u[hi];
      }
      g.values[static_cast<std::size_t>(i)] = val;
    }
    return g;
  }
  const auto f = family_function(velocity);
  if (velocity.frame == "mass") {
    return VelocityGrid::sample(n, f);
  }
  const auto v_of_m = to_mass_velocity(rho0, f);
  return VelocityGrid::sample(n, v_of_m);
}

std::function<double(double)> RunConfig::initial_space_velocity() const {
  if (velocity.family == "random_mean_zero") {
    throw config_error(
        "config: velocity.family: random_mean_zero is grid-based; use a mass-frame mode");
  }
  if (velocity.family == "custom_csv") {
    const std::string full = (base_dir / velocity.csv_path).string();
    if (velocity.frame == "mass") {
      auto grid = std::make_shared<VelocityGrid>(VelocityGrid::load_csv(full));
      const MassProfile m = rho0;
      return [grid, m](double x) { return grid->at_mass(m(x)); };
    }
    const csv::Table table = csv::read(full);
    auto cols = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>(
        csv::two_columns(table, full));
    return [cols](double pos) {
      const auto& x = cols->first;
      const auto& u = cols->second;
      const auto it = std::lower_bound(x.begin(), x.end(), pos);
      if (it == x.begin()) return u.front();
      if (it == x.end()) return u.back();
      const std::size_t hi = static_cast<std::size_t>(it - x.begin());
      const double w = (pos - x[hi - 1]) / (x[hi] - x[hi - 1]);
      return (1.0 - w) * u[hi - 1] + w * u[hi];
    };
  }
  const auto f = family_function(velocity);
  if (velocity.frame == "space") return f;
  const MassProfile m = rho0;
  return [f, m](double x) { return f(m(x)); };
}

}  // namespace topoflock
