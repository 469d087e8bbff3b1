// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "topoflock/kernels.hpp"
#include "topoflock/mass_profile.hpp"
#include "topoflock/spectral.hpp"
#include "topoflock/velocity_grid.hpp"

namespace topoflock {

using ojson = nlohmann::ordered_json;

// Initial velocity description. Named families keep runs deterministic and
// auditable; frame selects whether the family is read in mass or space
// coordinates before conversion through the initial CDF.
struct VelocitySpec {
  std::string family = "constant";
  std::string frame = "mass";
  double value = 0.0;
  double intercept = 0.0;
  double slope = 1.0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
  double left = 0.0;
  double right = 0.0;
  double threshold = 0.5;
  std::string csv_path;
};

struct SweepSpec {
  std::string path;  // dotted key path into the config document
  std::vector<double> values;
};

struct RunConfig {
  std::string mode = "mass";
  std::uint64_t seed = 12345;
  Kernel kernel = Kernel::constant(1.0);
  MassProfile rho0 = MassProfile::uniform(0.0, 1.0);
  VelocitySpec velocity;
  int particles = 200;  // P
  int n_mass = 256;     // N, mass-grid resolution for v
  int n_x = 400;        // spatial cells for M
  double x_lo = -0.5;
  double x_hi = 1.5;
  double t_final = 1.0;
  std::vector<double> output_times;
  double dt = 0.0;  // 0 selects the per-mode default
  double cfl = 0.5;
  double slope_factor = 50.0;
  bool radial = false;
  spectral_bc bc = spectral_bc::neumann;
  std::vector<std::pair<int, int>> compare_resolutions = {{400, 400}, {800, 800}};
  std::optional<SweepSpec> sweep;
  ojson echo;
  std::filesystem::path base_dir;

  // Parses and validates; throws config_error with a path- or line-qualified
  // message on any problem.
  static RunConfig parse_file(const std::filesystem::path& path);
  static RunConfig parse(const ojson& doc, const std::filesystem::path& base_dir);

  // Initial velocity on an n-cell mass grid (space families are composed with
  // the quantile map; the random family consumes the seed).
  VelocityGrid initial_mass_velocity(int n) const;
  // Initial velocity as a function of space (mass families are composed with
  // the CDF). The random family is grid-based and rejected here.
  std::function<double(double)> initial_space_velocity() const;
};

}  // namespace topoflock
