// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "topoflock/config.hpp"

namespace topoflock {

// Executes one parsed config, writing CSV series, report.json, and
// manifest.json into out_dir (created if needed). Outputs are deterministic
// for a fixed config and seed.
void run_config(const RunConfig& config, const std::filesystem::path& out_dir);

// Runs one sub-run per sweep value into out_dir/point_NNN and writes
// sweep_summary.csv. The config must carry a sweep block.
void run_sweep(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace topoflock
