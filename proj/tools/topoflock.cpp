// SPDX-License-Identifier: Apache-2.0
// Command line front end: run / validate / sweep over JSON configs.
// Exit codes: 0 success, 2 validation failure, 3 solver guard, 4 I/O.
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "topoflock/config.hpp"
#include "topoflock/errors.hpp"
#include "topoflock/runner.hpp"

namespace {

namespace fs = std::filesystem;

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const topoflock::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const topoflock::unsupported_operation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const topoflock::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const topoflock::stability_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

fs::path default_out(const std::string& config_path) {
  return fs::path(config_path).stem().string() + "_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D alignment dynamics with topological communication"};
  app.require_subcommand(1);

  std::string run_config_path, run_out;
  CLI::App* run = app.add_subcommand("run", "execute one configured run");
  run->add_option("config", run_config_path, "JSON config file")->required();
  run->add_option("--out", run_out, "output directory");

  std::string validate_config_path;
  CLI::App* validate = app.add_subcommand("validate", "check a config and exit");
  validate->add_option("config", validate_config_path, "JSON config file")->required();

  std::string sweep_config_path, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("config", sweep_config_path, "JSON config file")->required();
  sweep->add_option("--out", sweep_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    return guarded([&] {
      const topoflock::RunConfig cfg = topoflock::RunConfig::parse_file(run_config_path);
      const fs::path out = run_out.empty() ? default_out(run_config_path) : fs::path(run_out);
      if (cfg.sweep) {
        topoflock::run_sweep(cfg, out);
      } else {
        topoflock::run_config(cfg, out);
      }
      std::cout << "wrote " << out.string() << "\n";
    });
  }
  if (validate->parsed()) {
    return guarded([&] {
      const topoflock::RunConfig cfg =
          topoflock::RunConfig::parse_file(validate_config_path);
      std::cout << "ok: mode=" << cfg.mode << " kernel=" << cfg.kernel.describe() << "\n";
    });
  }
  if (sweep->parsed()) {
    return guarded([&] {
      const topoflock::RunConfig cfg = topoflock::RunConfig::parse_file(sweep_config_path);
      const fs::path out =
          sweep_out.empty() ? default_out(sweep_config_path) : fs::path(sweep_out);
      topoflock::run_sweep(cfg, out);
      std::cout << "wrote " << out.string() << "\n";
    });
  }
  return 2;
}
