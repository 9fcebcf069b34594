// Command-line front end: simulate, verify and sweep scenario files.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "curvedbody/app.hpp"

namespace fs = std::filesystem;
using namespace curvedbody;

int main(int argc, char** argv) {
  CLI::App app{"Curved n-body laboratory: simulation and rotopulsator verification"};
  app.require_subcommand(1);
  app.fallthrough();

  RunOptions opts;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for output files");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized runs (overrides the file)");
  app.add_option("--tol-scale", tol_scale, "Multiplier applied to all verification tolerances")
      ->check(CLI::PositiveNumber);
  out_opt->capture_default_str();

  std::string file;
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write tables");
  simulate->add_option("scenario", file, "Scenario file")->required();
  auto* verify = app.add_subcommand("verify", "Integrate a scenario and write a check report");
  verify->add_option("scenario", file, "Scenario file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write a summary table");
  sweep->add_option("sweep", file, "Sweep file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitOperationalError;
  }

  opts.out_dir = out_dir;
  opts.tol_scale = tol_scale;
  if (seed_opt->count() > 0) opts.seed = seed;

  const std::string stem = fs::path(file).stem().string();
  try {
    if (sweep->parsed()) return run_sweep(load_sweep(file), opts);
    const Scenario sc = load_scenario(file);
    return simulate->parsed() ? run_simulate(sc, opts) : run_verify(sc, opts);
  } catch (const ConfigError& e) {
    write_error_record(opts.out_dir, stem, "config", e.what(), std::nullopt, std::cerr);
    return kExitOperationalError;
  } catch (const std::exception& e) {
    write_error_record(opts.out_dir, stem, "runtime", e.what(), std::nullopt, std::cerr);
    return kExitOperationalError;
  }
}
