#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "curvedbody/analysis.hpp"
#include "curvedbody/scenario.hpp"

namespace curvedbody {

/// Process exit codes shared by every verb.
enum ExitCode : int { kExitOk = 0, kExitVerificationFailed = 1, kExitOperationalError = 2 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
};

/// Verification thresholds; every one is multiplied by tol_scale.
struct VerifyTolerances {
  double beta_residual = 1e-12;
  double consistency = 1e-10;
  double manifold = 1e-9;
  double circle = 1e-8;
  double lemma_rel_drift = 1e-6;
  double lemma_abs_drift = 1e-8;
  double wedge_rel_drift = 1e-6;
  double wedge_abs_drift = 1e-8;
  double shape = 1e-6;
  double equilibrium_rho_drift = 1e-6;
  double equilibrium_shape = 1e-7;

  VerifyTolerances scaled(double factor) const;
};

enum class CheckStatus { Pass, Fail, Skipped };

struct Check {
  explicit Check(std::string n) : name(std::move(n)) {}

  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  /// Extra key/value lines written under "<name>.".
  std::vector<std::pair<std::string, std::string>> details;
};

struct VerifyReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  std::vector<Check> checks;

  bool passed() const;
  void write(std::ostream& out) const;
};

/// Relative drift of each wedge-momentum component; components starting at
/// (numerically) zero are measured absolutely. Returns (worst relative
/// drift over nonzero components, worst absolute drift over zero ones).
std::pair<double, double> wedge_drift(const Trajectory& traj);

/// Max over samples of |rho^2 phi'(t) - rho^2 phi'(0)|, divided by
/// |rho^2 phi'(0)| unless that is zero. Requires ansatz diagnostics.
double lemma_drift(const Trajectory& traj, bool* relative = nullptr);

void write_trajectory_table(std::ostream& out, const Trajectory& traj, const std::string& preamble);
void write_diagnostics_table(std::ostream& out, const Trajectory& traj,
                             const std::string& preamble);

/// Runs the verification suite on a parsed scenario. Throws
/// IntegrationError when the run itself fails.
VerifyReport verify_scenario(const Scenario& sc, std::uint64_t seed, double tol_scale);

int run_simulate(const Scenario& sc, const RunOptions& opts);
int run_verify(const Scenario& sc, const RunOptions& opts);
int run_sweep(const SweepConfig& cfg, const RunOptions& opts);

/// Writes a machine-readable error record to <out_dir>/<stem>.error and
/// echoes it to err.
void write_error_record(const std::filesystem::path& out_dir, const std::string& stem,
                        const std::string& kind, const std::string& message,
                        std::optional<double> t, std::ostream& err);

std::string format_real(double x);

}  // namespace curvedbody
