#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "curvedbody/rotopulsator.hpp"

namespace curvedbody {

/// Pair base (q_i.q_j)^2 - 1 at or below which two bodies count as coincident.
inline constexpr double kCoincidenceFloor = 1e-12;

struct BetaResidualReport {
  /// S_i = sum_{j != i} m_j rho sinh(beta_j - beta_i) / ((q_i.q_j)^2 - 1)^(3/2)
  std::vector<double> residuals;
  bool all_betas_equal = false;
  double max_abs_residual = 0.0;
};

BetaResidualReport beta_residuals(const RotopulsatorShape& shape, const ReducedState& red,
                                  std::span<const double> masses);

struct BetaClassification {
  bool consistent = false;
  /// Index of the smallest beta when inconsistent; its residual is strictly
  /// positive whenever the betas are not all equal.
  std::optional<std::size_t> witness;
  double witness_residual = 0.0;
  BetaResidualReport report;
};

BetaClassification classify_betas(const RotopulsatorShape& shape, const ReducedState& red,
                                  std::span<const double> masses);

struct CircleCheck {
  bool on_circle = false;
  double r = 0.0;
  double rho = 0.0;
};

/// Checks that every body shares (q3, q4) and that (q1, q2) lies on the
/// circle of radius sqrt(rho^2 - 1), rho = sqrt(q4^2 - q3^2). Returns
/// on_circle = false instead of throwing.
CircleCheck circle_radius_check(const SystemState& state, double tol = 1e-10);

/// Regular-polygon test on the angles alpha_i; requires n >= 3.
bool regular_polygon_check(std::span<const double> alphas, double tol = 1e-10);

struct EquilibriumOptions {
  /// Defaults to 50 / sqrt(rho^2 - 1).
  std::optional<double> omega_max;
  std::size_t grid_points = 10000;
};

struct EquilibriumSolution {
  double theta_dot = 0.0;
  double rho = 0.0;
  double residual_norm = 0.0;
  std::size_t root_count = 0;
  double omega_max = 0.0;
};

class NoEquilibriumError : public std::runtime_error {
 public:
  NoEquilibriumError(double omega_max, std::size_t grid_points);
  double omega_max() const { return omega_max_; }

 private:
  double omega_max_;
};

/// Angular velocity of the equal-mass regular n-gon (beta = 0, phi' = 0)
/// that keeps rho constant. Scans rho''(omega) on a grid over (0, omega_max],
/// brackets the first sign change and polishes it; root_count reports all
/// sign changes seen on the grid.
EquilibriumSolution find_relative_equilibrium(std::size_t n, double mass, double rho,
                                              const EquilibriumOptions& opts = {});

/// Shape and reduced state for the equilibrium found above.
RotopulsatorShape equilibrium_shape(std::size_t n);
ReducedState equilibrium_state(const EquilibriumSolution& sol);

}  // namespace curvedbody
