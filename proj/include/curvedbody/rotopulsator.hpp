#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "curvedbody/dynamics.hpp"
#include "curvedbody/integrator.hpp"

namespace curvedbody {

enum class RotopulsatorKind { NegativeHyperbolic, NegativeEllipticHyperbolic };

std::string_view to_string(RotopulsatorKind kind);
RotopulsatorKind parse_rotopulsator_kind(std::string_view text);

/// Fixed rapidities beta_i of the (3,4) block and angles alpha_i of the
/// (1,2) block. For the negative-hyperbolic class the alphas are read as the
/// instantaneous angular positions of (x_i, y_i) on the circle of radius r.
struct RotopulsatorShape {
  std::vector<double> betas;
  std::vector<double> alphas;
  RotopulsatorKind kind = RotopulsatorKind::NegativeEllipticHyperbolic;

  std::size_t size() const { return betas.size(); }
  void validate() const;
};

/// Scalar functions driving the ansatz. rho >= 1; r = sqrt(rho^2 - 1) is
/// derived, never stored.
struct ReducedState {
  double rho = 1.0;
  double rho_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  double phi = 0.0;
  double phi_dot = 0.0;

  double r() const;
  double r_dot() const;
};

struct ReducedAccelerations {
  double rho_ddot = 0.0;
  double theta_ddot = 0.0;
  double phi_ddot = 0.0;
};

/// Builds the sigma = -1 state with
///   (q_i1, q_i2) = r T(theta) (sin alpha_i, cos alpha_i)
///   (q_i3, q_i4) = rho S(phi) (sinh beta_i, cosh beta_i)
/// and velocities equal to the exact time derivatives.
SystemState assemble_state(const RotopulsatorShape& shape, const ReducedState& red,
                           std::span<const double> masses, double t = 0.0);

/// Assembly carried out in Scalar with the given angles (which replace
/// shape.alphas). Instantiated for double and Quad.
template <typename Scalar>
BasicSystemState<Scalar> assemble_state_in(const RotopulsatorShape& shape,
                                           std::span<const Scalar> alphas,
                                           const ReducedState& red,
                                           std::span<const double> masses, double t = 0.0);

/// q_i (.) q_j = r^2 cos(alpha_i - alpha_j) - rho^2 cosh(beta_i - beta_j)
double gram_entry(const RotopulsatorShape& shape, const ReducedState& red, std::size_t i,
                  std::size_t j);

/// Second time derivative of every assembled position, given the second
/// derivatives of (rho, theta, phi).
std::vector<Point4> ansatz_second_derivative(const RotopulsatorShape& shape,
                                             const ReducedState& red,
                                             const ReducedAccelerations& dd);

/// Decomposes a 4D acceleration of body i along the ansatz directions
/// T a_i, T J a_i (rotation block) and S b_i, S K b_i (boost block) and
/// returns the (rho'', theta'', phi'') that body i alone would demand.
ReducedAccelerations project_body_acceleration(const RotopulsatorShape& shape,
                                               const ReducedState& red, std::size_t i,
                                               const Point4& acceleration);

/// Reduced equations for a regular polygon with equal betas and equal masses.
/// rho'' and theta'' come from projecting body 1's full acceleration;
/// phi'' = -2 rho' phi' / rho.
ReducedAccelerations reduced_rhs(const RotopulsatorShape& shape, const ReducedState& red,
                                 std::span<const double> masses);

/// Same quantities from the symbolic substitution of the ansatz into the
/// equations of motion (equal betas):
///   rho''   = rho [sum_j m_j (1 + g_1j) / k_1j + r'^2 + r^2 theta'^2 - rho'^2 + rho^2 phi'^2] - rho phi'^2
///   theta'' = (sum_j m_j r sin(alpha_1 - alpha_j) / k_1j - 2 r' theta') / r
///   phi''   = -2 rho' phi' / rho
ReducedAccelerations reduced_rhs_closed_form(const RotopulsatorShape& shape,
                                             const ReducedState& red,
                                             std::span<const double> masses);

struct ConsistencyReport {
  /// max over bodies and components of |ansatz'' - accelerations| using the
  /// reduced accelerations demanded by body 1.
  double max_component_error = 0.0;
  /// max over bodies of the spread between the reduced accelerations each
  /// body demands and those of body 1.
  double max_projection_spread = 0.0;
};

/// Compares the assembled ansatz against the full equations of motion for
/// an arbitrary (possibly irregular) shape.
ConsistencyReport consistency_mismatch(const RotopulsatorShape& shape, const ReducedState& red,
                                       std::span<const double> masses);

struct ReducedSample {
  double t = 0.0;
  ReducedState state;
};

/// Classical RK4 on the reduced equations with fixed step dt.
std::vector<ReducedSample> integrate_reduced(const RotopulsatorShape& shape,
                                             const ReducedState& red0,
                                             std::span<const double> masses, double t_end,
                                             double dt);

/// True when the sorted angles (mod 2 pi) are spaced 2 pi / n apart,
/// wrap-around gap included. Accepts n >= 2.
bool is_regular_spacing(std::span<const double> alphas, double tol = 1e-10);

/// Requires n >= 2. max over samples and pairs of |G^_ij(t) - G^_ij(t0)| with
/// G^_ij = (G_ij - G_ii) / (G_12 - G_11) and G_ij = q_i (.) q_j.
double shape_residual(const Trajectory& traj);

/// offset + 2 pi k / n, k = 0..n-1, evaluated in Scalar.
template <typename Scalar = double>
std::vector<Scalar> regular_alphas_in(std::size_t n, double offset = 0.0);

std::vector<double> regular_alphas(std::size_t n, double offset = 0.0);

}  // namespace curvedbody
