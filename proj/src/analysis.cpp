#include "curvedbody/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace curvedbody {

BetaResidualReport beta_residuals(const RotopulsatorShape& shape, const ReducedState& red,
                                  std::span<const double> masses) {
  shape.validate();
  if (!(red.rho > 1.0)) throw std::invalid_argument("beta_residuals: rho must exceed 1");
  const std::size_t n = shape.size();
  if (masses.size() != n) throw std::invalid_argument("beta_residuals: mass count mismatch");

  BetaResidualReport report;
  report.residuals.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double g = gram_entry(shape, red, i, j);
      const double base = g * g - 1.0;
      if (!(base > kCoincidenceFloor)) {
        throw std::domain_error("beta_residuals: bodies " + std::to_string(i + 1) + " and " +
                                std::to_string(j + 1) + " coincide");
      }
      sum += masses[j] * red.rho * std::sinh(shape.betas[j] - shape.betas[i]) /
             (base * std::sqrt(base));
    }
    report.residuals[i] = sum;
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(sum));
  }
  report.all_betas_equal = std::all_of(shape.betas.begin(), shape.betas.end(),
                                       [&](double b) { return b == shape.betas.front(); });
  return report;
}

BetaClassification classify_betas(const RotopulsatorShape& shape, const ReducedState& red,
                                  std::span<const double> masses) {
  BetaClassification c;
  c.report = beta_residuals(shape, red, masses);
  c.consistent = c.report.all_betas_equal;
  if (!c.consistent) {
    const auto it = std::min_element(shape.betas.begin(), shape.betas.end());
    const auto idx = static_cast<std::size_t>(it - shape.betas.begin());
    c.witness = idx;
    c.witness_residual = c.report.residuals[idx];
  }
  return c;
}

CircleCheck circle_radius_check(const SystemState& state, double tol) {
  CircleCheck out;
  if (state.sigma != CurvatureSign::negative() || state.bodies.empty()) return out;
  const Point4& q0 = state.bodies.front().q;
  for (const Body& b : state.bodies) {
    if (std::abs(b.q(2) - q0(2)) > tol || std::abs(b.q(3) - q0(3)) > tol) return out;
  }
  const double rho2 = q0(3) * q0(3) - q0(2) * q0(2);
  if (!(rho2 >= 1.0)) return out;
  for (const Body& b : state.bodies) {
    if (std::abs(b.q.head<2>().squaredNorm() - (rho2 - 1.0)) > tol) return out;
  }
  out.on_circle = true;
  out.rho = std::sqrt(rho2);
  out.r = std::sqrt(rho2 - 1.0);
  return out;
}

bool regular_polygon_check(std::span<const double> alphas, double tol) {
  if (alphas.size() < 3) {
    throw std::invalid_argument("regular_polygon_check: a polygon needs at least three vertices");
  }
  return is_regular_spacing(alphas, tol);
}

NoEquilibriumError::NoEquilibriumError(double omega_max, std::size_t grid_points)
    : std::runtime_error("no relative equilibrium: rho'' keeps its sign on (0, " +
                         std::to_string(omega_max) + "] (" + std::to_string(grid_points) +
                         " grid points)"),
      omega_max_(omega_max) {}

RotopulsatorShape equilibrium_shape(std::size_t n) {
  RotopulsatorShape shape;
  shape.kind = RotopulsatorKind::NegativeEllipticHyperbolic;
  shape.betas.assign(n, 0.0);
  shape.alphas = regular_alphas(n);
  return shape;
}

ReducedState equilibrium_state(const EquilibriumSolution& sol) {
  ReducedState red;
  red.rho = sol.rho;
  red.theta_dot = sol.theta_dot;
  return red;
}

EquilibriumSolution find_relative_equilibrium(std::size_t n, double mass, double rho,
                                              const EquilibriumOptions& opts) {
  if (n < 2) throw std::invalid_argument("find_relative_equilibrium: need n >= 2");
  if (!(rho > 1.0)) throw std::invalid_argument("find_relative_equilibrium: rho must exceed 1");
  if (!(mass > 0.0)) throw std::invalid_argument("find_relative_equilibrium: mass must be positive");
  if (opts.grid_points < 1) throw std::invalid_argument("find_relative_equilibrium: empty grid");

  const RotopulsatorShape shape = equilibrium_shape(n);
  const std::vector<double> masses(n, mass);
  auto rho_ddot = [&](double omega) {
    ReducedState red;
    red.rho = rho;
    red.theta_dot = omega;
    return reduced_rhs(shape, red, masses).rho_ddot;
  };

  EquilibriumSolution sol;
  sol.rho = rho;
  sol.omega_max = opts.omega_max.value_or(50.0 / std::sqrt(rho * rho - 1.0));

  const std::size_t N = opts.grid_points;
  std::optional<std::pair<double, double>> bracket;
  double prev_w = 0.0;
  double prev_f = rho_ddot(0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    const double w = sol.omega_max * static_cast<double>(k) / static_cast<double>(N);
    const double f = rho_ddot(w);
    if (f == 0.0 || (prev_f != 0.0 && std::signbit(f) != std::signbit(prev_f))) {
      ++sol.root_count;
      if (!bracket) bracket = {prev_w, w};
    }
    prev_w = w;
    prev_f = f;
  }
  if (!bracket) throw NoEquilibriumError(sol.omega_max, N);

  // Bisection down to a narrow bracket, then secant polishing kept inside it.
  auto [lo, hi] = *bracket;
  double f_lo = rho_ddot(lo);
  double f_hi = rho_ddot(hi);
  if (f_hi == 0.0) {
    lo = hi;
    f_lo = f_hi;
  }
  while (hi - lo > 1e-8 * sol.omega_max && f_lo != 0.0) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = rho_ddot(mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      f_lo = f_hi = 0.0;
      break;
    }
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  double w = f_lo == 0.0 ? lo : 0.5 * (lo + hi);
  if (f_lo != 0.0) {
    double w_prev = lo;
    double f_prev = f_lo;
    for (int it = 0; it < 50; ++it) {
      const double f = rho_ddot(w);
      if (f == 0.0 || f == f_prev) break;
      double next = w - f * (w - w_prev) / (f - f_prev);
      if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
      if (std::signbit(f) == std::signbit(f_lo)) {
        lo = w;
      } else {
        hi = w;
      }
      w_prev = w;
      f_prev = f;
      if (next == w) break;
      w = next;
    }
  }
  sol.theta_dot = w;
  sol.residual_norm = std::abs(rho_ddot(w));
  return sol;
}

}  // namespace curvedbody
