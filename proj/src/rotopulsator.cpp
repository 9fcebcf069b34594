#include "curvedbody/rotopulsator.hpp"

#include <boost/math/constants/constants.hpp>

#include "curvedbody/quad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace curvedbody {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2<double> circle_dir(double alpha) { return {std::sin(alpha), std::cos(alpha)}; }

// J (sin a, cos a) with J = [[0, -1], [1, 0]]
Vec2<double> circle_dir_perp(double alpha) { return {-std::cos(alpha), std::sin(alpha)}; }

std::vector<double> normalized_sorted(std::span<const double> alphas) {
  std::vector<double> a(alphas.begin(), alphas.end());
  for (double& x : a) {
    x = std::fmod(x, kTwoPi);
    if (x < 0.0) x += kTwoPi;
  }
  std::sort(a.begin(), a.end());
  return a;
}

void check_masses(std::span<const double> masses, std::size_t n) {
  if (masses.size() != n) {
    throw std::invalid_argument("expected " + std::to_string(n) + " masses, got " +
                                std::to_string(masses.size()));
  }
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("masses must be positive");
  }
}

void check_assemblable(const RotopulsatorShape& shape, const ReducedState& red) {
  shape.validate();
  if (shape.kind != RotopulsatorKind::NegativeEllipticHyperbolic) {
    throw std::invalid_argument(
        "assembly needs explicit (x_i, y_i); only the negative-elliptic-hyperbolic class "
        "provides them");
  }
  if (!(red.rho > 1.0)) {
    throw std::invalid_argument("rho must exceed 1 (r = sqrt(rho^2 - 1) > 0)");
  }
}

bool all_equal(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

}  // namespace

std::string_view to_string(RotopulsatorKind kind) {
  switch (kind) {
    case RotopulsatorKind::NegativeHyperbolic:
      return "negative-hyperbolic";
    case RotopulsatorKind::NegativeEllipticHyperbolic:
      return "negative-elliptic-hyperbolic";
  }
  return "unknown";
}

RotopulsatorKind parse_rotopulsator_kind(std::string_view text) {
  if (text == "negative-hyperbolic") return RotopulsatorKind::NegativeHyperbolic;
  if (text == "negative-elliptic-hyperbolic") return RotopulsatorKind::NegativeEllipticHyperbolic;
  throw std::invalid_argument("unknown rotopulsator kind '" + std::string(text) + "'");
}

void RotopulsatorShape::validate() const {
  if (betas.size() < 2) throw std::invalid_argument("rotopulsator shape needs n >= 2");
  if (alphas.size() != betas.size()) {
    throw std::invalid_argument("rotopulsator shape: alphas and betas differ in length");
  }
  for (double x : betas) {
    if (!std::isfinite(x)) throw std::invalid_argument("rotopulsator shape: non-finite beta");
  }
  for (double x : alphas) {
    if (!std::isfinite(x)) throw std::invalid_argument("rotopulsator shape: non-finite alpha");
  }
  if (kind == RotopulsatorKind::NegativeEllipticHyperbolic) {
    const auto a = normalized_sorted(alphas);
    for (std::size_t k = 1; k < a.size(); ++k) {
      if (a[k] == a[k - 1]) {
        throw std::invalid_argument("rotopulsator shape: alphas must be distinct modulo 2 pi");
      }
    }
  }
}

double ReducedState::r() const { return std::sqrt(rho * rho - 1.0); }

double ReducedState::r_dot() const { return rho * rho_dot / r(); }

template <typename S>
BasicSystemState<S> assemble_state_in(const RotopulsatorShape& shape, std::span<const S> alphas,
                                      const ReducedState& red, std::span<const double> masses,
                                      double t) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  check_assemblable(shape, red);
  check_masses(masses, shape.size());
  if (alphas.size() != shape.size()) throw std::invalid_argument("assemble: alpha count mismatch");

  const S rho(red.rho);
  const S r = sqrt(rho * rho - S(1));
  const S r_dot = rho * S(red.rho_dot) / r;
  const Matrix2<S> rot = rotation2(S(red.theta));
  const Matrix2<S> boost = boost2(S(red.phi));

  BasicSystemState<S> s;
  s.sigma = CurvatureSign::negative();
  s.t = t;
  s.bodies.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const S a = alphas[i];
    const S b(shape.betas[i]);
    const Vec2<S> ta = rot * Vec2<S>(sin(a), cos(a));
    const Vec2<S> tja = rot * Vec2<S>(-cos(a), sin(a));
    const Vec2<S> sb = boost * Vec2<S>(sinh(b), cosh(b));
    const Vec2<S> skb = boost * Vec2<S>(cosh(b), sinh(b));

    BasicBody<S>& body = s.bodies[i];
    body.m = S(masses[i]);
    body.q << r * ta, rho * sb;
    body.v << r_dot * ta + r * S(red.theta_dot) * tja,
        S(red.rho_dot) * sb + rho * S(red.phi_dot) * skb;
  }
  return s;
}

template BasicSystemState<double> assemble_state_in<double>(const RotopulsatorShape&,
                                                            std::span<const double>,
                                                            const ReducedState&,
                                                            std::span<const double>, double);
template BasicSystemState<Quad> assemble_state_in<Quad>(const RotopulsatorShape&,
                                                        std::span<const Quad>,
                                                        const ReducedState&,
                                                        std::span<const double>, double);

SystemState assemble_state(const RotopulsatorShape& shape, const ReducedState& red,
                           std::span<const double> masses, double t) {
  return assemble_state_in<double>(shape, shape.alphas, red, masses, t);
}

double gram_entry(const RotopulsatorShape& shape, const ReducedState& red, std::size_t i,
                  std::size_t j) {
  shape.validate();
  if (!(red.rho >= 1.0)) throw std::invalid_argument("rho must be at least 1");
  if (i >= shape.size() || j >= shape.size()) throw std::out_of_range("gram_entry index");
  const double r2 = red.rho * red.rho - 1.0;
  return r2 * std::cos(shape.alphas[i] - shape.alphas[j]) -
         red.rho * red.rho * std::cosh(shape.betas[i] - shape.betas[j]);
}

std::vector<Point4> ansatz_second_derivative(const RotopulsatorShape& shape,
                                             const ReducedState& red,
                                             const ReducedAccelerations& dd) {
  check_assemblable(shape, red);
  const double r = red.r();
  const double r_dot = red.r_dot();
  // r r'' + r'^2 = rho rho'' + rho'^2
  const double r_ddot = (red.rho_dot * red.rho_dot + red.rho * dd.rho_ddot - r_dot * r_dot) / r;
  const double c_radial = r_ddot - r * red.theta_dot * red.theta_dot;
  const double c_angular = 2.0 * r_dot * red.theta_dot + r * dd.theta_ddot;
  const double c_size = dd.rho_ddot + red.rho * red.phi_dot * red.phi_dot;
  const double c_boost = 2.0 * red.rho_dot * red.phi_dot + red.rho * dd.phi_ddot;

  const Mat2 rot = rotation2(red.theta);
  std::vector<Point4> out(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const Mat2 boost = boost2(red.phi + shape.betas[i]);
    const Vec2<double> q12 = rot * (c_radial * circle_dir(shape.alphas[i]) +
                                    c_angular * circle_dir_perp(shape.alphas[i]));
    const Vec2<double> q34 = boost * Vec2<double>(c_boost, c_size);
    out[i] << q12, q34;
  }
  return out;
}

ReducedAccelerations project_body_acceleration(const RotopulsatorShape& shape,
                                               const ReducedState& red, std::size_t i,
                                               const Point4& acceleration) {
  check_assemblable(shape, red);
  const double r = red.r();
  const double r_dot = red.r_dot();

  // T(theta)^T undoes the rotation; boost2(-(phi + beta_i)) undoes the boost.
  const Vec2<double> a12 = rotation2(-red.theta) * acceleration.head<2>();
  const double c_angular = a12.dot(circle_dir_perp(shape.alphas[i]));
  const Vec2<double> a34 = boost2(-(red.phi + shape.betas[i])) * acceleration.tail<2>();
  const double c_boost = a34(0);
  const double c_size = a34(1);

  ReducedAccelerations dd;
  dd.rho_ddot = c_size - red.rho * red.phi_dot * red.phi_dot;
  dd.theta_ddot = (c_angular - 2.0 * r_dot * red.theta_dot) / r;
  dd.phi_ddot = (c_boost - 2.0 * red.rho_dot * red.phi_dot) / red.rho;
  return dd;
}

ReducedAccelerations reduced_rhs(const RotopulsatorShape& shape, const ReducedState& red,
                                 std::span<const double> masses) {
  check_assemblable(shape, red);
  check_masses(masses, shape.size());
  if (!all_equal(shape.betas)) {
    throw std::invalid_argument("reduced_rhs: betas must all be equal");
  }
  if (!all_equal(masses)) {
    throw std::invalid_argument("reduced_rhs: masses must all be equal");
  }
  if (!is_regular_spacing(shape.alphas)) {
    throw std::invalid_argument("reduced_rhs: alphas must form a regular polygon");
  }
  const SystemState s = assemble_state(shape, red, masses);
  const std::vector<Point4> acc = accelerations(s);
  ReducedAccelerations dd = project_body_acceleration(shape, red, 0, acc.front());
  dd.phi_ddot = -2.0 * red.rho_dot * red.phi_dot / red.rho;
  return dd;
}

ReducedAccelerations reduced_rhs_closed_form(const RotopulsatorShape& shape,
                                             const ReducedState& red,
                                             std::span<const double> masses) {
  check_assemblable(shape, red);
  check_masses(masses, shape.size());
  if (!all_equal(shape.betas)) {
    throw std::invalid_argument("reduced_rhs_closed_form: betas must all be equal");
  }
  const double rho = red.rho;
  const double r = red.r();
  const double r_dot = red.r_dot();

  double radial_force = 0.0;
  double angular_force = 0.0;
  for (std::size_t j = 1; j < shape.size(); ++j) {
    const double g = gram_entry(shape, red, 0, j);
    const double base = g * g - 1.0;
    const double k = base * std::sqrt(base);
    radial_force += masses[j] * (1.0 + g) / k;
    angular_force += masses[j] * r * std::sin(shape.alphas[0] - shape.alphas[j]) / k;
  }
  const double speed2 = r_dot * r_dot + r * r * red.theta_dot * red.theta_dot -
                        red.rho_dot * red.rho_dot + rho * rho * red.phi_dot * red.phi_dot;

  ReducedAccelerations dd;
  dd.rho_ddot = rho * (radial_force + speed2) - rho * red.phi_dot * red.phi_dot;
  dd.theta_ddot = (angular_force - 2.0 * r_dot * red.theta_dot) / r;
  dd.phi_ddot = -2.0 * red.rho_dot * red.phi_dot / rho;
  return dd;
}

ConsistencyReport consistency_mismatch(const RotopulsatorShape& shape, const ReducedState& red,
                                       std::span<const double> masses) {
  const SystemState s = assemble_state(shape, red, masses);
  const std::vector<Point4> acc = accelerations(s);
  const ReducedAccelerations ref = project_body_acceleration(shape, red, 0, acc.front());
  const std::vector<Point4> predicted = ansatz_second_derivative(shape, red, ref);

  ConsistencyReport report;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    report.max_component_error = std::max(
        report.max_component_error, (predicted[i] - acc[i]).cwiseAbs().maxCoeff());
    const ReducedAccelerations dd = project_body_acceleration(shape, red, i, acc[i]);
    report.max_projection_spread =
        std::max({report.max_projection_spread, std::abs(dd.rho_ddot - ref.rho_ddot),
                  std::abs(dd.theta_ddot - ref.theta_ddot), std::abs(dd.phi_ddot - ref.phi_ddot)});
  }
  return report;
}

std::vector<ReducedSample> integrate_reduced(const RotopulsatorShape& shape,
                                             const ReducedState& red0,
                                             std::span<const double> masses, double t_end,
                                             double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw std::invalid_argument("integrate_reduced: t_end and dt must be positive");
  }
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  auto to_state = [](const Vec6& y) {
    return ReducedState{y(0), y(1), y(2), y(3), y(4), y(5)};
  };
  auto rhs = [&](const Vec6& y) {
    const ReducedState st = to_state(y);
    const ReducedAccelerations dd = reduced_rhs(shape, st, masses);
    Vec6 dy;
    dy << st.rho_dot, dd.rho_ddot, st.theta_dot, dd.theta_ddot, st.phi_dot, dd.phi_ddot;
    return dy;
  };

  Vec6 y;
  y << red0.rho, red0.rho_dot, red0.theta, red0.theta_dot, red0.phi, red0.phi_dot;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);

  std::vector<ReducedSample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, to_state(y)});
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vec6 k1 = rhs(y);
    const Vec6 k2 = rhs(y + 0.5 * h * k1);
    const Vec6 k3 = rhs(y + 0.5 * h * k2);
    const Vec6 k4 = rhs(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back({h * static_cast<double>(k), to_state(y)});
  }
  return out;
}

bool is_regular_spacing(std::span<const double> alphas, double tol) {
  if (alphas.size() < 2) return false;
  const auto a = normalized_sorted(alphas);
  const double gap = kTwoPi / static_cast<double>(a.size());
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (std::abs(a[k] - a[k - 1] - gap) > tol) return false;
  }
  return std::abs(kTwoPi - (a.back() - a.front()) - gap) <= tol;
}

double shape_residual(const Trajectory& traj) {
  if (traj.samples.size() < 2) {
    throw std::invalid_argument("shape_residual: need at least two samples");
  }
  const std::size_t n = traj.front().state.size();
  if (n < 2) throw std::invalid_argument("shape_residual: need at least two bodies");

  auto normalized_gram = [n](const SystemState& s) {
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        g(i, j) = sigma_dot(s.bodies[i].q, s.bodies[j].q, s.sigma);
      }
    }
    const double scale = g(0, 1) - g(0, 0);
    if (std::abs(scale) < 1e-12) {
      throw std::domain_error("shape_residual: degenerate normalization at t=" +
                              std::to_string(s.t));
    }
    Eigen::MatrixXd out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out(i, j) = (g(i, j) - g(i, i)) / scale;
    }
    return out;
  };

  const Eigen::MatrixXd ref = normalized_gram(traj.front().state);
  double worst = 0.0;
  for (const Sample& sample : traj.samples) {
    worst = std::max(worst, (normalized_gram(sample.state) - ref).cwiseAbs().maxCoeff());
  }
  return worst;
}

template <typename S>
std::vector<S> regular_alphas_in(std::size_t n, double offset) {
  const S two_pi = boost::math::constants::two_pi<S>();
  std::vector<S> a(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = S(offset) + two_pi * S(static_cast<long long>(k)) / S(static_cast<long long>(n));
  }
  return a;
}

template std::vector<double> regular_alphas_in<double>(std::size_t, double);
template std::vector<Quad> regular_alphas_in<Quad>(std::size_t, double);

std::vector<double> regular_alphas(std::size_t n, double offset) {
  return regular_alphas_in<double>(n, offset);
}

}  // namespace curvedbody
