// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "curvedbody/app.hpp"

using namespace curvedbody;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RotopulsatorShape polygon(std::size_t n, double offset = 0.0) {
  RotopulsatorShape s;
  s.betas.assign(n, 0.0);
  s.alphas = regular_alphas(n, offset);
  return s;
}

// n=3 equal-mass regular triangle, rho=sqrt2, rho'=0.2, phi'=0.1, theta'=0.5, beta=0
Scenario triangle_run(double rel_tol) {
  Scenario sc;
  sc.name = "triangle";
  sc.t_end = 10.0;
  sc.shape = polygon(3);
  sc.regular_offset = 0.0;
  ReducedState red;
  red.rho = std::numbers::sqrt2;
  red.rho_dot = 0.2;
  red.phi_dot = 0.1;
  red.theta_dot = 0.5;
  sc.reduced = red;
  sc.masses.assign(3, 1.0);
  sc.integrator.rel_tol = rel_tol;
  sc.integrator.abs_tol = rel_tol * 1e-2;
  sc.validate();
  return sc;
}

SystemState random_four_body(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> up(-2.0, 2.0), uv(-0.3, 0.3), um(0.1, 1.0);
  SystemState s;
  s.bodies.resize(4);
  for (Body& b : s.bodies) {
    b.m = um(rng);
    const double x = up(rng), y = up(rng), z = up(rng);
    b.q << x, y, z, std::sqrt(1.0 + x * x + y * y + z * z);
    const double v1 = uv(rng), v2 = uv(rng), v3 = uv(rng), v4 = uv(rng);
    b.v = tangent_project(b.q, Point4(v1, v2, v3, v4), s.sigma);
  }
  return s;
}

double largest_coordinate(const Trajectory& traj) {
  double worst = 0.0;
  for (const Sample& smp : traj.samples) {
    for (const Body& b : smp.state.bodies) worst = std::max(worst, b.q.cwiseAbs().maxCoeff());
  }
  return worst;
}

// smallest hyperbolic pair distance over the recorded samples
double closest_approach(const Trajectory& traj) {
  double best = INFINITY;
  for (const Sample& smp : traj.samples) {
    const auto& b = smp.state.bodies;
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = i + 1; j < b.size(); ++j) {
        const double g = -sigma_dot(b[i].q, b[j].q, smp.state.sigma);
        best = std::min(best, std::acosh(std::max(1.0, g)));
      }
    }
  }
  return best;
}

SystemState scalene_three_body() {
  SystemState s;
  s.bodies.resize(3);
  const double pos[3][3] = {{0.9, 0.0, 0.1}, {-0.5, 0.8, -0.2}, {-0.3, -0.9, 0.3}};
  const double vel[3][3] = {{0.0, 0.5, 0.1}, {-0.4, -0.2, 0.0}, {0.3, -0.2, -0.1}};
  const double mass[3] = {1.0, 0.7, 1.3};
  for (int i = 0; i < 3; ++i) {
    Body& b = s.bodies[i];
    b.m = mass[i];
    b.q << pos[i][0], pos[i][1], pos[i][2], 0.0;
    b.q(3) = std::sqrt(1.0 + b.q.head<3>().squaredNorm());
    b.v = tangent_project(b.q, Point4(vel[i][0], vel[i][1], vel[i][2], 0.0), s.sigma);
  }
  return s;
}

Outcome manifold_fidelity() {
  const auto start = Clock::now();
  const Trajectory traj = integrate_scenario(triangle_run(1e-10));
  const double elapsed = seconds_since(start);
  double cmax = 0.0, tmax = 0.0;
  for (const Sample& s : traj.samples) {
    cmax = std::max(cmax, s.diag.constraint_max);
    tmax = std::max(tmax, s.diag.tangency_max);
  }
  const bool ok = traj.back().t() == 10.0 && cmax <= 1e-9 && tmax <= 1e-9 && elapsed <= 5.0;
  return {ok, fmt("max|q.q+1|=%.2e max|q.v|=%.2e samples=%zu runtime=%.1fms", cmax, tmax,
                  traj.samples.size(), 1e3 * elapsed)};
}

Outcome lemma_conservation() {
  bool relative = false;
  const double coarse = lemma_drift(integrate_scenario(triangle_run(1e-10)), &relative);
  const double fine = lemma_drift(integrate_scenario(triangle_run(5e-11)), nullptr);
  const bool ok = relative && coarse <= 1e-6 && fine < coarse;
  return {ok, fmt("rel drift of rho^2 phi' = %.2e at rel_tol 1e-10, %.2e at 5e-11", coarse, fine)};
}

Outcome wedge_conservation() {
  const auto [rel1, abs1] = wedge_drift(integrate_scenario(triangle_run(1e-10)));
  // First seeded draw whose run completes with every pair kept >= 0.1 apart
  // and every coordinate below 1e3. Past that, q_a v_b is a difference of
  // terms ~|q|^2 and double round-off alone exceeds the relative limit.
  std::mt19937_64 rng(4);
  Trajectory t4;
  int draw = 0;
  auto admissible = [](const Trajectory& t) {
    return !t.empty() && closest_approach(t) >= 0.1 && largest_coordinate(t) <= 1e3;
  };
  for (bool found = false; !found && draw < 100;) {
    const SystemState four = random_four_body(rng);
    ++draw;
    try {
      t4 = integrate(four, 10.0, IntegratorConfig{});
      found = admissible(t4);
    } catch (const IntegrationError&) {
      t4 = {};
    }
  }
  if (!admissible(t4)) return {false, "no nonsingular bounded 4-body draw found"};
  const auto [rel4, abs4] = wedge_drift(t4);
  const bool ok = rel1 <= 1e-6 && abs1 <= 1e-8 && rel4 <= 1e-6 && abs4 <= 1e-8;
  return {ok, fmt("triangle rel=%.2e abs=%.2e; random 4-body (draw %d, closest approach %.2f, max|q| %.0f) rel=%.2e abs=%.2e",
                  rel1, abs1, draw, closest_approach(t4), largest_coordinate(t4), rel4, abs4)};
}

Outcome beta_sign_law() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> un(2, 6);
  std::uniform_real_distribution<double> um(0.1, 10.0), urho(1.1, 5.0), ub(-2.0, 2.0), ua(0.0, 2 * kPi);
  std::size_t inconsistent = 0, draws = 0;
  double min_witness = INFINITY, max_equal = 0.0;
  auto draw = [&](bool equal) {
    const std::size_t n = un(rng);
    RotopulsatorShape shape;
    shape.kind = RotopulsatorKind::NegativeHyperbolic;
    shape.alphas = regular_alphas(n, ua(rng));
    ReducedState red;
    red.rho = urho(rng);
    std::vector<double> masses;
    const double common = ub(rng);
    do {
      shape.betas.clear();
      for (std::size_t i = 0; i < n; ++i) shape.betas.push_back(equal ? common : ub(rng));
    } while (!equal && std::all_of(shape.betas.begin(), shape.betas.end(),
                                   [&](double b) { return b == shape.betas.front(); }));
    for (std::size_t i = 0; i < n; ++i) masses.push_back(um(rng));
    return classify_betas(shape, red, masses);
  };
  for (int k = 0; k < 200; ++k) {
    const BetaClassification c = draw(false);
    ++draws;
    if (!c.consistent && c.witness && c.witness_residual >= 1e-8) ++inconsistent;
    min_witness = std::min(min_witness, c.witness_residual);
  }
  std::size_t equal_ok = 0;
  for (int k = 0; k < 200; ++k) {
    const BetaClassification c = draw(true);
    max_equal = std::max(max_equal, c.report.max_abs_residual);
    if (c.consistent && c.report.max_abs_residual <= 1e-12) ++equal_ok;
  }
  const double elapsed = seconds_since(start);
  const bool ok = inconsistent == draws && equal_ok == 200 && elapsed <= 1.0;
  return {ok, fmt("%zu/%zu unequal draws inconsistent (min witness %.2e); equal-beta max|S|=%.1e; runtime=%.3fs",
                  inconsistent, draws, min_witness, max_equal, elapsed)};
}

Outcome gram_closed_form() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> un(2, 6);
  std::uniform_real_distribution<double> ub(-2.0, 2.0), ua(0.0, 2 * kPi), urho(1.05, 4.0), urate(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = un(rng);
    RotopulsatorShape shape;
    for (std::size_t i = 0; i < n; ++i) {
      shape.betas.push_back(ub(rng));
      shape.alphas.push_back(ua(rng));
    }
    ReducedState red;
    red.rho = urho(rng);
    red.theta = ua(rng);
    red.phi = urate(rng);
    const SystemState s = assemble_state(shape, red, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double direct = sigma_dot(s.bodies[i].q, s.bodies[j].q, s.sigma);
        worst = std::max(worst, std::abs(gram_entry(shape, red, i, j) - direct) / std::max(1.0, std::abs(direct)));
      }
    }
  }
  return {worst <= 1e-12, fmt("max error over 1000 draws = %.2e", worst)};
}

Outcome reduced_full_consistency() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> urho(1.1, 4.0), urate(-1.0, 1.0), ua(0.0, 2 * kPi);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 3 + static_cast<std::size_t>(k % 3);
    const RotopulsatorShape shape = polygon(n, ua(rng));
    ReducedState red;
    red.rho = urho(rng);
    red.rho_dot = urate(rng);
    red.theta = ua(rng);
    red.theta_dot = urate(rng);
    red.phi = urate(rng);
    red.phi_dot = urate(rng);
    const std::vector<double> masses(n, 1.0);
    const auto predicted = ansatz_second_derivative(shape, red, reduced_rhs(shape, red, masses));
    const auto actual = accelerations(assemble_state(shape, red, masses));
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, (predicted[i] - actual[i]).cwiseAbs().maxCoeff());
    }
  }
  RotopulsatorShape irregular;
  irregular.betas.assign(4, 0.0);
  irregular.alphas = {0.0, 1.0, 2.0, 4.0};
  ReducedState red;
  red.rho = 1.5;
  red.rho_dot = 0.3;
  red.theta_dot = 0.4;
  const ConsistencyReport bad = consistency_mismatch(irregular, red, std::vector<double>(4, 1.0));
  const bool ok = worst <= 1e-10 && bad.max_projection_spread > 1e-3;
  return {ok, fmt("regular max componentwise error = %.2e; irregular projected mismatch = %.3f", worst,
                  bad.max_projection_spread)};
}

Outcome equilibrium_uniqueness() {
  const auto start = Clock::now();
  std::size_t good = 0, cells = 0;
  double worst_drift = 0.0, worst_shape = 0.0;
  std::string roots;
  for (std::size_t n = 3; n <= 6; ++n) {
    for (double rho : {1.2, std::numbers::sqrt2, 2.0}) {
      ++cells;
      const EquilibriumSolution sol = find_relative_equilibrium(n, 1.0, rho);
      Scenario sc;
      sc.t_end = 10.0;
      sc.shape = equilibrium_shape(n);
      sc.regular_offset = 0.0;
      sc.reduced = equilibrium_state(sol);
      sc.masses.assign(n, 1.0);
      sc.integrator.rel_tol = 1e-12;
      sc.integrator.abs_tol = 1e-13;
      sc.integrator.precision = Precision::Quad;
      const Trajectory traj = integrate_scenario(sc);
      double drift = 0.0;
      for (const Sample& s : traj.samples) drift = std::max(drift, std::abs(s.diag.ansatz->rho - rho));
      const double shape = shape_residual(traj);
      worst_drift = std::max(worst_drift, drift);
      worst_shape = std::max(worst_shape, shape);
      roots += std::to_string(sol.root_count);
      if (sol.root_count == 1 && sol.residual_norm <= 1e-10 && drift <= 1e-6 && shape <= 1e-7) ++good;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = good == cells && elapsed <= 60.0;
  return {ok, fmt("%zu/%zu cells with one root (counts %s); max rho drift %.2e; max shape residual %.2e; runtime=%.2fs",
                  good, cells, roots.c_str(), worst_drift, worst_shape, elapsed)};
}

Outcome circle_radius() {
  const Trajectory traj = integrate_scenario(triangle_run(1e-10));
  std::size_t on = 0;
  double worst = 0.0;
  for (const Sample& s : traj.samples) {
    const CircleCheck c = circle_radius_check(s.state, 1e-8);
    const double rho = s.diag.ansatz->rho;
    const double err = std::abs(c.r - std::sqrt(rho * rho - 1.0));
    worst = std::max(worst, err);
    if (c.on_circle && err <= 1e-8) ++on;
  }
  return {on == traj.samples.size(),
          fmt("%zu/%zu samples on the circle; max |r - sqrt(rho^2-1)| = %.2e", on, traj.samples.size(), worst)};
}

Outcome integrator_order() {
  const SystemState s0 = scalene_three_body();
  const double t_end = 10.0;
  IntegratorConfig ref_cfg;
  ref_cfg.rel_tol = 1e-13;
  ref_cfg.abs_tol = 1e-15;
  ref_cfg.precision = Precision::Quad;
  const Trajectory ref = integrate(s0, t_end, ref_cfg);
  std::vector<double> log_steps, log_err;
  std::string ladder;
  for (double tol : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10}) {
    IntegratorConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    cfg.max_step = 10.0;
    const Trajectory run = integrate(s0, t_end, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      err = std::max(err, (run.back().state.bodies[i].q - ref.back().state.bodies[i].q).cwiseAbs().maxCoeff());
      err = std::max(err, (run.back().state.bodies[i].v - ref.back().state.bodies[i].v).cwiseAbs().maxCoeff());
    }
    log_steps.push_back(std::log(static_cast<double>(run.stats.accepted)));
    log_err.push_back(std::log(err));
    ladder += fmt(" %zu:%.1e", run.stats.accepted, err);
  }
  // least-squares slope of log(err) against log(steps)
  const double m = static_cast<double>(log_steps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < log_steps.size(); ++k) {
    sx += log_steps[k];
    sy += log_err[k];
    sxx += log_steps[k] * log_steps[k];
    sxy += log_steps[k] * log_err[k];
  }
  const double order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  bool decreasing = true;
  for (std::size_t k = 1; k < log_err.size(); ++k) decreasing = decreasing && log_err[k] < log_err[k - 1];
  return {order >= 4.0 && decreasing, fmt("observed order %.2f (steps:error%s)", order, ladder.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"manifold fidelity", manifold_fidelity},
      {"rho^2 phi' conservation", lemma_conservation},
      {"wedge momentum conservation", wedge_conservation},
      {"beta sign law", beta_sign_law},
      {"gram closed form", gram_closed_form},
      {"reduced/full consistency", reduced_full_consistency},
      {"relative equilibrium uniqueness", equilibrium_uniqueness},
      {"circle radius", circle_radius},
      {"integrator order", integrator_order},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu [%s] %s: %s\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
