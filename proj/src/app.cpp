#include "curvedbody/app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace curvedbody {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string join_reals(const std::vector<double>& xs, char sep = ';') {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += sep;
    out += format_real(xs[k]);
  }
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

const char* status_text(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "skipped";
}

CheckStatus verdict(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

const char* error_kind(IntegrationErrorKind k) {
  switch (k) {
    case IntegrationErrorKind::Singularity:
      return "singularity";
    case IntegrationErrorKind::StepUnderflow:
      return "step-underflow";
    case IntegrationErrorKind::ManifoldLoss:
      return "manifold-loss";
  }
  return "runtime";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string preamble_for(const Scenario& sc, std::uint64_t seed) {
  return "# scenario=" + sc.name + " seed=" + std::to_string(seed);
}

void write_run_outputs(const Scenario& sc, const Trajectory& traj, const RunOptions& opts,
                       std::uint64_t seed) {
  const std::string pre = preamble_for(sc, seed);
  if (sc.outputs.trajectory) {
    auto out = open_output(opts.out_dir / (sc.name + ".trajectory.csv"));
    write_trajectory_table(out, traj, pre);
  }
  if (sc.outputs.diagnostics) {
    auto out = open_output(opts.out_dir / (sc.name + ".diagnostics.csv"));
    write_diagnostics_table(out, traj, pre);
  }
}

}  // namespace

VerifyTolerances VerifyTolerances::scaled(double f) const {
  VerifyTolerances t = *this;
  for (double* x : {&t.beta_residual, &t.consistency, &t.manifold, &t.circle, &t.lemma_rel_drift,
                    &t.lemma_abs_drift, &t.wedge_rel_drift, &t.wedge_abs_drift, &t.shape,
                    &t.equilibrium_rho_drift, &t.equilibrium_shape}) {
    *x *= f;
  }
  return t;
}

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::Fail; });
}

void VerifyReport::write(std::ostream& out) const {
  out << "scenario = " << scenario << "\n";
  out << "seed = " << seed << "\n";
  out << "tol_scale = " << format_real(tol_scale) << "\n";
  out << "status = " << (passed() ? "pass" : "fail") << "\n";
  for (const Check& c : checks) {
    out << "check." << c.name << " = " << status_text(c.status) << "\n";
    for (const auto& [k, v] : c.details) out << c.name << "." << k << " = " << v << "\n";
  }
}

std::pair<double, double> wedge_drift(const Trajectory& traj) {
  double rel = 0.0;
  double abs = 0.0;
  if (traj.empty()) return {rel, abs};
  const Bivector6 w0 = traj.front().diag.wedge;
  for (const Sample& s : traj.samples) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      const double d = std::abs(s.diag.wedge(c) - w0(c));
      if (std::abs(w0(c)) > 1e-10) {
        rel = std::max(rel, d / std::abs(w0(c)));
      } else {
        abs = std::max(abs, d);
      }
    }
  }
  return {rel, abs};
}

double lemma_drift(const Trajectory& traj, bool* relative) {
  if (traj.empty() || !traj.front().diag.ansatz) {
    throw std::invalid_argument("lemma_drift: trajectory carries no ansatz diagnostics");
  }
  const double l0 = traj.front().diag.ansatz->rho2_phidot;
  double worst = 0.0;
  for (const Sample& s : traj.samples) {
    worst = std::max(worst, std::abs(s.diag.ansatz->rho2_phidot - l0));
  }
  const bool rel = std::abs(l0) > 1e-12;
  if (relative) *relative = rel;
  return rel ? worst / std::abs(l0) : worst;
}

void write_trajectory_table(std::ostream& out, const Trajectory& traj,
                            const std::string& preamble) {
  if (!preamble.empty()) out << preamble << "\n";
  const std::size_t n = traj.empty() ? 0 : traj.front().state.size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) {
    for (int k = 1; k <= 4; ++k) out << ",q" << i << "_" << k;
    for (int k = 1; k <= 4; ++k) out << ",v" << i << "_" << k;
  }
  out << "\n";
  for (const Sample& s : traj.samples) {
    out << format_real(s.t());
    for (const Body& b : s.state.bodies) {
      for (int k = 0; k < 4; ++k) out << "," << format_real(b.q(k));
      for (int k = 0; k < 4; ++k) out << "," << format_real(b.v(k));
    }
    out << "\n";
  }
}

void write_diagnostics_table(std::ostream& out, const Trajectory& traj,
                             const std::string& preamble) {
  if (!preamble.empty()) out << preamble << "\n";
  out << "t,constraint_max,L12,L13,L14,L23,L24,L34,rho,phi,theta,rho2_phidot\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Sample& s : traj.samples) {
    out << format_real(s.t()) << "," << format_real(s.diag.constraint_max);
    for (Eigen::Index c = 0; c < 6; ++c) out << "," << format_real(s.diag.wedge(c));
    const auto& a = s.diag.ansatz;
    out << "," << format_real(a ? a->rho : nan) << "," << format_real(a ? a->phi : nan) << ","
        << format_real(a ? a->theta : nan) << "," << format_real(a ? a->rho2_phidot : nan)
        << "\n";
  }
}

VerifyReport verify_scenario(const Scenario& sc, std::uint64_t seed, double tol_scale) {
  sc.validate();
  const VerifyTolerances tol = VerifyTolerances{}.scaled(tol_scale);
  VerifyReport report;
  report.scenario = sc.name;
  report.seed = seed;
  report.tol_scale = tol_scale;
  const std::size_t n = sc.body_count();

  if (sc.shape) {
    const RotopulsatorShape& shape = *sc.shape;
    const ReducedState& red = *sc.reduced;

    Check beta{"beta"};
    const BetaClassification cls = classify_betas(shape, red, sc.masses);
    beta.status = verdict(cls.consistent && cls.report.max_abs_residual <= tol.beta_residual);
    beta.details.emplace_back("classification", cls.consistent ? "consistent" : "inconsistent");
    beta.details.emplace_back("residuals", join_reals(cls.report.residuals));
    beta.details.emplace_back("max_abs_residual", format_real(cls.report.max_abs_residual));
    if (cls.witness) {
      beta.details.emplace_back("witness", std::to_string(*cls.witness + 1));
      beta.details.emplace_back("witness_residual", format_real(cls.witness_residual));
    }
    report.checks.push_back(beta);

    Check polygon{"regular_polygon"};
    if (n >= 3) polygon.status = verdict(regular_polygon_check(shape.alphas));
    report.checks.push_back(polygon);

    Check consistency{"reduced_consistency"};
    const ConsistencyReport cr = consistency_mismatch(shape, red, sc.masses);
    consistency.status = verdict(cr.max_component_error <= tol.consistency &&
                                 cr.max_projection_spread <= tol.consistency);
    consistency.details.emplace_back("max_component_error", format_real(cr.max_component_error));
    consistency.details.emplace_back("max_projection_spread",
                                     format_real(cr.max_projection_spread));
    report.checks.push_back(consistency);
  }

  const Trajectory traj =
      integrate_scenario(sc);

  Check manifold{"manifold"};
  double cmax = 0.0;
  double tmax = 0.0;
  for (const Sample& s : traj.samples) {
    cmax = std::max(cmax, s.diag.constraint_max);
    tmax = std::max(tmax, s.diag.tangency_max);
  }
  manifold.status = verdict(cmax <= tol.manifold && tmax <= tol.manifold);
  manifold.details.emplace_back("max_constraint", format_real(cmax));
  manifold.details.emplace_back("max_tangency", format_real(tmax));
  manifold.details.emplace_back("samples", std::to_string(traj.samples.size()));
  report.checks.push_back(manifold);

  Check wedge{"wedge_drift"};
  const auto [wrel, wabs] = wedge_drift(traj);
  wedge.status = verdict(wrel <= tol.wedge_rel_drift && wabs <= tol.wedge_abs_drift);
  wedge.details.emplace_back("max_rel_drift", format_real(wrel));
  wedge.details.emplace_back("max_abs_drift_zero_components", format_real(wabs));
  report.checks.push_back(wedge);

  if (sc.shape) {
    Check lemma{"lemma_drift"};
    bool rel = true;
    const double drift = lemma_drift(traj, &rel);
    lemma.status = verdict(drift <= (rel ? tol.lemma_rel_drift : tol.lemma_abs_drift));
    lemma.details.emplace_back(rel ? "rho2_phidot_rel_drift" : "rho2_phidot_abs_drift",
                               format_real(drift));
    report.checks.push_back(lemma);

    Check circle{"circle"};
    bool all = true;
    double r0 = std::nan("");
    double r1 = std::nan("");
    for (const Sample& s : traj.samples) {
      const CircleCheck cc = circle_radius_check(s.state, tol.circle);
      if (!cc.on_circle) {
        all = false;
        break;
      }
      if (std::isnan(r0)) r0 = cc.r;
      r1 = cc.r;
    }
    circle.status = verdict(all);
    circle.details.emplace_back("r_start", format_real(r0));
    circle.details.emplace_back("r_end", format_real(r1));
    report.checks.push_back(circle);
  }

  Check shape_check{"shape"};
  {
    try {
      const double res = shape_residual(traj);
      shape_check.status = verdict(res <= tol.shape);
      shape_check.details.emplace_back("residual", format_real(res));
    } catch (const std::domain_error& e) {
      shape_check.status = CheckStatus::Fail;
      shape_check.details.emplace_back("error", e.what());
    }
  }
  report.checks.push_back(shape_check);
  return report;
}

void write_error_record(const std::filesystem::path& out_dir, const std::string& stem,
                        const std::string& kind, const std::string& message,
                        std::optional<double> t, std::ostream& err) {
  std::ostringstream rec;
  rec << "kind = " << kind << "\n";
  rec << "message = " << sanitize(message) << "\n";
  if (t) rec << "t = " << format_real(*t) << "\n";
  try {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / (stem + ".error"));
    out << rec.str();
  } catch (const std::exception&) {
  }
  err << "error: kind=" << kind << (t ? " t=" + format_real(*t) : std::string()) << " "
      << message << "\n";
}

int run_simulate(const Scenario& sc, const RunOptions& opts) {
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    write_error_record(opts.out_dir, sc.name, "config", e.what(), std::nullopt, std::cerr);
    return kExitOperationalError;
  }
  std::filesystem::create_directories(opts.out_dir);
  try {
    const Trajectory traj =
        integrate_scenario(sc);
    write_run_outputs(sc, traj, opts, seed);
  } catch (const IntegrationError& e) {
    write_run_outputs(sc, e.partial(), opts, seed);
    write_error_record(opts.out_dir, sc.name, error_kind(e.kind()), e.what(), e.time(), std::cerr);
    return kExitOperationalError;
  }
  return kExitOk;
}

int run_verify(const Scenario& sc, const RunOptions& opts) {
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    write_error_record(opts.out_dir, sc.name, "config", e.what(), std::nullopt, std::cerr);
    return kExitOperationalError;
  }
  std::filesystem::create_directories(opts.out_dir);
  try {
    const VerifyReport report = verify_scenario(sc, seed, opts.tol_scale);
    auto out = open_output(opts.out_dir / (sc.name + ".report"));
    report.write(out);
    return report.passed() ? kExitOk : kExitVerificationFailed;
  } catch (const IntegrationError& e) {
    write_error_record(opts.out_dir, sc.name, error_kind(e.kind()), e.what(), e.time(), std::cerr);
    return kExitOperationalError;
  } catch (const ConfigError& e) {
    write_error_record(opts.out_dir, sc.name, "config", e.what(), std::nullopt, std::cerr);
    return kExitOperationalError;
  }
}

namespace {

struct SweepRow {
  std::string line;
  CheckStatus status = CheckStatus::Skipped;
  bool error = false;
};

void run_parallel(std::vector<std::function<SweepRow()>>& jobs, std::vector<SweepRow>& rows) {
  rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) rows[k] = jobs[k]();
  };
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t count = std::min(hw, jobs.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
  if (count > 0) worker();
}

SweepRow equilibrium_row(std::size_t n, double rho, const SweepConfig& cfg,
                         const VerifyTolerances& tol) {
  std::ostringstream line;
  line << n << "," << format_real(rho) << ",";
  SweepRow row;
  try {
    EquilibriumOptions eo;
    eo.grid_points = cfg.grid_points;
    eo.omega_max = cfg.omega_max;
    const EquilibriumSolution sol = find_relative_equilibrium(n, cfg.mass, rho, eo);
    double rho_drift = std::nan("");
    double shape_res = std::nan("");
    bool ok = sol.root_count == 1 && sol.residual_norm <= 1e-10;
    if (cfg.t_end > 0.0) {
      const RotopulsatorShape shape = equilibrium_shape(n);
      const std::vector<double> masses(n, cfg.mass);
      Scenario sc;
      sc.name = cfg.name;
      sc.t_end = cfg.t_end;
      sc.shape = shape;
      sc.reduced = equilibrium_state(sol);
      sc.masses = masses;
      sc.regular_offset = 0.0;
      sc.integrator = cfg.integrator;
      const Trajectory traj = integrate_scenario(sc);
      rho_drift = 0.0;
      for (const Sample& s : traj.samples) {
        rho_drift = std::max(rho_drift, std::abs(s.diag.ansatz->rho - rho));
      }
      ok = ok && rho_drift <= tol.equilibrium_rho_drift;
      shape_res = shape_residual(traj);
      ok = ok && shape_res <= tol.equilibrium_shape;
    }
    row.status = verdict(ok);
    line << sol.root_count << "," << format_real(sol.theta_dot) << ","
         << format_real(sol.residual_norm) << "," << format_real(rho_drift) << ","
         << format_real(shape_res) << "," << status_text(row.status) << ",";
  } catch (const std::exception& e) {
    row.error = true;
    line << ",,,,,error," << sanitize(e.what());
  }
  row.line = line.str();
  return row;
}

struct BetaDraw {
  std::size_t n = 0;
  double rho = 0.0;
  std::vector<double> masses;
  RotopulsatorShape shape;
};

SweepRow beta_row(std::size_t index, const BetaDraw& d) {
  std::ostringstream line;
  line << index << "," << d.n << "," << format_real(d.rho) << "," << join_reals(d.shape.betas)
       << "," << join_reals(d.masses) << ",";
  SweepRow row;
  try {
    ReducedState red;
    red.rho = d.rho;
    const BetaClassification c = classify_betas(d.shape, red, d.masses);
    const bool ok = !c.consistent && c.witness_residual >= 1e-8;
    row.status = verdict(ok);
    line << (c.consistent ? "consistent" : "inconsistent") << ","
         << (c.witness ? std::to_string(*c.witness + 1) : std::string()) << ","
         << format_real(c.witness_residual) << "," << format_real(c.report.max_abs_residual)
         << "," << status_text(row.status) << ",";
  } catch (const std::exception& e) {
    row.error = true;
    line << ",,,,error," << sanitize(e.what());
  }
  row.line = line.str();
  return row;
}

std::vector<BetaDraw> draw_betas(const SweepConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.1, 10.0);
  std::uniform_real_distribution<double> rho(1.1, 5.0);
  std::uniform_real_distribution<double> beta(-2.0, 2.0);
  std::uniform_real_distribution<double> offset(0.0, 2.0 * std::numbers::pi);
  const std::vector<std::size_t> ns =
      cfg.ns.empty() ? std::vector<std::size_t>{2, 3, 4, 5, 6} : cfg.ns;
  std::uniform_int_distribution<std::size_t> pick(0, ns.size() - 1);

  std::vector<BetaDraw> draws(cfg.draws);
  for (BetaDraw& d : draws) {
    d.n = ns[pick(rng)];
    d.rho = rho(rng);
    d.masses.resize(d.n);
    for (double& m : d.masses) m = mass(rng);
    d.shape.kind = RotopulsatorKind::NegativeHyperbolic;
    d.shape.alphas = regular_alphas(d.n, offset(rng));
    do {
      d.shape.betas.resize(d.n);
      for (double& b : d.shape.betas) b = beta(rng);
    } while (std::all_of(d.shape.betas.begin(), d.shape.betas.end(),
                         [&](double b) { return b == d.shape.betas.front(); }));
  }
  return draws;
}

}  // namespace

int run_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const VerifyTolerances tol = VerifyTolerances{}.scaled(opts.tol_scale);

  std::vector<std::function<SweepRow()>> jobs;
  std::string header;
  if (cfg.kind == SweepKind::Equilibrium) {
    header = "n,rho,root_count,omega,residual_norm,rho_drift,shape_residual,status,error";
    for (std::size_t n : cfg.ns) {
      for (double rho : cfg.rhos) {
        jobs.emplace_back([=, &cfg] { return equilibrium_row(n, rho, cfg, tol); });
      }
    }
  } else {
    header =
        "draw,n,rho,betas,masses,classification,witness,witness_residual,max_abs_residual,"
        "status,error";
    auto draws = std::make_shared<std::vector<BetaDraw>>(draw_betas(cfg, seed));
    for (std::size_t k = 0; k < draws->size(); ++k) {
      jobs.emplace_back([k, draws] { return beta_row(k + 1, (*draws)[k]); });
    }
  }

  std::vector<SweepRow> rows;
  run_parallel(jobs, rows);

  std::filesystem::create_directories(opts.out_dir);
  auto out = open_output(opts.out_dir / (cfg.name + ".summary.csv"));
  out << "# sweep=" << cfg.name
      << " kind=" << (cfg.kind == SweepKind::Equilibrium ? "equilibrium" : "beta")
      << " seed=" << seed << "\n";
  out << header << "\n";
  bool any_error = false;
  bool any_fail = false;
  for (const SweepRow& r : rows) {
    out << r.line << "\n";
    any_error = any_error || r.error;
    any_fail = any_fail || r.status == CheckStatus::Fail;
  }
  if (any_error) return kExitOperationalError;
  return any_fail ? kExitVerificationFailed : kExitOk;
}

}  // namespace curvedbody
