#include "curvedbody/integrator.hpp"

#include "curvedbody/quad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace curvedbody {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("integrator tolerances must be positive");
  }
  if (!(max_step > 0.0)) {
    throw std::invalid_argument("integrator max_step must be positive");
  }
  if (projection_interval < 1) {
    throw std::invalid_argument("integrator projection_interval must be at least 1");
  }
  if (!(sample_interval >= 0.0)) {
    throw std::invalid_argument("integrator sample_interval must be non-negative");
  }
}

IntegrationError::IntegrationError(IntegrationErrorKind kind, double t, std::string what,
                                   Trajectory partial,
                                   std::optional<std::pair<std::size_t, std::size_t>> pair)
    : std::runtime_error(std::move(what)),
      kind_(kind),
      t_(t),
      partial_(std::move(partial)),
      pair_(pair) {}

AnsatzDiagnostics read_ansatz(const SystemState& s, const AnsatzReference& ref,
                              std::optional<double> previous_theta) {
  AnsatzDiagnostics d;
  double rho_sum = 0.0;
  for (const Body& b : s.bodies) {
    rho_sum += std::sqrt(std::max(0.0, b.q(3) * b.q(3) - b.q(2) * b.q(2)));
  }
  d.rho = rho_sum / static_cast<double>(s.size());

  const Body& b1 = s.bodies.front();
  d.phi = std::atanh(b1.q(2) / b1.q(3)) - ref.beta;
  d.rho2_phidot = b1.q(3) * b1.v(2) - b1.q(2) * b1.v(3);

  // (q1, q2) = r (sin(alpha - theta), cos(alpha - theta))
  double theta = ref.alpha - std::atan2(b1.q(0), b1.q(1));
  if (previous_theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    theta += two_pi * std::round((*previous_theta - theta) / two_pi);
  }
  d.theta = theta;
  return d;
}

Diagnostics diagnose(const SystemState& s, const std::optional<AnsatzReference>& ref,
                     std::optional<double> previous_theta) {
  Diagnostics d;
  d.constraint_max = max_constraint_residual(s);
  d.tangency_max = max_tangency_residual(s);
  d.wedge = wedge_momentum(s);
  if (ref) d.ansatz = read_ansatz(s, *ref, previous_theta);
  return d;
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
template <typename S>
struct Tableau {
  static S frac(long long a, long long b) { return S(a) / S(b); }

  S c2 = frac(1, 5), c3 = frac(3, 10), c4 = frac(4, 5), c5 = frac(8, 9);
  S a21 = frac(1, 5);
  S a31 = frac(3, 40), a32 = frac(9, 40);
  S a41 = frac(44, 45), a42 = frac(-56, 15), a43 = frac(32, 9);
  S a51 = frac(19372, 6561), a52 = frac(-25360, 2187), a53 = frac(64448, 6561),
    a54 = frac(-212, 729);
  S a61 = frac(9017, 3168), a62 = frac(-355, 33), a63 = frac(46732, 5247), a64 = frac(49, 176),
    a65 = frac(-5103, 18656);
  S a71 = frac(35, 384), a73 = frac(500, 1113), a74 = frac(125, 192), a75 = frac(-2187, 6784),
    a76 = frac(11, 84);
  S e1 = frac(71, 57600), e3 = frac(-71, 16695), e4 = frac(71, 1920), e5 = frac(-17253, 339200),
    e6 = frac(22, 525), e7 = frac(-1, 40);
  S d1 = frac(-12715105075LL, 11282082432LL), d3 = frac(87487479700LL, 32700410799LL),
    d4 = frac(-10690763975LL, 1880347072LL), d5 = frac(701980252875LL, 199316789632LL),
    d6 = frac(-1453857185LL, 822651844LL), d7 = frac(69997945LL, 29380423LL);
};

template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
class FlatSystem {
 public:
  explicit FlatSystem(const BasicSystemState<S>& proto) : scratch_(proto) {}

  VecX<S> pack(const BasicSystemState<S>& s) const {
    VecX<S> y(8 * s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      y.template segment<4>(8 * i) = s.bodies[i].q;
      y.template segment<4>(8 * i + 4) = s.bodies[i].v;
    }
    return y;
  }

  BasicSystemState<S> unpack(const VecX<S>& y, double t) const {
    BasicSystemState<S> s = scratch_;
    load(y, t, s);
    return s;
  }

  void rhs(double t, const VecX<S>& y, VecX<S>& dy) {
    load(y, t, scratch_);
    accelerations_into(scratch_, acc_);
    ++evaluations;
    dy.resize(y.size());
    for (std::size_t i = 0; i < scratch_.size(); ++i) {
      dy.template segment<4>(8 * i) = y.template segment<4>(8 * i + 4);
      dy.template segment<4>(8 * i + 4) = acc_[i];
    }
  }

  std::size_t evaluations = 0;

 private:
  static void load(const VecX<S>& y, double t, BasicSystemState<S>& s) {
    s.t = t;
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.bodies[i].q = y.template segment<4>(8 * i);
      s.bodies[i].v = y.template segment<4>(8 * i + 4);
    }
  }

  BasicSystemState<S> scratch_;
  std::vector<Vec4<S>> acc_;
};

template <typename S>
double error_norm(const VecX<S>& err, const VecX<S>& y0, const VecX<S>& y1,
                  const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < err.size(); ++k) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(static_cast<double>(y0(k))),
                                                           std::abs(static_cast<double>(y1(k))));
    const double e = static_cast<double>(err(k)) / sk;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

template <typename S>
double scaled_norm(const VecX<S>& x, const VecX<S>& y, const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double e = static_cast<double>(x(k)) /
                     (cfg.abs_tol + cfg.rel_tol * std::abs(static_cast<double>(y(k))));
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

class Recorder {
 public:
  Recorder(Trajectory& traj, std::optional<AnsatzReference> ref) : traj_(traj), ref_(ref) {}

  template <typename S>
  void record(const BasicSystemState<S>& s) {
    std::optional<double> prev;
    if (!traj_.samples.empty() && traj_.samples.back().diag.ansatz) {
      prev = traj_.samples.back().diag.ansatz->theta;
    }
    SystemState d = convert_state<double>(s);
    Diagnostics diag = diagnose(d, ref_, prev);
    traj_.samples.push_back(Sample{std::move(d), std::move(diag)});
  }

 private:
  Trajectory& traj_;
  std::optional<AnsatzReference> ref_;
};

}  // namespace

template <typename S>
Trajectory integrate_in(const BasicSystemState<S>& s0, double t_end, const IntegratorConfig& cfg,
                        const std::optional<AnsatzReference>& ansatz) {
  cfg.validate();
  if (!(t_end > s0.t)) {
    throw std::invalid_argument("integrate: t_end must be greater than the initial time");
  }
  if (s0.size() < 2) {
    throw std::invalid_argument("integrate: need at least two bodies");
  }

  static const Tableau<S> tab;
  Trajectory traj;
  traj.ansatz = ansatz;
  Recorder recorder(traj, ansatz);
  FlatSystem<S> sys(s0);

  const double t0 = s0.t;
  const double h_min = 1e-14 * std::max(std::abs(t_end), std::abs(t_end - t0));
  double t = t0;
  const BasicSystemState<S> start = project_state(s0);
  VecX<S> y = sys.pack(start);
  const Eigen::Index dim = y.size();
  VecX<S> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), ynew(dim),
      err(dim);

  std::size_t sample_index = 1;
  double next_sample = t0 + cfg.sample_interval;
  const double end_guard = 1e-12 * std::max(1.0, std::abs(t_end));

  auto fail = [&](IntegrationErrorKind kind, double when, std::string msg,
                  std::optional<std::pair<std::size_t, std::size_t>> pair) {
    traj.stats.evaluations = sys.evaluations;
    return IntegrationError(kind, when, std::move(msg), std::move(traj), pair);
  };

  double stage_time = t;
  try {
    recorder.record(start);
    sys.rhs(t, y, k1);

    // Initial step guess (Hairer, Norsett & Wanner, II.4).
    double h;
    {
      const double d0 = scaled_norm<S>(y, y, cfg);
      const double d1 = scaled_norm<S>(k1, y, cfg);
      double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
      h0 = std::min({h0, cfg.max_step, t_end - t});
      ytmp = y + S(h0) * k1;
      stage_time = t + h0;
      sys.rhs(stage_time, ytmp, k2);
      const double d2 = scaled_norm<S>(VecX<S>(k2 - k1), y, cfg) / h0;
      const double dm = std::max(d1, d2);
      const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
      h = std::min({100.0 * h0, h1, cfg.max_step});
    }

    bool rejected_last = false;
    int since_projection = 0;
    while (t < t_end) {
      bool last = false;
      if (t + h >= t_end - end_guard) {
        h = t_end - t;
        last = true;
      }
      if (h < h_min) {
        throw fail(IntegrationErrorKind::StepUnderflow, t,
                   "step size underflow at t=" + std::to_string(t), std::nullopt);
      }

      const S hs(h);
      stage_time = t + static_cast<double>(tab.c2) * h;
      ytmp = y + hs * (tab.a21 * k1);
      sys.rhs(stage_time, ytmp, k2);
      stage_time = t + static_cast<double>(tab.c3) * h;
      ytmp = y + hs * (tab.a31 * k1 + tab.a32 * k2);
      sys.rhs(stage_time, ytmp, k3);
      stage_time = t + static_cast<double>(tab.c4) * h;
      ytmp = y + hs * (tab.a41 * k1 + tab.a42 * k2 + tab.a43 * k3);
      sys.rhs(stage_time, ytmp, k4);
      stage_time = t + static_cast<double>(tab.c5) * h;
      ytmp = y + hs * (tab.a51 * k1 + tab.a52 * k2 + tab.a53 * k3 + tab.a54 * k4);
      sys.rhs(stage_time, ytmp, k5);
      stage_time = t + h;
      ytmp = y + hs * (tab.a61 * k1 + tab.a62 * k2 + tab.a63 * k3 + tab.a64 * k4 + tab.a65 * k5);
      sys.rhs(stage_time, ytmp, k6);
      ynew = y + hs * (tab.a71 * k1 + tab.a73 * k3 + tab.a74 * k4 + tab.a75 * k5 + tab.a76 * k6);
      sys.rhs(stage_time, ynew, k7);
      err = hs * (tab.e1 * k1 + tab.e3 * k3 + tab.e4 * k4 + tab.e5 * k5 + tab.e6 * k6 +
                  tab.e7 * k7);

      const double en = error_norm<S>(err, y, ynew, cfg);
      if (!std::isfinite(en) || en > 1.0) {
        ++traj.stats.rejected;
        const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
        h *= std::min(1.0, fac);
        rejected_last = true;
        continue;
      }

      ++traj.stats.accepted;
      const double t_new = last ? t_end : t + h;

      // Interpolated samples strictly inside (t, t_new).
      if (cfg.sample_interval > 0.0) {
        while (next_sample < t_new - end_guard) {
          const S th((next_sample - t) / h);
          const S th1 = S(1) - th;
          const VecX<S> r2 = ynew - y;
          const VecX<S> r3 = hs * k1 - r2;
          const VecX<S> r4 = r2 - hs * k7 - r3;
          const VecX<S> r5 = hs * (tab.d1 * k1 + tab.d3 * k3 + tab.d4 * k4 + tab.d5 * k5 +
                                   tab.d6 * k6 + tab.d7 * k7);
          const VecX<S> yi = y + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
          recorder.record(project_state(sys.unpack(yi, next_sample)));
          next_sample = t0 + static_cast<double>(++sample_index) * cfg.sample_interval;
        }
      }

      t = t_new;
      ++since_projection;
      if (since_projection >= cfg.projection_interval || last) {
        const BasicSystemState<S> projected = project_state(sys.unpack(ynew, t));
        y = sys.pack(projected);
        stage_time = t;
        sys.rhs(t, y, k1);
        since_projection = 0;
        if (cfg.sample_interval == 0.0 || last) recorder.record(projected);
      } else {
        y = ynew;
        k1 = k7;
        if (cfg.sample_interval == 0.0) recorder.record(project_state(sys.unpack(y, t)));
      }

      const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
      h *= rejected_last ? std::min(1.0, fac) : fac;
      h = std::min(h, cfg.max_step);
      rejected_last = false;
    }
  } catch (const SingularityError& e) {
    throw fail(IntegrationErrorKind::Singularity, stage_time,
               std::string(e.what()) + " at t=" + std::to_string(stage_time),
               std::make_pair(e.first(), e.second()));
  } catch (const std::logic_error& e) {
    // raised by project_state / tangent_project once precision is exhausted
    throw fail(IntegrationErrorKind::ManifoldLoss, t,
               std::string(e.what()) + " at t=" + std::to_string(t), std::nullopt);
  }

  traj.stats.evaluations = sys.evaluations;
  return traj;
}

template Trajectory integrate_in<double>(const BasicSystemState<double>&, double,
                                         const IntegratorConfig&,
                                         const std::optional<AnsatzReference>&);
template Trajectory integrate_in<Quad>(const BasicSystemState<Quad>&, double,
                                       const IntegratorConfig&,
                                       const std::optional<AnsatzReference>&);

Trajectory integrate(const SystemState& s0, double t_end, const IntegratorConfig& cfg,
                     const std::optional<AnsatzReference>& ansatz) {
  if (cfg.precision == Precision::Quad) {
    return integrate_in<Quad>(convert_state<Quad>(s0), t_end, cfg, ansatz);
  }
  return integrate_in<double>(s0, t_end, cfg, ansatz);
}

}  // namespace curvedbody
