#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvedbody/dynamics.hpp"

namespace curvedbody {

/// Working precision of the stepper. Diagnostics and recorded samples are
/// always double.
enum class Precision { Double, Quad };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  /// Accepted steps between projections back onto the manifold.
  int projection_interval = 1;
  /// Spacing of output samples; 0 records every accepted step.
  double sample_interval = 0.0;
  Precision precision = Precision::Double;

  void validate() const;
};

/// Shape constants of body 1 under a rotopulsator ansatz, used to read
/// (rho, phi, theta) off a raw state.
struct AnsatzReference {
  double beta = 0.0;
  double alpha = 0.0;
};

struct AnsatzDiagnostics {
  double rho = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double rho2_phidot = 0.0;
};

struct Diagnostics {
  double constraint_max = 0.0;
  double tangency_max = 0.0;
  Bivector6 wedge = Bivector6::Zero();
  std::optional<AnsatzDiagnostics> ansatz;
};

struct Sample {
  SystemState state;
  Diagnostics diag;

  double t() const { return state.t; }
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::optional<AnsatzReference> ansatz;
  IntegratorStats stats;

  bool empty() const { return samples.empty(); }
  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
};

/// ManifoldLoss: a state could no longer be projected back onto the manifold
/// in working precision (typically a body escaping to very large |q|).
enum class IntegrationErrorKind { Singularity, StepUnderflow, ManifoldLoss };

/// Raised when the integration cannot reach t_end. Carries the trajectory
/// recorded up to the failure.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(IntegrationErrorKind kind, double t, std::string what, Trajectory partial,
                   std::optional<std::pair<std::size_t, std::size_t>> pair = std::nullopt);

  IntegrationErrorKind kind() const { return kind_; }
  double time() const { return t_; }
  const Trajectory& partial() const { return partial_; }
  const std::optional<std::pair<std::size_t, std::size_t>>& pair() const { return pair_; }

 private:
  IntegrationErrorKind kind_;
  double t_;
  Trajectory partial_;
  std::optional<std::pair<std::size_t, std::size_t>> pair_;
};

/// Rescales each position radially onto the manifold and replaces each
/// velocity by its tangent projection at the new position.
template <typename Scalar>
BasicSystemState<Scalar> project_state(const BasicSystemState<Scalar>& s) {
  using std::sqrt;
  BasicSystemState<Scalar> out = s;
  const Scalar sg(s.sigma.value());
  for (std::size_t i = 0; i < out.bodies.size(); ++i) {
    BasicBody<Scalar>& b = out.bodies[i];
    const Scalar scaled = sg * sigma_dot(b.q, b.q, s.sigma);
    if (!(scaled > Scalar(0))) {
      throw std::domain_error("project_state: position of body " + std::to_string(i + 1) +
                              " cannot be rescaled onto the manifold");
    }
    b.q /= sqrt(scaled);
    b.v = tangent_project(b.q, b.v, s.sigma);
  }
  return out;
}

/// (rho, phi, theta, rho^2 phi') recovered from a state. rho is the mean of
/// sqrt(q4^2 - q3^2) over bodies; angles come from body 1. When
/// previous_theta is given, theta is unwrapped to the branch nearest it.
AnsatzDiagnostics read_ansatz(const SystemState& s, const AnsatzReference& ref,
                              std::optional<double> previous_theta = std::nullopt);

Diagnostics diagnose(const SystemState& s, const std::optional<AnsatzReference>& ref,
                     std::optional<double> previous_theta = std::nullopt);

/// Integrates the curved n-body equations from s0.t to t_end with the
/// Dormand-Prince 5(4) pair, projecting onto the manifold after accepted
/// steps. Samples are projected states with diagnostics attached. Runs in
/// cfg.precision, seeded from the double state.
Trajectory integrate(const SystemState& s0, double t_end, const IntegratorConfig& cfg,
                     const std::optional<AnsatzReference>& ansatz = std::nullopt);

/// Same, with the stepper working in Scalar (instantiated for double and
/// Quad; include curvedbody/quad.hpp for the latter). cfg.precision is
/// ignored.
template <typename Scalar>
Trajectory integrate_in(const BasicSystemState<Scalar>& s0, double t_end,
                        const IntegratorConfig& cfg,
                        const std::optional<AnsatzReference>& ansatz = std::nullopt);

}  // namespace curvedbody
