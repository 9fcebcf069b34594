#include "curvedbody/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

namespace curvedbody {

SingularityError::SingularityError(std::size_t i, std::size_t j, double base)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "singular pair (" << i + 1 << ", " << j + 1 << "): kernel base "
            << std::setprecision(3) << base;
        return msg.str();
      }()),
      i_(i),
      j_(j),
      base_(base) {}

std::vector<Point4> accelerations(const SystemState& s) {
  std::vector<Point4> out;
  accelerations_into<double>(s, out);
  return out;
}

Bivector6 wedge_momentum(const SystemState& s) {
  Bivector6 w = Bivector6::Zero();
  for (const Body& b : s.bodies) {
    for (std::size_t k = 0; k < kBivectorBasis.size(); ++k) {
      const int a = kBivectorBasis[k][0];
      const int c = kBivectorBasis[k][1];
      w(k) += b.m * (b.q(a) * b.v(c) - b.q(c) * b.v(a));
    }
  }
  return w;
}

double max_constraint_residual(const SystemState& s) {
  double worst = 0.0;
  for (const Body& b : s.bodies) {
    worst = std::max(worst, std::abs(constraint_residual(b.q, s.sigma)));
  }
  return worst;
}

double max_tangency_residual(const SystemState& s) {
  double worst = 0.0;
  for (const Body& b : s.bodies) {
    worst = std::max(worst, std::abs(sigma_dot(b.q, b.v, s.sigma)));
  }
  return worst;
}

}  // namespace curvedbody
