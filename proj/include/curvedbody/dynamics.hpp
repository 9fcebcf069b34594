#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "curvedbody/geometry.hpp"

namespace curvedbody {

template <typename Scalar>
struct BasicBody {
  Vec4<Scalar> q = Vec4<Scalar>::Zero();
  Vec4<Scalar> v = Vec4<Scalar>::Zero();
  Scalar m = Scalar(1);
};

template <typename Scalar>
struct BasicSystemState {
  std::vector<BasicBody<Scalar>> bodies;
  CurvatureSign sigma = CurvatureSign::negative();
  double t = 0.0;

  std::size_t size() const { return bodies.size(); }
};

using Body = BasicBody<double>;
using SystemState = BasicSystemState<double>;

/// Components of sum_i m_i q_i ^ v_i on the basis e_a ^ e_b in the order
/// (1,2), (1,3), (1,4), (2,3), (2,4), (3,4).
using Bivector6 = Eigen::Matrix<double, 6, 1>;

inline constexpr std::array<std::array<int, 2>, 6> kBivectorBasis = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Base of the force kernel below which a pair is treated as colliding
/// (or antipodal on the sphere).
inline constexpr double kSingularityFloor = 1e-12;

class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::size_t i, std::size_t j, double base);

  std::size_t first() const { return i_; }
  std::size_t second() const { return j_; }
  double base() const { return base_; }

 private:
  std::size_t i_;
  std::size_t j_;
  double base_;
};

/// sigma - sigma (qi (.) qj)^2 for points on the manifold, evaluated as
/// sigma (sigma - g)(sigma + g) with sigma -+ g = |qi -+ qj|^2 / 2. The
/// factored form keeps full relative accuracy near collisions and antipodes.
template <typename Scalar>
Scalar pair_base(const Vec4<Scalar>& qi, const Vec4<Scalar>& qj, CurvatureSign s) {
  const Vec4<Scalar> d = qi - qj;
  const Vec4<Scalar> p = qi + qj;
  return Scalar(s.value()) * sigma_dot(d, d, s) * sigma_dot(p, p, s) / Scalar(4);
}

/// (sigma - sigma (qi (.) qj)^2)^(3/2). Throws SingularityError (with
/// indices i, j for the caller's bookkeeping) when the base is below
/// kSingularityFloor.
template <typename Scalar>
Scalar pair_kernel(const Vec4<Scalar>& qi, const Vec4<Scalar>& qj, CurvatureSign s,
                   std::size_t i = 0, std::size_t j = 1) {
  using std::sqrt;
  const Scalar base = pair_base(qi, qj, s);
  if (!(base >= Scalar(kSingularityFloor))) {
    throw SingularityError(i, j, static_cast<double>(base));
  }
  return base * sqrt(base);
}

/// Right-hand side of the curved n-body equations:
///   a_i = sum_{j != i} m_j (q_j - sigma (q_i.q_j) q_i) / kernel_ij - sigma (v_i.v_i) q_i
/// The pair numerator is formed as (q_j - q_i) + (|q_i - q_j|^2 / 2) sigma q_i,
/// equal to the above on the manifold. Summation runs j = 0..n-1 in order,
/// so results are bit-reproducible.
/// Requires n >= 2.
template <typename Scalar>
void accelerations_into(const BasicSystemState<Scalar>& s, std::vector<Vec4<Scalar>>& out) {
  const std::size_t n = s.size();
  if (n < 2) {
    throw std::invalid_argument("accelerations: need at least two bodies");
  }
  const Scalar sg(s.sigma.value());
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec4<Scalar>& qi = s.bodies[i].q;
    Vec4<Scalar> acc = Vec4<Scalar>::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec4<Scalar>& qj = s.bodies[j].q;
      const Vec4<Scalar> d = qj - qi;
      const Scalar half_gap = sigma_dot(d, d, s.sigma) / Scalar(2);
      const Scalar k = pair_kernel(qi, qj, s.sigma, i, j);
      acc += (s.bodies[j].m / k) * (d + (sg * half_gap) * qi);
    }
    const Vec4<Scalar>& vi = s.bodies[i].v;
    acc -= sg * sigma_dot(vi, vi, s.sigma) * qi;
    out[i] = acc;
  }
}

std::vector<Point4> accelerations(const SystemState& s);

Bivector6 wedge_momentum(const SystemState& s);

/// max_i |q_i (.) q_i - sigma|
double max_constraint_residual(const SystemState& s);

/// max_i |q_i (.) v_i|
double max_tangency_residual(const SystemState& s);

template <typename To, typename From>
BasicSystemState<To> convert_state(const BasicSystemState<From>& s) {
  BasicSystemState<To> out;
  out.sigma = s.sigma;
  out.t = s.t;
  out.bodies.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      out.bodies[i].q(k) = static_cast<To>(s.bodies[i].q(k));
      out.bodies[i].v(k) = static_cast<To>(s.bodies[i].v(k));
    }
    out.bodies[i].m = static_cast<To>(s.bodies[i].m);
  }
  return out;
}

}  // namespace curvedbody
