#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace curvedbody {

template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Point4 = Vec4<double>;
using Mat2 = Matrix2<double>;

/// Sign of the Gaussian curvature: +1 is the unit 3-sphere, -1 the upper
/// sheet of the hyperboloid x1^2+x2^2+x3^2-x4^2 = -1.
class CurvatureSign {
 public:
  static constexpr CurvatureSign positive() { return CurvatureSign(1); }
  static constexpr CurvatureSign negative() { return CurvatureSign(-1); }

  static CurvatureSign from_int(int s) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("curvature sign must be +1 or -1, got " + std::to_string(s));
    }
    return CurvatureSign(s);
  }

  constexpr int value() const { return s_; }
  constexpr double as_double() const { return static_cast<double>(s_); }

  friend constexpr bool operator==(CurvatureSign, CurvatureSign) = default;

 private:
  constexpr explicit CurvatureSign(int s) : s_(s) {}
  int s_;
};

/// a1 b1 + a2 b2 + a3 b3 + sigma a4 b4.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sigma_dot(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b, CurvatureSign s) {
  using Scalar = typename DerivedA::Scalar;
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2) + Scalar(s.value()) * a(3) * b(3);
}

/// q (.) q - sigma; zero exactly on the manifold.
template <typename Derived>
typename Derived::Scalar constraint_residual(const Eigen::MatrixBase<Derived>& q, CurvatureSign s) {
  using Scalar = typename Derived::Scalar;
  return sigma_dot(q, q, s) - Scalar(s.value());
}

/// q counts as on the manifold when |q.q - sigma| <= kTangentPrecondition *
/// max(1, |q|^2); far out on the hyperboloid q.q is a difference of large
/// squares.
inline constexpr double kTangentPrecondition = 1e-6;

/// Removes the component of v normal to the manifold at q, so that
/// sigma_dot(q, result) == 0.
template <typename Scalar>
Vec4<Scalar> tangent_project(const Vec4<Scalar>& q, const Vec4<Scalar>& v, CurvatureSign s) {
  using std::abs;
  using std::max;
  const Scalar scale = max(Scalar(1), q.squaredNorm());
  if (!(abs(constraint_residual(q, s)) <= Scalar(kTangentPrecondition) * scale)) {
    throw std::invalid_argument("tangent_project: base point is not on the manifold");
  }
  return v - Scalar(s.value()) * sigma_dot(q, v, s) * q;
}

/// [[cos x, -sin x], [sin x, cos x]]
template <typename Scalar = double>
Matrix2<Scalar> rotation2(Scalar x) {
  using std::cos;
  using std::sin;
  Matrix2<Scalar> m;
  m << cos(x), -sin(x), sin(x), cos(x);
  return m;
}

/// [[cosh x, sinh x], [sinh x, cosh x]]; the inverse of boost2(x) is boost2(-x).
template <typename Scalar = double>
Matrix2<Scalar> boost2(Scalar x) {
  using std::cosh;
  using std::sinh;
  Matrix2<Scalar> m;
  m << cosh(x), sinh(x), sinh(x), cosh(x);
  return m;
}

}  // namespace curvedbody
