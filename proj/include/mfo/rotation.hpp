#pragma once

// Rotation representations: exponential map (axis * angle) and unit
// quaternions, plus the derivatives the optimizer and trainer need.
//
// All functions are templated on the scalar type and accept Eigen
// expressions, so `rotation_matrix(state.segment<3>(3))` works without a copy.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>

#include "mfo/errors.hpp"

namespace mfo {

template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Quat = Eigen::Quaternion<S>;

namespace detail {

// Below this angle the closed forms lose precision and the Taylor series
// (truncated after the theta^4 term) is exact to machine precision.
template <typename S>
constexpr S kSeriesAngle = S(1e-2);

template <typename S>
Mat3<S> skew(const Vec3<S>& v) {
  Mat3<S> k;
  k << S(0), -v.z(), v.y(),
       v.z(), S(0), -v.x(),
      -v.y(), v.x(), S(0);
  return k;
}

// sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3 evaluated stably.
template <typename S>
struct RodriguesCoefficients {
  S a, b, c;
  explicit RodriguesCoefficients(S theta) {
    const S t2 = theta * theta;
    if (theta < kSeriesAngle<S>) {
      a = S(1) - t2 / S(6) + t2 * t2 / S(120);
      b = S(0.5) - t2 / S(24) + t2 * t2 / S(720);
      c = S(1) / S(6) - t2 / S(120) + t2 * t2 / S(5040);
    } else {
      const S s = std::sin(theta);
      a = s / theta;
      b = (S(1) - std::cos(theta)) / t2;
      c = (theta - s) / (t2 * theta);
    }
  }
};

}  // namespace detail

// A rotation of angle |v| about v/|v|. Construction wraps the vector into
// the canonical ball |v| <= pi.
template <typename S>
class ExpMap {
 public:
  ExpMap() : v_(Vec3<S>::Zero()) {}
  template <typename Derived>
  explicit ExpMap(const Eigen::MatrixBase<Derived>& v) : v_(canonicalize(v)) {}
  ExpMap(S x, S y, S z) : ExpMap(Vec3<S>(x, y, z)) {}

  const Vec3<S>& vector() const { return v_; }
  S angle() const { return v_.norm(); }

  static Vec3<S> canonicalize(const Vec3<S>& v) {
    constexpr S pi = std::numbers::pi_v<S>;
    const S theta = v.norm();
    if (theta <= pi) return v;
    S wrapped = std::fmod(theta, S(2) * pi);
    if (wrapped > pi) wrapped -= S(2) * pi;
    return v * (wrapped / theta);
  }

 private:
  Vec3<S> v_;
};

template <typename Derived>
Mat3<typename Derived::Scalar> rotation_matrix(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Vec3<S> w = v;
  const detail::RodriguesCoefficients<S> k(w.norm());
  const Mat3<S> K = detail::skew(w);
  return Mat3<S>::Identity() + k.a * K + k.b * K * K;
}

// Right Jacobian of SO(3): R(v + dv) ~= R(v) * Exp(J_r(v) dv).
template <typename Derived>
Mat3<typename Derived::Scalar> right_jacobian(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Vec3<S> w = v;
  const detail::RodriguesCoefficients<S> k(w.norm());
  const Mat3<S> K = detail::skew(w);
  return Mat3<S>::Identity() - k.b * K + k.c * K * K;
}

// d(R(v) u)/dv, a 3x3 matrix.
template <typename DerivedV, typename DerivedU>
Mat3<typename DerivedV::Scalar> rotate_jacobian(const Eigen::MatrixBase<DerivedV>& v,
                                                const Eigen::MatrixBase<DerivedU>& u) {
  using S = typename DerivedV::Scalar;
  const Vec3<S> uu = u;
  return -rotation_matrix(v) * detail::skew(uu) * right_jacobian(v);
}

template <typename Derived>
Quat<typename Derived::Scalar> expmap_to_quat(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Vec3<S> w = v;
  const S theta = w.norm();
  S k;  // sin(theta/2) / theta
  if (theta < detail::kSeriesAngle<S>) {
    const S t2 = theta * theta;
    k = S(0.5) - t2 / S(48) + t2 * t2 / S(3840);
  } else {
    k = std::sin(theta / S(2)) / theta;
  }
  const Vec3<S> xyz = k * w;
  return Quat<S>(std::cos(theta / S(2)), xyz.x(), xyz.y(), xyz.z());
}

template <typename S>
Quat<S> expmap_to_quat(const ExpMap<S>& e) {
  return expmap_to_quat(e.vector());
}

// Jacobian of the (w, x, y, z) quaternion components w.r.t. the exponential
// map, a 4x3 matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 3> expmap_to_quat_jacobian(
    const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Vec3<S> w = v;
  const S theta = w.norm();
  S k, dk;  // k = sin(theta/2)/theta, dk = (dk/dtheta)/theta
  if (theta < detail::kSeriesAngle<S>) {
    const S t2 = theta * theta;
    k = S(0.5) - t2 / S(48) + t2 * t2 / S(3840);
    dk = S(-1) / S(24) + t2 / S(960) - t2 * t2 / S(107520);
  } else {
    const S s = std::sin(theta / S(2));
    const S c = std::cos(theta / S(2));
    k = s / theta;
    dk = (theta * c / S(2) - s) / (theta * theta * theta);
  }
  Eigen::Matrix<S, 4, 3> jac;
  jac.row(0) = -(k / S(2)) * w.transpose();
  jac.template bottomRows<3>() = k * Mat3<S>::Identity() + dk * w * w.transpose();
  return jac;
}

// Inverse of expmap_to_quat. The result lies in the canonical ball.
template <typename S>
ExpMap<S> quat_to_expmap(const Quat<S>& q_in) {
  using std::abs;
  const S n = q_in.norm();
  if (!(abs(n - S(1)) <= S(1e-6))) {
    throw NumericError("quat_to_expmap: quaternion is not unit norm");
  }
  Eigen::Matrix<S, 4, 1> q(q_in.w(), q_in.x(), q_in.y(), q_in.z());
  q /= n;
  if (q[0] < S(0)) q = -q;
  const Vec3<S> xyz = q.template tail<3>();
  const S s = xyz.norm();
  if (s <= std::numeric_limits<S>::min()) return ExpMap<S>(Vec3<S>(xyz * (S(2) / q[0])));
  const S theta = S(2) * std::atan2(s, q[0]);
  return ExpMap<S>(Vec3<S>(xyz * (theta / s)));
}

// min(|a - b|, |a + b|): the distance between two rotations that does not
// care which of the two antipodal quaternions represents them.
template <typename S>
S quat_loss_pair(const Quat<S>& a, const Quat<S>& b) {
  const S minus = (a.coeffs() - b.coeffs()).norm();
  const S plus = (a.coeffs() + b.coeffs()).norm();
  return std::min(minus, plus);
}

}  // namespace mfo
