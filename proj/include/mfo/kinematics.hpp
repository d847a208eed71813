#pragma once

#include <Eigen/Core>

#include <vector>

#include "mfo/errors.hpp"
#include "mfo/rotation.hpp"
#include "mfo/skeleton.hpp"
#include "mfo/trajectory.hpp"

namespace mfo {

template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Mat3X = Eigen::Matrix<S, 3, Eigen::Dynamic>;

// Structured view of one flattened human frame. Rotations are canonicalized
// on construction, so flatten(unflatten(x)) == x only for canonical input.
template <typename S>
struct HumanState {
  Vec3<S> base_pos = Vec3<S>::Zero();
  ExpMap<S> base_rot;
  std::vector<ExpMap<S>> joints;

  HumanState() = default;
  explicit HumanState(int joint_count) : joints(static_cast<size_t>(joint_count)) {}

  int dim() const { return 6 + 3 * static_cast<int>(joints.size()); }

  VecX<S> flatten() const {
    VecX<S> x(dim());
    x.template head<3>() = base_pos;
    x.template segment<3>(3) = base_rot.vector();
    for (size_t j = 0; j < joints.size(); ++j) {
      x.template segment<3>(Skeleton::rotation_offset(static_cast<int>(j))) = joints[j].vector();
    }
    return x;
  }

  template <typename Derived>
  static HumanState unflatten(const Eigen::MatrixBase<Derived>& x) {
    if (x.size() < 6 || (x.size() - 6) % 3 != 0) {
      throw DimensionError("human state: dimension must be 6 + 3J");
    }
    HumanState s(static_cast<int>((x.size() - 6) / 3));
    s.base_pos = x.template head<3>();
    s.base_rot = ExpMap<S>(Vec3<S>(x.template segment<3>(3)));
    for (size_t j = 0; j < s.joints.size(); ++j) {
      s.joints[j] = ExpMap<S>(Vec3<S>(x.template segment<3>(Skeleton::rotation_offset(static_cast<int>(j)))));
    }
    return s;
  }
};

namespace detail {

inline void check_state_dim(const Skeleton& skel, Eigen::Index n) {
  if (n != skel.state_dim()) {
    throw DimensionError("state dimension " + std::to_string(n) + " does not match skeleton (" +
                         std::to_string(skel.state_dim()) + ")");
  }
}

}  // namespace detail

// World position of every joint (column j is joint j).
template <typename Derived>
Mat3X<typename Derived::Scalar> forward_kinematics(const Skeleton& skel,
                                                   const Eigen::MatrixBase<Derived>& state) {
  using S = typename Derived::Scalar;
  detail::check_state_dim(skel, state.size());
  const int n = skel.joint_count();
  Mat3X<S> pos(3, n);
  std::vector<Mat3<S>> global(static_cast<size_t>(n));
  const Vec3<S> base = state.template head<3>();
  const Mat3<S> base_rot = rotation_matrix(state.template segment<3>(3));
  for (int j = 0; j < n; ++j) {
    const auto& joint = skel.joint(j);
    const Mat3<S>& parent_rot = joint.parent < 0 ? base_rot : global[static_cast<size_t>(joint.parent)];
    const Vec3<S> parent_pos = joint.parent < 0 ? base : Vec3<S>(pos.col(joint.parent));
    pos.col(j) = parent_pos + parent_rot * joint.offset.cast<S>();
    global[static_cast<size_t>(j)] =
        parent_rot * rotation_matrix(state.template segment<3>(Skeleton::rotation_offset(j)));
  }
  return pos;
}

template <typename S>
Mat3X<S> forward_kinematics(const Skeleton& skel, const HumanState<S>& s) {
  return forward_kinematics(skel, s.flatten());
}

// Position of a single joint together with its 3 x D Jacobian w.r.t. the
// flattened state.
template <typename S>
struct JointPositionJacobian {
  Vec3<S> position;
  Eigen::Matrix<S, 3, Eigen::Dynamic> jacobian;
};

template <typename Derived>
JointPositionJacobian<typename Derived::Scalar> joint_position_jacobian(
    const Skeleton& skel, const Eigen::MatrixBase<Derived>& state, int target) {
  using S = typename Derived::Scalar;
  detail::check_state_dim(skel, state.size());
  if (target < 0 || target >= skel.joint_count()) throw DimensionError("joint index out of range");

  std::vector<int> chain;  // target ... root
  for (int j = target; j >= 0; j = skel.joint(j).parent) chain.push_back(j);

  // Global orientation of every joint on the chain, root first.
  std::vector<Mat3<S>> global(chain.size());
  const Mat3<S> base_rot = rotation_matrix(state.template segment<3>(3));
  for (size_t k = chain.size(); k-- > 0;) {
    const Mat3<S>& parent_rot = (k + 1 == chain.size()) ? base_rot : global[k + 1];
    global[k] = parent_rot * rotation_matrix(state.template segment<3>(Skeleton::rotation_offset(chain[k])));
  }

  JointPositionJacobian<S> out;
  out.jacobian.setZero(3, state.size());
  out.jacobian.template leftCols<3>().setIdentity();

  // Walk from the target towards the root keeping w = target - joint in the
  // joint's own (rotated) frame.
  Vec3<S> w = Vec3<S>::Zero();
  for (size_t k = 0; k < chain.size(); ++k) {
    const int j = chain[k];
    const auto v = state.template segment<3>(Skeleton::rotation_offset(j));
    const Mat3<S>& parent_rot = (k + 1 == chain.size()) ? base_rot : global[k + 1];
    out.jacobian.template middleCols<3>(Skeleton::rotation_offset(j)) = parent_rot * rotate_jacobian(v, w);
    w = skel.joint(j).offset.cast<S>() + rotation_matrix(v) * w;
  }
  out.jacobian.template middleCols<3>(3) = rotate_jacobian(state.template segment<3>(3), w);
  out.position = state.template head<3>() + base_rot * w;
  return out;
}

// Backward differences v_t = s_t - s_{t-1}; the first column copies v_1.
// Rotation coordinates are differenced directly in exponential-map space.
template <typename Derived>
MatX<typename Derived::Scalar> finite_difference_velocities(const Eigen::MatrixBase<Derived>& states) {
  using S = typename Derived::Scalar;
  if (states.cols() < 2) throw DimensionError("finite differences need at least 2 frames");
  MatX<S> vel(states.rows(), states.cols());
  vel.rightCols(states.cols() - 1) = states.rightCols(states.cols() - 1) - states.leftCols(states.cols() - 1);
  vel.col(0) = vel.col(1);
  return vel;
}

inline Eigen::MatrixXd finite_difference_velocities(const Trajectory& traj) {
  return finite_difference_velocities(traj.states);
}

// Re-express each rotation block so consecutive frames are as close as
// possible (v versus the equivalent v - 2*pi*v/|v|). Keeps finite
// differences small across the +-pi seam.
template <typename Derived>
void unwrap_rotation_block(const Eigen::MatrixBase<Derived>& rows3_) {
  using S = typename Derived::Scalar;
  auto& rows3 = const_cast<Eigen::MatrixBase<Derived>&>(rows3_);  // Eigen's writable-block idiom
  constexpr S two_pi = S(2) * std::numbers::pi_v<S>;
  for (Eigen::Index t = 1; t < rows3.cols(); ++t) {
    const Vec3<S> prev = rows3.col(t - 1);
    const Vec3<S> cur = rows3.col(t);
    const S theta = cur.norm();
    if (theta <= S(0)) continue;
    const Vec3<S> axis = cur / theta;
    Vec3<S> best = cur;
    for (int k = -2; k <= 2; ++k) {
      const Vec3<S> cand = axis * (theta + S(k) * two_pi);
      if ((cand - prev).squaredNorm() < (best - prev).squaredNorm()) best = cand;
    }
    rows3.col(t) = best;
  }
}

}  // namespace mfo
