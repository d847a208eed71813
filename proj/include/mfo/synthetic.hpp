#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>

#include "mfo/dataio.hpp"
#include "mfo/skeleton.hpp"

namespace mfo {

enum class SyntheticKind { kReaching, kWalking, kReachingWithObstacle };

const char* synthetic_kind_name(SyntheticKind k);
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kReaching;
  int count = 20;
  double duration = 3.0;  // seconds
  double frame_rate = 30.0;
  // Start positions of the base are drawn from this xy rectangle.
  Eigen::Vector2d workspace_min{-2.0, -2.0};
  Eigen::Vector2d workspace_max{2.0, 2.0};
  std::uint64_t seed = 0;

  void validate() const;
};

// Reaching: minimum-jerk interpolation between a rest pose and a random reach
// pose with the right arm. Walking: sinusoidal gait along a slowly turning
// heading. Obstacle: a walk that detours around a sphere on the straight
// path, then a reach; the sphere is stored as the trajectory's scene.
//
// Uses the joint names of the default skeleton; joints the skeleton lacks
// are left at rest.
Dataset generate_synthetic(const SyntheticSpec& spec, const Skeleton& skel);

// 10 t^3 - 15 t^4 + 6 t^5 on [0, 1], clamped outside.
double minimum_jerk(double t);

}  // namespace mfo
