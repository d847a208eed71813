#include "mfo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mfo/errors.hpp"
#include "mfo/kinematics.hpp"

namespace mfo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPelvisHeight = 0.95;
constexpr double kStepLength = 0.7;  // meters per step

class Poser {
 public:
  Poser(const Skeleton& skel, Eigen::Index frames) : skel_(skel), states_(Eigen::MatrixXd::Zero(skel.state_dim(), frames)) {}

  void set(Eigen::Index t, const char* joint, const Eigen::Vector3d& v) {
    const int j = find(joint);
    if (j >= 0) states_.col(t).segment<3>(Skeleton::rotation_offset(j)) = v;
  }
  void base(Eigen::Index t, const Eigen::Vector3d& pos, double heading) {
    states_.col(t).head<3>() = pos;
    states_.col(t).segment<3>(3) = Eigen::Vector3d(0, 0, heading);
  }
  Eigen::MatrixXd take() {
    unwrap_rotation_block(states_.middleRows<3>(3));
    return std::move(states_);
  }

 private:
  int find(const char* name) const {
    for (int j = 0; j < skel_.joint_count(); ++j) {
      if (skel_.joint(j).name == name) return j;
    }
    return -1;
  }
  const Skeleton& skel_;
  Eigen::MatrixXd states_;
};

struct Rng {
  std::mt19937_64 engine;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  bool coin() { return uniform(0, 1) < 0.5; }
};

Eigen::Vector3d lerp(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double s) { return a + s * (b - a); }

struct ArmReach {
  Eigen::Vector3d shoulder, elbow, wrist, torso, left_shoulder;
  double lean_forward, crouch;
};

ArmReach random_reach(Rng& rng) {
  ArmReach r;
  r.shoulder = {rng.uniform(-0.35, 0.2), rng.uniform(-1.7, -0.6), rng.uniform(-0.3, 0.3)};
  r.elbow = {0, rng.uniform(-1.3, -0.1), 0};
  r.wrist = {0, rng.uniform(-0.3, 0.3), 0};
  r.torso = {0, rng.uniform(0.0, 0.35), rng.uniform(-0.3, 0.3)};
  r.left_shoulder = {0, rng.uniform(-0.2, 0.1), 0};
  r.lean_forward = rng.uniform(0.0, 0.12);
  r.crouch = rng.uniform(0.0, 0.05);
  return r;
}

void pose_arm(Poser& p, Eigen::Index t, const ArmReach& reach, double s) {
  const Eigen::Vector3d rest_elbow(0, -0.15, 0);
  p.set(t, "right_shoulder", s * reach.shoulder);
  p.set(t, "right_elbow", lerp(rest_elbow, reach.elbow, s));
  p.set(t, "right_wrist", s * reach.wrist);
  p.set(t, "torso", s * reach.torso);
  p.set(t, "left_shoulder", s * reach.left_shoulder);
  p.set(t, "left_elbow", rest_elbow);
}

void pose_gait(Poser& p, Eigen::Index t, double phase, double amplitude) {
  const double a = amplitude;
  const double sp = std::sin(phase);
  p.set(t, "left_hip", {0, -0.35 * a * sp, 0});
  p.set(t, "right_hip", {0, 0.35 * a * sp, 0});
  p.set(t, "left_knee", {0, a * (0.15 + 0.25 * (0.5 + 0.5 * std::sin(phase + 2.0))), 0});
  p.set(t, "right_knee", {0, a * (0.15 + 0.25 * (0.5 + 0.5 * std::sin(phase + kPi + 2.0))), 0});
  p.set(t, "left_ankle", {0, 0.1 * a * std::sin(phase + 1.0), 0});
  p.set(t, "right_ankle", {0, 0.1 * a * std::sin(phase + kPi + 1.0), 0});
  p.set(t, "left_shoulder", {0, 0.3 * a * sp, 0});
  p.set(t, "right_shoulder", {0, -0.3 * a * sp, 0});
  p.set(t, "left_elbow", {0, -0.3, 0});
  p.set(t, "right_elbow", {0, -0.3, 0});
  p.set(t, "torso", {0, 0.03 * a, 0.05 * a * sp});
}

Eigen::Vector3d random_start(const SyntheticSpec& spec, Rng& rng) {
  return {rng.uniform(spec.workspace_min.x(), spec.workspace_max.x()),
          rng.uniform(spec.workspace_min.y(), spec.workspace_max.y()), kPelvisHeight};
}

Eigen::MatrixXd reaching(const SyntheticSpec& spec, const Skeleton& skel, Eigen::Index frames, Rng& rng) {
  Poser p(skel, frames);
  const Eigen::Vector3d start = random_start(spec, rng);
  const double heading = rng.uniform(-kPi, kPi);
  const Eigen::Vector3d fwd(std::cos(heading), std::sin(heading), 0);
  const ArmReach reach = random_reach(rng);
  const double move = std::min(rng.uniform(0.9, 1.5), 0.7 * spec.duration);
  const double t0 = rng.uniform(0.15 * spec.duration, std::max(0.15 * spec.duration, spec.duration - move - 0.3));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double s = minimum_jerk((static_cast<double>(t) / spec.frame_rate - t0) / move);
    p.base(t, start + s * (reach.lean_forward * fwd - Eigen::Vector3d(0, 0, reach.crouch)), heading);
    pose_arm(p, t, reach, s);
  }
  return p.take();
}

Eigen::MatrixXd walking(const SyntheticSpec& spec, const Skeleton& skel, Eigen::Index frames, Rng& rng) {
  Poser p(skel, frames);
  const Eigen::Vector3d start = random_start(spec, rng);
  const double heading0 = rng.uniform(-kPi, kPi);
  const double turn = rng.uniform(-0.25, 0.25);  // rad/s
  const double speed = rng.uniform(0.8, 1.4);
  const double phase0 = rng.uniform(0, 2 * kPi);
  const double cycle_rate = speed / (2 * kStepLength);  // gait cycles per second
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double time = static_cast<double>(t) / spec.frame_rate;
    const double heading = heading0 + turn * time;
    Eigen::Vector3d pos = start;
    if (std::abs(turn) > 1e-9) {
      pos.x() += speed / turn * (std::sin(heading) - std::sin(heading0));
      pos.y() -= speed / turn * (std::cos(heading) - std::cos(heading0));
    } else {
      pos.x() += speed * time * std::cos(heading0);
      pos.y() += speed * time * std::sin(heading0);
    }
    const double phase = phase0 + 2 * kPi * cycle_rate * time;
    pos.z() += -0.02 + 0.02 * std::cos(2 * phase);
    p.base(t, pos, heading);
    pose_gait(p, t, phase, speed / 1.1);
  }
  return p.take();
}

Eigen::MatrixXd obstacle_walk(const SyntheticSpec& spec, const Skeleton& skel, Eigen::Index frames, Rng& rng,
                              Scene& scene) {
  Poser p(skel, frames);
  const Eigen::Vector3d start = random_start(spec, rng);
  const double heading = rng.uniform(-kPi, kPi);
  const Eigen::Vector3d fwd(std::cos(heading), std::sin(heading), 0), left(-std::sin(heading), std::cos(heading), 0);
  const double speed = rng.uniform(0.7, 1.0);
  const double walk_time = spec.duration - 0.8;
  const double radius = rng.uniform(0.2, 0.35);
  const double side = rng.coin() ? 1.0 : -1.0;
  const double detour = radius + 0.3;
  const double decel = std::min(0.5, 0.5 * walk_time);

  // Arc length along the nominal line; constant speed with a smooth stop.
  std::vector<double> arc(static_cast<size_t>(frames), 0.0);
  for (Eigen::Index t = 1; t < frames; ++t) {
    const double time = static_cast<double>(t) / spec.frame_rate;
    const double slow = 1.0 - minimum_jerk((time - (walk_time - decel)) / decel);
    arc[static_cast<size_t>(t)] = arc[static_cast<size_t>(t) - 1] + speed * slow / spec.frame_rate;
  }
  const double length = arc.back();
  scene.add(Sphere{start + 0.5 * length * fwd + Eigen::Vector3d(0, 0, 0.5 - kPelvisHeight), radius});

  const ArmReach reach = random_reach(rng);
  const double reach_start = walk_time - 0.2;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double time = static_cast<double>(t) / spec.frame_rate;
    const double s = arc[static_cast<size_t>(t)];
    const double u = s / length;
    const double lateral = side * detour * std::pow(std::sin(kPi * u), 2);
    const double slope = side * detour * kPi / length * std::sin(2 * kPi * u);
    const double phase = 2 * kPi * s / (2 * kStepLength);
    const double amp = std::clamp(speed * (1.0 - minimum_jerk((time - (walk_time - decel)) / decel)) / 1.1, 0.0, 1.0);
    Eigen::Vector3d pos = start + s * fwd + lateral * left;
    pos.z() += amp * (-0.02 + 0.02 * std::cos(2 * phase));
    p.base(t, pos, heading + std::atan(slope));
    pose_gait(p, t, phase, amp);
    const double r = minimum_jerk((time - reach_start) / 0.8);
    if (r > 0) {
      p.set(t, "right_shoulder", r * reach.shoulder);
      p.set(t, "right_elbow", lerp({0, -0.3, 0}, reach.elbow, r));
      p.set(t, "right_wrist", r * reach.wrist);
    }
  }
  return p.take();
}

}  // namespace

double minimum_jerk(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

const char* synthetic_kind_name(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kReaching: return "reaching";
    case SyntheticKind::kWalking: return "walking";
    case SyntheticKind::kReachingWithObstacle: return "reaching-with-obstacle";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "reaching") return SyntheticKind::kReaching;
  if (name == "walking") return SyntheticKind::kWalking;
  if (name == "reaching-with-obstacle") return SyntheticKind::kReachingWithObstacle;
  throw ConfigError("synth: unknown generator kind '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  if (count < 0) throw ConfigError("synth: count must be >= 0");
  if (!(frame_rate > 0)) throw ConfigError("synth: frame_rate must be > 0");
  if (!(duration * frame_rate >= 2)) throw ConfigError("synth: duration must cover at least 2 frames");
  if (kind == SyntheticKind::kReachingWithObstacle && duration < 2.0) {
    throw ConfigError("synth: obstacle scenes need a duration of at least 2 s");
  }
  if (!workspace_min.allFinite() || !workspace_max.allFinite() || !(workspace_max.x() > workspace_min.x()) ||
      !(workspace_max.y() > workspace_min.y())) {
    throw ConfigError("synth: degenerate workspace bounds");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec, const Skeleton& skel) {
  spec.validate();
  Dataset data;
  data.kind = synthetic_kind_name(spec.kind);
  data.seed = spec.seed;
  data.frame_rate = spec.frame_rate;
  data.skeleton = skel.name();
  const auto frames = static_cast<Eigen::Index>(std::lround(spec.duration * spec.frame_rate));
  for (int i = 0; i < spec.count; ++i) {
    // Per-sample seeds keep every trajectory independent of the others.
    Rng rng{std::mt19937_64(spec.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i) + 1)};
    std::optional<Scene> scene;
    Eigen::MatrixXd states;
    switch (spec.kind) {
      case SyntheticKind::kReaching: states = reaching(spec, skel, frames, rng); break;
      case SyntheticKind::kWalking: states = walking(spec, skel, frames, rng); break;
      case SyntheticKind::kReachingWithObstacle:
        scene.emplace();
        states = obstacle_walk(spec, skel, frames, rng, *scene);
        break;
    }
    data.trajectories.emplace_back(spec.frame_rate, Layout::kHuman, std::move(states));
    data.scenes.push_back(std::move(scene));
  }
  return data;
}

}  // namespace mfo
