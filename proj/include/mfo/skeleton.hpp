#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mfo {

struct SkeletonJoint {
  std::string name;
  int parent = -1;  // -1: attached to the base frame
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // meters, in parent frame
  bool key = false;
  bool left_wrist = false;
  bool right_wrist = false;
};

// Kinematic tree of rotational joints hanging off a floating base. Joints
// are stored in topological order (every parent precedes its children).
//
// Flattened human state layout:
//   [ base_pos(3) | base_rot(3) | joint_0(3) | ... | joint_{J-1}(3) ]
class Skeleton {
 public:
  Skeleton() = default;
  explicit Skeleton(std::vector<SkeletonJoint> joints, std::string name = "custom");

  // The 20-joint skeleton (66-dimensional state) shipped with the library.
  static Skeleton default_human();

  static Skeleton load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  static Skeleton from_json_text(std::string_view text);
  std::string to_json_text() const;

  const std::string& name() const { return name_; }
  int joint_count() const { return static_cast<int>(joints_.size()); }
  int state_dim() const { return 6 + 3 * joint_count(); }
  const SkeletonJoint& joint(int i) const { return joints_.at(static_cast<size_t>(i)); }
  const std::vector<SkeletonJoint>& joints() const { return joints_; }
  const std::vector<int>& key_joints() const { return key_joints_; }

  int index_of(std::string_view joint_name) const;
  // Accepts "left_wrist"/"right_wrist" (by flag) or any joint name.
  int end_effector(std::string_view selector) const;

  // Offset of the rotation components of joint i inside the flat state.
  static constexpr int rotation_offset(int joint) { return 6 + 3 * joint; }

 private:
  std::string name_ = "custom";
  std::vector<SkeletonJoint> joints_;
  std::vector<int> key_joints_;
};

}  // namespace mfo
