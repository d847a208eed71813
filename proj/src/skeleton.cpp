#include "mfo/skeleton.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfo/errors.hpp"

namespace mfo {

using nlohmann::json;

Skeleton::Skeleton(std::vector<SkeletonJoint> joints, std::string name)
    : name_(std::move(name)), joints_(std::move(joints)) {
  if (joints_.empty()) throw ConfigError("skeleton: no joints");
  for (int i = 0; i < joint_count(); ++i) {
    const auto& j = joints_[static_cast<size_t>(i)];
    if (j.parent < -1 || j.parent >= i) {
      throw ConfigError("skeleton: joint '" + j.name + "' must come after its parent");
    }
    if (!j.offset.allFinite()) throw ConfigError("skeleton: non-finite offset for '" + j.name + "'");
    for (int k = 0; k < i; ++k) {
      if (joints_[static_cast<size_t>(k)].name == j.name) {
        throw ConfigError("skeleton: duplicate joint name '" + j.name + "'");
      }
    }
    if (j.key) key_joints_.push_back(i);
  }
}

Skeleton Skeleton::default_human() {
  // Averaged adult proportions; z up, x forward, y to the left. The base
  // sits at the pelvis, 0.95 m above the floor when standing.
  std::vector<SkeletonJoint> j;
  auto add = [&](std::string name, int parent, Eigen::Vector3d off) {
    SkeletonJoint sj;
    sj.name = std::move(name);
    sj.parent = parent;
    sj.offset = off;
    j.push_back(sj);
    return static_cast<int>(j.size()) - 1;
  };
  const int pelvis = add("pelvis", -1, {0, 0, 0});
  for (double side : {1.0, -1.0}) {
    const std::string p = side > 0 ? "left_" : "right_";
    const int hip = add(p + "hip", pelvis, {0, 0.10 * side, -0.06});
    const int knee = add(p + "knee", hip, {0, 0, -0.42});
    const int ankle = add(p + "ankle", knee, {0, 0, -0.41});
    add(p + "toe", ankle, {0.14, 0, -0.06});
  }
  const int torso = add("torso", pelvis, {0, 0, 0.12});
  const int neck = add("neck", torso, {0, 0, 0.42});
  add("head", neck, {0, 0, 0.12});
  for (double side : {1.0, -1.0}) {
    const std::string p = side > 0 ? "left_" : "right_";
    const int inner = add(p + "inner_shoulder", torso, {0, 0.04 * side, 0.38});
    const int shoulder = add(p + "shoulder", inner, {0, 0.15 * side, 0});
    const int elbow = add(p + "elbow", shoulder, {0, 0, -0.29});
    add(p + "wrist", elbow, {0, 0, -0.26});
  }
  for (auto& sj : j) {
    const auto& n = sj.name;
    sj.key = n == "pelvis" || n.ends_with("knee") || n.ends_with("ankle") ||
             n.ends_with("elbow") || n.ends_with("wrist");
    sj.left_wrist = n == "left_wrist";
    sj.right_wrist = n == "right_wrist";
  }
  return Skeleton(std::move(j), "default-human-20");
}

int Skeleton::index_of(std::string_view joint_name) const {
  for (int i = 0; i < joint_count(); ++i) {
    if (joints_[static_cast<size_t>(i)].name == joint_name) return i;
  }
  throw ConfigError("skeleton: unknown joint '" + std::string(joint_name) + "'");
}

int Skeleton::end_effector(std::string_view selector) const {
  for (int i = 0; i < joint_count(); ++i) {
    const auto& j = joints_[static_cast<size_t>(i)];
    if ((selector == "left_wrist" && j.left_wrist) || (selector == "right_wrist" && j.right_wrist)) {
      return i;
    }
  }
  return index_of(selector);
}

Skeleton Skeleton::from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("skeleton: ") + e.what());
  }
  try {
    std::vector<SkeletonJoint> joints;
    for (const auto& jj : doc.at("joints")) {
      SkeletonJoint sj;
      sj.name = jj.at("name").get<std::string>();
      const auto& parent = jj.at("parent");
      if (parent.is_null() || parent.get<std::string>() == "base") {
        sj.parent = -1;
      } else {
        const auto pname = parent.get<std::string>();
        sj.parent = -2;
        for (size_t k = 0; k < joints.size(); ++k) {
          if (joints[k].name == pname) sj.parent = static_cast<int>(k);
        }
        if (sj.parent == -2) {
          throw ConfigError("skeleton: parent '" + pname + "' of '" + sj.name +
                            "' is not listed before it");
        }
      }
      const auto off = jj.at("offset").get<std::vector<double>>();
      if (off.size() != 3) throw FormatError("skeleton: offset of '" + sj.name + "' needs 3 values");
      sj.offset = Eigen::Vector3d(off[0], off[1], off[2]);
      for (const auto& flag : jj.value("flags", std::vector<std::string>{})) {
        if (flag == "key") sj.key = true;
        else if (flag == "left_wrist") sj.left_wrist = true;
        else if (flag == "right_wrist") sj.right_wrist = true;
        else throw FormatError("skeleton: unknown flag '" + flag + "'");
      }
      joints.push_back(std::move(sj));
    }
    return Skeleton(std::move(joints), doc.value("name", std::string("custom")));
  } catch (const json::exception& e) {
    throw FormatError(std::string("skeleton: ") + e.what());
  }
}

std::string Skeleton::to_json_text() const {
  json doc;
  doc["name"] = name_;
  doc["joints"] = json::array();
  for (const auto& j : joints_) {
    json jj;
    jj["name"] = j.name;
    jj["parent"] = j.parent < 0 ? json("base") : json(joints_[static_cast<size_t>(j.parent)].name);
    jj["offset"] = {j.offset.x(), j.offset.y(), j.offset.z()};
    std::vector<std::string> flags;
    if (j.key) flags.emplace_back("key");
    if (j.left_wrist) flags.emplace_back("left_wrist");
    if (j.right_wrist) flags.emplace_back("right_wrist");
    jj["flags"] = flags;
    doc["joints"].push_back(jj);
  }
  return doc.dump(2) + "\n";
}

Skeleton Skeleton::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open skeleton file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void Skeleton::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write skeleton file " + path.string());
  out << to_json_text();
}

}  // namespace mfo
