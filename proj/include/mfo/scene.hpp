#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mfo {

struct Sphere {
  Eigen::Vector3d center;
  double radius;
};

struct Box {  // axis aligned
  Eigen::Vector3d center;
  Eigen::Vector3d half_extents;
};

struct HalfSpace {  // solid on the side opposite to the normal
  Eigen::Vector3d point;
  Eigen::Vector3d normal;
};

using SdfPrimitive = std::variant<Sphere, Box, HalfSpace>;

// Union of analytic primitives. Distances are negative inside, positive
// outside. An empty scene reports +infinity everywhere with zero gradient.
class Scene {
 public:
  Scene() = default;
  explicit Scene(std::vector<SdfPrimitive> primitives);

  void add(SdfPrimitive p);
  const std::vector<SdfPrimitive>& primitives() const { return primitives_; }
  bool empty() const { return primitives_.empty(); }

  double distance(const Eigen::Vector3d& p) const;
  // Gradient of the active (smallest-distance, lowest-index on ties) primitive.
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const;
  double distance(const Eigen::Vector3d& p, Eigen::Vector3d* grad) const;

  static Scene load(const std::filesystem::path& path);
  static Scene from_json_text(std::string_view text);
  std::string to_json_text() const;

 private:
  std::vector<SdfPrimitive> primitives_;
};

double primitive_distance(const SdfPrimitive& prim, const Eigen::Vector3d& p, Eigen::Vector3d* grad);
void validate(const SdfPrimitive& prim);

inline double sdf_eval(const Scene& scene, const Eigen::Vector3d& p) { return scene.distance(p); }
inline Eigen::Vector3d sdf_gradient(const Scene& scene, const Eigen::Vector3d& p) { return scene.gradient(p); }

}  // namespace mfo
