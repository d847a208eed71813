#include "mfo/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfo/errors.hpp"

namespace mfo {

using nlohmann::json;

namespace {

struct DistanceVisitor {
  const Eigen::Vector3d& p;
  Eigen::Vector3d* grad;

  double operator()(const Sphere& s) const {
    const Eigen::Vector3d d = p - s.center;
    const double n = d.norm();
    if (grad) *grad = n > 0 ? Eigen::Vector3d(d / n) : Eigen::Vector3d::Zero();
    return n - s.radius;
  }

  double operator()(const Box& b) const {
    const Eigen::Vector3d rel = p - b.center;
    const Eigen::Vector3d q = rel.cwiseAbs() - b.half_extents;
    const Eigen::Vector3d outside = q.cwiseMax(0.0);
    const double out_norm = outside.norm();
    Eigen::Vector3d sign;
    for (int i = 0; i < 3; ++i) sign[i] = rel[i] < 0 ? -1.0 : 1.0;
    if (out_norm > 0) {
      if (grad) *grad = sign.cwiseProduct(outside) / out_norm;
      return out_norm;
    }
    // Inside or on the surface: the nearest face wins, lowest axis on ties.
    int axis = 0;
    for (int i = 1; i < 3; ++i) {
      if (q[i] > q[axis]) axis = i;
    }
    if (grad) {
      grad->setZero();
      (*grad)[axis] = sign[axis];
    }
    return q[axis];
  }

  double operator()(const HalfSpace& h) const {
    if (grad) *grad = h.normal;
    return h.normal.dot(p - h.point);
  }
};

Eigen::Vector3d vec3(const json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw FormatError(std::string("scene: ") + what + " needs 3 values");
  return {v[0], v[1], v[2]};
}

}  // namespace

void validate(const SdfPrimitive& prim) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          if (!(s.radius > 0) || !s.center.allFinite()) throw ConfigError("scene: sphere radius must be > 0");
        } else if constexpr (std::is_same_v<T, Box>) {
          if (!(s.half_extents.minCoeff() > 0) || !s.center.allFinite()) {
            throw ConfigError("scene: box half extents must be > 0");
          }
        } else {
          if (std::abs(s.normal.norm() - 1.0) > 1e-9 || !s.point.allFinite()) {
            throw ConfigError("scene: half-space normal must be unit length");
          }
        }
      },
      prim);
}

double primitive_distance(const SdfPrimitive& prim, const Eigen::Vector3d& p, Eigen::Vector3d* grad) {
  return std::visit(DistanceVisitor{p, grad}, prim);
}

Scene::Scene(std::vector<SdfPrimitive> primitives) {
  for (auto& p : primitives) add(std::move(p));
}

void Scene::add(SdfPrimitive p) {
  validate(p);
  primitives_.push_back(std::move(p));
}

double Scene::distance(const Eigen::Vector3d& p, Eigen::Vector3d* grad) const {
  double best = std::numeric_limits<double>::infinity();
  if (grad) grad->setZero();
  Eigen::Vector3d g;
  for (const auto& prim : primitives_) {
    const double d = primitive_distance(prim, p, grad ? &g : nullptr);
    if (d < best) {
      best = d;
      if (grad) *grad = g;
    }
  }
  return best;
}

double Scene::distance(const Eigen::Vector3d& p) const { return distance(p, nullptr); }

Eigen::Vector3d Scene::gradient(const Eigen::Vector3d& p) const {
  Eigen::Vector3d g;
  distance(p, &g);
  return g;
}

Scene Scene::from_json_text(std::string_view text) {
  Scene scene;
  try {
    const json doc = json::parse(text);
    for (const auto& pj : doc.at("primitives")) {
      const auto shape = pj.at("shape").get<std::string>();
      if (shape == "sphere") {
        scene.add(Sphere{vec3(pj.at("center"), "center"), pj.at("radius").get<double>()});
      } else if (shape == "box") {
        scene.add(Box{vec3(pj.at("center"), "center"), vec3(pj.at("half_extents"), "half_extents")});
      } else if (shape == "half_space") {
        scene.add(HalfSpace{vec3(pj.at("point"), "point"), vec3(pj.at("normal"), "normal")});
      } else {
        throw FormatError("scene: unknown shape '" + shape + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene: ") + e.what());
  }
  return scene;
}

std::string Scene::to_json_text() const {
  auto arr = [](const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); };
  json doc;
  doc["primitives"] = json::array();
  for (const auto& prim : primitives_) {
    json pj;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            pj = {{"shape", "sphere"}, {"center", arr(s.center)}, {"radius", s.radius}};
          } else if constexpr (std::is_same_v<T, Box>) {
            pj = {{"shape", "box"}, {"center", arr(s.center)}, {"half_extents", arr(s.half_extents)}};
          } else {
            pj = {{"shape", "half_space"}, {"point", arr(s.point)}, {"normal", arr(s.normal)}};
          }
        },
        prim);
    doc["primitives"].push_back(pj);
  }
  return doc.dump(2) + "\n";
}

Scene Scene::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace mfo
