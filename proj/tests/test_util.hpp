#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <functional>
#include <random>

#include "mfo/model.hpp"
#include "mfo/skeleton.hpp"

namespace mfo::testing {

// Two-joint arm on a floating base: state dimension 12.
inline Skeleton tiny_arm() {
  std::vector<SkeletonJoint> j(2);
  j[0].name = "shoulder";
  j[0].parent = -1;
  j[0].offset = {0.05, 0.2, 0.4};
  j[0].key = true;
  j[1].name = "right_wrist";
  j[1].parent = 0;
  j[1].offset = {0.1, -0.05, -0.5};
  j[1].key = true;
  j[1].right_wrist = true;
  return Skeleton(std::move(j), "tiny-arm");
}

inline ModelConfig tiny_config(int state_dim = 12, int hidden = 32) {
  ModelConfig c;
  c.state_dim = state_dim;
  c.hidden_size = hidden;
  c.input_size = hidden;
  c.num_layers = 1;
  return c;
}

// Smooth random observed sequence (columns are frames).
inline Eigen::MatrixXd random_observed(int dim, int frames, std::uint64_t seed, double step = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd o(dim, frames);
  Eigen::VectorXd v(dim), s(dim);
  for (int i = 0; i < dim; ++i) {
    s[i] = 0.3 * n(rng);
    v[i] = step * n(rng);
  }
  for (int t = 0; t < frames; ++t) {
    o.col(t) = s + t * v;
  }
  return o;
}

// Central differences of a scalar function of a vector.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double eps) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + eps;
    const double fp = f(xp);
    xp[i] = orig - eps;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2 * eps);
  }
  return g;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

inline Eigen::Matrix3d axis_angle_matrix(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (n == 0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(n, v / n).toRotationMatrix();
}

}  // namespace mfo::testing
