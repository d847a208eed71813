#pragma once

#include <Eigen/Core>

#include <string>

#include "mfo/errors.hpp"

namespace mfo {

enum class Layout { kHuman, kRobot };

inline const char* layout_name(Layout l) { return l == Layout::kHuman ? "human" : "robot"; }

// Time-indexed states at a fixed frame rate. Column t is the flattened state
// of frame t.
struct Trajectory {
  double frame_rate = 30.0;
  Layout layout = Layout::kHuman;
  Eigen::MatrixXd states;

  Trajectory() = default;
  Trajectory(double rate, Layout l, Eigen::MatrixXd s)
      : frame_rate(rate), layout(l), states(std::move(s)) {
    if (!(frame_rate > 0)) throw ConfigError("trajectory: frame rate must be positive");
  }

  Eigen::Index frames() const { return states.cols(); }
  Eigen::Index dim() const { return states.rows(); }
  double duration() const { return frames() / frame_rate; }

  Trajectory slice(Eigen::Index first, Eigen::Index count) const {
    return Trajectory(frame_rate, layout, states.middleCols(first, count));
  }
};

}  // namespace mfo
