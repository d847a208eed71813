#pragma once

// JSON configuration files. Every key is optional and defaults to the
// in-code default; unknown keys are rejected so typos do not go unnoticed.

#include <filesystem>
#include <string>
#include <string_view>

#include "mfo/costs.hpp"
#include "mfo/lbfgs.hpp"
#include "mfo/model.hpp"
#include "mfo/synthetic.hpp"
#include "mfo/training.hpp"

namespace mfo {

// Objective file:
//   { "weights": {"delta", "goal", "obstacle", "robot_goal", "robot_obstacle",
//                 "robot_smooth", "interaction"},
//     "alpha", "horizon", "end_effector", "human_goal": [x,y,z],
//     "robot_goal": [x,y,z], "robot_start": [x,y,z],
//     "smoothness": "free" | "start-anchored" | "banded",
//     "interaction_point": "base" | "end-effector",
//     "scene": "<path relative to this file>" | {inline scene},
//     "lbfgs": {"memory", "max_iterations", "gradient_tolerance",
//               "relative_decrease_tolerance", "c1", "c2", "max_line_search_trials"} }
struct ObjectiveFile {
  ObjectiveSpec spec;
  LbfgsConfig lbfgs;
  Eigen::Vector3d robot_start = Eigen::Vector3d::Zero();
};

ObjectiveFile objective_from_json_text(std::string_view text, const std::filesystem::path& base_dir);
ObjectiveFile load_objective(const std::filesystem::path& path);

// Training file: { "training": {...TrainingConfig fields...},
//                  "model": {"hidden_size", "num_layers", "input_size"} }
struct TrainingFile {
  TrainingConfig training;
  ModelConfig model;
};

TrainingFile training_from_json_text(std::string_view text);
TrainingFile load_training_config(const std::filesystem::path& path);

// Synthetic spec: {"kind", "count", "duration", "frame_rate",
//                  "workspace_min": [x,y], "workspace_max": [x,y], "seed"}
SyntheticSpec synthetic_from_json_text(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

SmoothnessVariant parse_smoothness(std::string_view name);
const char* smoothness_name(SmoothnessVariant v);

}  // namespace mfo
