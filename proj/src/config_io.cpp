#include "mfo/config_io.hpp"

#include <initializer_list>

#include <nlohmann/json.hpp>

#include "mfo/dataio.hpp"
#include "mfo/errors.hpp"

namespace mfo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::Vector3d vec3(const json& j, const std::string& what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(what + " needs 3 values");
  return {v[0], v[1], v[2]};
}

json parse(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

// Turns JSON type errors into configuration errors.
template <typename F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

SmoothnessVariant parse_smoothness(std::string_view name) {
  if (name == "free") return SmoothnessVariant::kFree;
  if (name == "start-anchored") return SmoothnessVariant::kStartAnchored;
  if (name == "banded") return SmoothnessVariant::kBanded;
  throw ConfigError("unknown smoothness variant '" + std::string(name) + "'");
}

const char* smoothness_name(SmoothnessVariant v) {
  switch (v) {
    case SmoothnessVariant::kFree: return "free";
    case SmoothnessVariant::kStartAnchored: return "start-anchored";
    case SmoothnessVariant::kBanded: return "banded";
  }
  return "unknown";
}

ObjectiveFile objective_from_json_text(std::string_view text, const fs::path& base_dir) {
  const json j = parse(text, "objective");
  return guarded("objective", [&] {
    check_keys(j, {"weights", "alpha", "horizon", "end_effector", "human_goal", "robot_goal", "robot_start",
                   "smoothness", "interaction_point", "scene", "lbfgs"},
               "objective");
    ObjectiveFile f;
    auto& s = f.spec;
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      check_keys(w, {"delta", "goal", "obstacle", "robot_goal", "robot_obstacle", "robot_smooth", "interaction"},
                 "objective.weights");
      read(w, "delta", s.weights.delta);
      read(w, "goal", s.weights.goal);
      read(w, "obstacle", s.weights.obstacle);
      read(w, "robot_goal", s.weights.robot_goal);
      read(w, "robot_obstacle", s.weights.robot_obstacle);
      read(w, "robot_smooth", s.weights.robot_smooth);
      read(w, "interaction", s.weights.interaction);
    }
    read(j, "alpha", s.alpha);
    read(j, "horizon", s.horizon);
    read(j, "end_effector", s.end_effector);
    if (j.contains("human_goal") && !j.at("human_goal").is_null()) s.human_goal = vec3(j.at("human_goal"), "human_goal");
    if (j.contains("robot_goal") && !j.at("robot_goal").is_null()) s.robot_goal = vec3(j.at("robot_goal"), "robot_goal");
    if (j.contains("robot_start")) f.robot_start = vec3(j.at("robot_start"), "robot_start");
    if (j.contains("smoothness")) s.smoothness = parse_smoothness(j.at("smoothness").get<std::string>());
    if (j.contains("interaction_point")) {
      const auto p = j.at("interaction_point").get<std::string>();
      if (p == "base") {
        s.interaction_point = InteractionPoint::kBase;
      } else if (p == "end-effector") {
        s.interaction_point = InteractionPoint::kEndEffector;
      } else {
        throw ConfigError("objective: unknown interaction_point '" + p + "'");
      }
    }
    if (j.contains("scene")) {
      const json& sc = j.at("scene");
      s.scene = sc.is_string() ? Scene::load(base_dir / sc.get<std::string>()) : Scene::from_json_text(sc.dump());
    }
    if (j.contains("lbfgs")) {
      const json& l = j.at("lbfgs");
      check_keys(l, {"memory", "max_iterations", "gradient_tolerance", "relative_decrease_tolerance", "c1", "c2",
                     "max_line_search_trials"},
                 "objective.lbfgs");
      read(l, "memory", f.lbfgs.memory);
      read(l, "max_iterations", f.lbfgs.max_iterations);
      read(l, "gradient_tolerance", f.lbfgs.gradient_tolerance);
      read(l, "relative_decrease_tolerance", f.lbfgs.relative_decrease_tolerance);
      read(l, "c1", f.lbfgs.c1);
      read(l, "c2", f.lbfgs.c2);
      read(l, "max_line_search_trials", f.lbfgs.max_line_search_trials);
    }
    f.lbfgs.validate();
    return f;
  });
}

ObjectiveFile load_objective(const fs::path& path) {
  return objective_from_json_text(read_text_file(path), path.parent_path());
}

TrainingFile training_from_json_text(std::string_view text) {
  const json j = parse(text, "training config");
  return guarded("training config", [&] {
    check_keys(j, {"training", "model"}, "training config");
    TrainingFile f;
    if (j.contains("training")) {
      const json& t = j.at("training");
      check_keys(t, {"slice_seconds", "input_seconds", "frame_rate", "learning_rate", "batch_size", "epochs", "seed",
                     "stride", "clip_norm", "holdout_fraction", "augment", "fit_normalization"},
                 "training");
      auto& c = f.training;
      read(t, "slice_seconds", c.slice_seconds);
      read(t, "input_seconds", c.input_seconds);
      read(t, "frame_rate", c.frame_rate);
      read(t, "learning_rate", c.learning_rate);
      read(t, "batch_size", c.batch_size);
      read(t, "epochs", c.epochs);
      read(t, "seed", c.seed);
      read(t, "stride", c.stride);
      read(t, "clip_norm", c.clip_norm);
      read(t, "holdout_fraction", c.holdout_fraction);
      read(t, "augment", c.augment);
      read(t, "fit_normalization", c.fit_normalization);
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, {"hidden_size", "num_layers", "input_size"}, "model");
      read(m, "hidden_size", f.model.hidden_size);
      read(m, "num_layers", f.model.num_layers);
      read(m, "input_size", f.model.input_size);
    }
    f.model.frame_rate = f.training.frame_rate;
    f.training.validate();
    return f;
  });
}

TrainingFile load_training_config(const fs::path& path) { return training_from_json_text(read_text_file(path)); }

SyntheticSpec synthetic_from_json_text(std::string_view text) {
  const json j = parse(text, "synth config");
  return guarded("synth config", [&] {
    check_keys(j, {"kind", "count", "duration", "frame_rate", "workspace_min", "workspace_max", "seed"}, "synth");
    SyntheticSpec s;
    if (j.contains("kind")) s.kind = parse_synthetic_kind(j.at("kind").get<std::string>());
    read(j, "count", s.count);
    read(j, "duration", s.duration);
    read(j, "frame_rate", s.frame_rate);
    read(j, "seed", s.seed);
    for (auto [key, dst] : {std::pair{"workspace_min", &s.workspace_min}, std::pair{"workspace_max", &s.workspace_max}}) {
      if (!j.contains(key)) continue;
      const auto v = j.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError(std::string("synth: ") + key + " needs 2 values");
      *dst = {v[0], v[1]};
    }
    s.validate();
    return s;
  });
}

SyntheticSpec load_synthetic_spec(const fs::path& path) { return synthetic_from_json_text(read_text_file(path)); }

}  // namespace mfo
