#pragma once

// Trajectory and dataset files.
//
// A trajectory is a CSV (first column time_s, one row per frame) plus a JSON
// sidecar with the same stem declaring frame rate, layout and columns.
// Values are written in shortest round-trip form, so save/load is lossless
// for doubles.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfo/scene.hpp"
#include "mfo/skeleton.hpp"
#include "mfo/trajectory.hpp"

namespace mfo {

// Column names after time_s: base_pos_*, base_rot_*, joint_<name>_* for a
// human, robot_* for a robot.
std::vector<std::string> trajectory_columns(const Trajectory& traj, const Skeleton* skel);

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

void save_trajectory(const std::filesystem::path& csv, const Trajectory& traj, const Skeleton* skel);
// Checks the header against the sidecar and, when given, the skeleton.
Trajectory load_trajectory(const std::filesystem::path& csv, const Skeleton* skel = nullptr);

std::string trajectory_csv_text(const Trajectory& traj, const Skeleton* skel);

// A directory of trajectories described by dataset.json.
struct Dataset {
  std::string kind;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  std::string skeleton = "default-human-20";
  std::vector<Trajectory> trajectories;
  std::vector<std::optional<Scene>> scenes;  // parallel to trajectories
};

void save_dataset(const std::filesystem::path& dir, const Dataset& data, const Skeleton& skel);
Dataset load_dataset(const std::filesystem::path& dir, const Skeleton& skel);

// Writes via a temporary file and rename, so readers never see half a file.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mfo
