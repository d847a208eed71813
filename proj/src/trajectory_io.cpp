#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfo/dataio.hpp"
#include "mfo/errors.hpp"
#include "mfo/format.hpp"

namespace mfo {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> trajectory_columns(const Trajectory& traj, const Skeleton* skel) {
  std::vector<std::string> cols;
  const char* axes[] = {"_x", "_y", "_z"};
  if (traj.layout == Layout::kRobot) {
    if (traj.dim() != 3) throw DimensionError("robot trajectories are 3-dimensional");
    for (const char* a : axes) cols.push_back(std::string("robot") + a);
    return cols;
  }
  if (traj.dim() < 6 || (traj.dim() - 6) % 3 != 0) throw DimensionError("human state must be 6 + 3J");
  if (skel && skel->state_dim() != traj.dim()) throw DimensionError("trajectory does not match the skeleton");
  for (const char* a : axes) cols.push_back(std::string("base_pos") + a);
  for (const char* a : axes) cols.push_back(std::string("base_rot") + a);
  const int joints = static_cast<int>((traj.dim() - 6) / 3);
  for (int j = 0; j < joints; ++j) {
    const std::string name = skel ? skel->joint(j).name : "j" + std::to_string(j);
    for (const char* a : axes) cols.push_back("joint_" + name + a);
  }
  return cols;
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

std::string trajectory_csv_text(const Trajectory& traj, const Skeleton* skel) {
  const auto cols = trajectory_columns(traj, skel);
  std::string out = "time_s";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (Eigen::Index t = 0; t < traj.frames(); ++t) {
    out += format_double(static_cast<double>(t) / traj.frame_rate);
    for (Eigen::Index r = 0; r < traj.dim(); ++r) {
      out += ',';
      out += format_double(traj.states(r, t));
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_trajectory(const fs::path& csv, const Trajectory& traj, const Skeleton* skel) {
  const auto cols = trajectory_columns(traj, skel);
  json side;
  side["format"] = "mfo-trajectory-v1";
  side["frame_rate"] = traj.frame_rate;
  side["layout"] = layout_name(traj.layout);
  side["frames"] = traj.frames();
  if (skel && traj.layout == Layout::kHuman) side["skeleton"] = skel->name();
  side["columns"] = cols;
  write_text_file(csv, trajectory_csv_text(traj, skel));
  write_text_file(sidecar_path(csv), side.dump(2) + "\n");
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Trajectory load_trajectory(const fs::path& csv, const Skeleton* skel) {
  json side;
  try {
    side = json::parse(read_text_file(sidecar_path(csv)));
  } catch (const json::exception& e) {
    throw FormatError("trajectory sidecar " + sidecar_path(csv).string() + ": " + e.what());
  }
  Layout layout;
  double rate;
  std::vector<std::string> columns;
  Eigen::Index frames;
  try {
    if (side.at("format").get<std::string>() != "mfo-trajectory-v1") throw FormatError("unknown trajectory format");
    const auto l = side.at("layout").get<std::string>();
    if (l != "human" && l != "robot") throw FormatError("unknown layout '" + l + "'");
    layout = l == "human" ? Layout::kHuman : Layout::kRobot;
    rate = side.at("frame_rate").get<double>();
    columns = side.at("columns").get<std::vector<std::string>>();
    frames = side.at("frames").get<Eigen::Index>();
  } catch (const json::exception& e) {
    throw FormatError("trajectory sidecar: " + std::string(e.what()));
  }

  const std::string text = read_text_file(csv);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv.string() + ": empty file");
  const auto header = split(line);
  if (header.size() != columns.size() + 1 || header[0] != "time_s") {
    throw FormatError(csv.string() + ": header does not match the sidecar");
  }
  for (size_t i = 0; i < columns.size(); ++i) {
    if (header[i + 1] != columns[i]) throw FormatError(csv.string() + ": unexpected column " + std::string(header[i + 1]));
  }
  Eigen::MatrixXd states(static_cast<Eigen::Index>(columns.size()), frames);
  Eigen::Index t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (t >= frames) throw FormatError(csv.string() + ": more rows than declared");
    const auto cells = split(line);
    if (cells.size() != columns.size() + 1) throw FormatError(csv.string() + ": row " + std::to_string(t) + " has the wrong width");
    for (size_t i = 0; i < columns.size(); ++i) {
      states(static_cast<Eigen::Index>(i), t) = parse_number<double>(cells[i + 1], "value");
    }
    ++t;
  }
  if (t != frames) throw FormatError(csv.string() + ": fewer rows than declared");
  Trajectory traj(rate, layout, std::move(states));
  if (skel && layout == Layout::kHuman) {
    if (trajectory_columns(traj, skel) != columns) throw DimensionError(csv.string() + ": columns do not match the skeleton");
  }
  return traj;
}

void save_dataset(const fs::path& dir, const Dataset& data, const Skeleton& skel) {
  json man;
  man["format"] = "mfo-dataset-v1";
  man["kind"] = data.kind;
  man["seed"] = data.seed;
  man["frame_rate"] = data.frame_rate;
  man["skeleton"] = data.skeleton;
  man["trajectories"] = json::array();
  for (size_t i = 0; i < data.trajectories.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%04zu.csv", i);
    save_trajectory(dir / name, data.trajectories[i], &skel);
    json entry{{"file", name}};
    if (i < data.scenes.size() && data.scenes[i]) entry["scene"] = json::parse(data.scenes[i]->to_json_text());
    man["trajectories"].push_back(entry);
  }
  write_text_file(dir / "dataset.json", man.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir, const Skeleton& skel) {
  Dataset data;
  try {
    const json man = json::parse(read_text_file(dir / "dataset.json"));
    if (man.at("format").get<std::string>() != "mfo-dataset-v1") throw FormatError("unknown dataset format");
    data.kind = man.at("kind").get<std::string>();
    data.seed = man.at("seed").get<std::uint64_t>();
    data.frame_rate = man.at("frame_rate").get<double>();
    data.skeleton = man.at("skeleton").get<std::string>();
    for (const auto& entry : man.at("trajectories")) {
      data.trajectories.push_back(load_trajectory(dir / entry.at("file").get<std::string>(), &skel));
      if (entry.contains("scene")) {
        data.scenes.emplace_back(Scene::from_json_text(entry.at("scene").dump()));
      } else {
        data.scenes.emplace_back();
      }
    }
  } catch (const json::exception& e) {
    throw FormatError("dataset " + dir.string() + ": " + e.what());
  }
  return data;
}

}  // namespace mfo
