#include "mfo/manifest.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "mfo/dataio.hpp"
#include "mfo/errors.hpp"

namespace mfo {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) { return fnv1a_hex(read_text_file(path)); }

void RunManifest::add_input(const std::string& role, const std::filesystem::path& p) {
  inputs.push_back({role, p.string(), file_hash(p)});
}

void RunManifest::add_output(const std::string& role, const std::filesystem::path& p) {
  outputs.push_back({role, p.string(), file_hash(p)});
}

std::string RunManifest::to_json_text() const {
  auto list = [](const std::vector<Artifact>& a) {
    json arr = json::array();
    for (const auto& x : a) arr.push_back({{"role", x.role}, {"path", x.path}, {"fnv1a", x.hash}});
    return arr;
  };
  json j;
  j["format"] = "mfo-run-v1";
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["args"] = args;
  j["seed"] = seed;
  j["inputs"] = list(inputs);
  j["outputs"] = list(outputs);
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json_text(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "mfo-run-v1") throw FormatError("run manifest: unknown format");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    auto read = [](const json& arr, std::vector<Artifact>& out) {
      for (const auto& a : arr) {
        out.push_back({a.at("role").get<std::string>(), a.at("path").get<std::string>(), a.at("fnv1a").get<std::string>()});
      }
    };
    read(j.at("inputs"), m.inputs);
    read(j.at("outputs"), m.outputs);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run manifest: ") + e.what());
  }
}

}  // namespace mfo
