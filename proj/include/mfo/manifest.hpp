#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mfo {

inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

// Everything needed to regenerate a CLI run: the exact argument list, the
// hashes of every input and output file, and the seed. No timestamps, so
// identical runs produce identical manifests.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;  // argv after the program name
  std::uint64_t seed = 0;
  struct Artifact {
    std::string role, path, hash;
  };
  std::vector<Artifact> inputs, outputs;

  void add_input(const std::string& role, const std::filesystem::path& p);
  void add_output(const std::string& role, const std::filesystem::path& p);
  std::string to_json_text() const;
  static RunManifest from_json_text(std::string_view text);
};

}  // namespace mfo
