#pragma once

// Model file: a plain-text manifest followed by a little-endian tensor blob.
//
//   mfo-model-v1
//   dtype float32
//   config <key> <value>
//   tensor <name> <rows> <cols> <byte offset>
//   end
//   <blob>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "mfo/errors.hpp"
#include "mfo/model.hpp"

namespace mfo {

inline constexpr const char* kModelVersion = "mfo-model-v1";

struct TensorEntry {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  std::uint64_t offset = 0;
};

struct ModelManifest {
  std::string dtype;  // "float32" or "float64"
  ModelConfig config;
  std::vector<TensorEntry> tensors;

  std::size_t element_size() const { return dtype == "float64" ? 8 : 4; }
  std::uint64_t blob_size() const;
};

void write_manifest(std::ostream& out, const ModelManifest& m);
// Reads and validates the header; leaves the stream at the start of the blob.
ModelManifest read_manifest(std::istream& in);
std::vector<char> read_blob(std::istream& in, std::uint64_t size);

namespace detail {

template <typename T>
void store_le(const T& v, char* dst) {
  std::memcpy(dst, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(dst, dst + sizeof(T));
}

template <typename T>
T load_le(const char* src) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
  T v;
  std::memcpy(&v, tmp, sizeof(T));
  return v;
}

}  // namespace detail

// Tensors are written in the model's own precision (float32 for float
// models, float64 for double models).
template <typename S>
void save_model(const PredictorModel<S>& model, std::ostream& out) {
  static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>);
  model.check();
  ModelManifest man;
  man.dtype = std::is_same_v<S, float> ? "float32" : "float64";
  man.config = model.config;
  std::uint64_t offset = 0;
  model.for_each_tensor([&](const std::string& name, const MatX<S>& t) {
    man.tensors.push_back({name, t.rows(), t.cols(), offset});
    offset += static_cast<std::uint64_t>(t.size()) * sizeof(S);
  });
  write_manifest(out, man);
  std::vector<char> blob(offset);
  std::size_t i = 0;
  model.for_each_tensor([&](const std::string&, const MatX<S>& t) {
    for (Eigen::Index k = 0; k < t.size(); ++k, i += sizeof(S)) detail::store_le(t.data()[k], blob.data() + i);
  });
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("model: write failed");
}

template <typename S>
PredictorModel<S> load_model(std::istream& in) {
  const ModelManifest man = read_manifest(in);
  const std::vector<char> blob = read_blob(in, man.blob_size());
  PredictorModel<S> model = PredictorModel<S>::zeros(man.config);

  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& t : man.tensors) by_name[t.name] = &t;
  std::size_t seen = 0;
  model.for_each_tensor([&](const std::string& name, MatX<S>& t) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("model: manifest lacks tensor " + name);
    const TensorEntry& e = *it->second;
    if (e.rows != t.rows() || e.cols != t.cols()) {
      throw FormatError("model: tensor " + name + " has shape " + std::to_string(e.rows) + "x" +
                        std::to_string(e.cols) + ", config implies " + std::to_string(t.rows()) + "x" +
                        std::to_string(t.cols()));
    }
    const char* src = blob.data() + e.offset;
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      if (man.dtype == "float32") {
        t.data()[k] = static_cast<S>(detail::load_le<float>(src + 4 * k));
      } else {
        t.data()[k] = static_cast<S>(detail::load_le<double>(src + 8 * k));
      }
    }
    ++seen;
  });
  if (seen != man.tensors.size()) throw FormatError("model: manifest lists unknown tensors");
  model.check();
  return model;
}

template <typename S>
void save_model(const PredictorModel<S>& model, const std::filesystem::path& path);
template <typename S>
PredictorModel<S> load_model(const std::filesystem::path& path);

}  // namespace mfo
