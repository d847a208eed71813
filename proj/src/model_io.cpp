#include "mfo/model_io.hpp"

#include "mfo/format.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mfo {


std::uint64_t ModelManifest::blob_size() const {
  std::uint64_t total = 0;
  for (const auto& t : tensors) total += static_cast<std::uint64_t>(t.rows * t.cols) * element_size();
  return total;
}

void write_manifest(std::ostream& out, const ModelManifest& m) {
  out << kModelVersion << "\n";
  out << "dtype " << m.dtype << "\n";
  const auto& c = m.config;
  out << "config state_dim " << c.state_dim << "\n";
  out << "config hidden_size " << c.hidden_size << "\n";
  out << "config num_layers " << c.num_layers << "\n";
  out << "config input_size " << c.input_size << "\n";
  out << "config frame_rate " << format_double(c.frame_rate) << "\n";
  out << "config recurrent_coords ";
  for (size_t i = 0; i < c.recurrent_coords.size(); ++i) out << (i ? "," : "") << c.recurrent_coords[i];
  out << "\n";
  for (const auto& t : m.tensors) {
    out << "tensor " << t.name << " " << t.rows << " " << t.cols << " " << t.offset << "\n";
  }
  out << "end\n";
}

ModelManifest read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model: empty stream");
  if (line != kModelVersion) throw FormatError("model: version mismatch (got '" + line + "')");

  ModelManifest m;
  bool have[6] = {};
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "dtype") {
      ls >> m.dtype;
      if (m.dtype != "float32" && m.dtype != "float64") throw FormatError("model: unsupported dtype " + m.dtype);
    } else if (head == "config") {
      std::string key, value;
      ls >> key >> value;
      auto& c = m.config;
      if (key == "state_dim") c.state_dim = parse_number<int>(value, key), have[0] = true;
      else if (key == "hidden_size") c.hidden_size = parse_number<int>(value, key), have[1] = true;
      else if (key == "num_layers") c.num_layers = parse_number<int>(value, key), have[2] = true;
      else if (key == "input_size") c.input_size = parse_number<int>(value, key), have[3] = true;
      else if (key == "frame_rate") c.frame_rate = parse_number<double>(value, key), have[4] = true;
      else if (key == "recurrent_coords") {
        std::stringstream vs(value);
        std::string item;
        while (std::getline(vs, item, ',')) c.recurrent_coords.push_back(parse_number<int>(item, key));
        have[5] = true;
      } else {
        throw FormatError("model: unknown config key " + key);
      }
    } else if (head == "tensor") {
      TensorEntry t;
      std::string rows, cols, off;
      ls >> t.name >> rows >> cols >> off;
      t.rows = parse_number<Eigen::Index>(rows, "rows");
      t.cols = parse_number<Eigen::Index>(cols, "cols");
      t.offset = parse_number<std::uint64_t>(off, "offset");
      if (t.rows < 0 || t.cols < 0) throw FormatError("model: negative tensor shape");
      m.tensors.push_back(std::move(t));
    } else {
      throw FormatError("model: corrupted header line '" + line + "'");
    }
  }
  if (!ended) throw FormatError("model: truncated header");
  if (m.dtype.empty()) throw FormatError("model: missing dtype");
  for (bool h : have) {
    if (!h) throw FormatError("model: incomplete config in manifest");
  }
  try {
    m.config.resolve();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  std::uint64_t expected = 0;
  for (const auto& t : m.tensors) {
    if (t.offset != expected) throw FormatError("model: tensor " + t.name + " has a non-contiguous offset");
    expected += static_cast<std::uint64_t>(t.rows * t.cols) * m.element_size();
  }
  return m;
}

std::vector<char> read_blob(std::istream& in, std::uint64_t size) {
  std::vector<char> blob(size);
  in.read(blob.data(), static_cast<std::streamsize>(size));
  if (static_cast<std::uint64_t>(in.gcount()) != size) throw FormatError("model: truncated tensor data");
  in.peek();
  if (!in.eof()) throw FormatError("model: trailing bytes after tensor data");
  return blob;
}

template <typename S>
void save_model(const PredictorModel<S>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  save_model(model, static_cast<std::ostream&>(out));
}

template <typename S>
PredictorModel<S> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  return load_model<S>(static_cast<std::istream&>(in));
}

template void save_model<float>(const PredictorModel<float>&, const std::filesystem::path&);
template void save_model<double>(const PredictorModel<double>&, const std::filesystem::path&);
template PredictorModel<float> load_model<float>(const std::filesystem::path&);
template PredictorModel<double> load_model<double>(const std::filesystem::path&);

}  // namespace mfo
