#include <gtest/gtest.h>

#include <sstream>

#include "mfo/model_io.hpp"
#include "test_util.hpp"

namespace mfo {
namespace {

template <typename S>
PredictorModel<S> sample_model() {
  ModelConfig c = testing::tiny_config(12, 10);
  c.num_layers = 2;
  auto m = PredictorModel<double>::random(c, 5, 0.7).cast<S>();
  m.feature_shift.setConstant(S(0.25));
  m.output_scale.setConstant(S(0.5));
  return m;
}

template <typename S>
std::string serialize(const PredictorModel<S>& m) {
  std::ostringstream out(std::ios::binary);
  save_model(m, out);
  return out.str();
}

template <typename S>
PredictorModel<S> deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_model<S>(in);
}

TEST(ModelIo, FloatRoundTripIsBitwise) {
  const auto m = sample_model<float>();
  const auto back = deserialize<float>(serialize(m));
  m.for_each_tensor([&](const std::string& name, const MatX<float>&) {
    (void)name;
  });
  std::vector<MatX<float>> a, b;
  m.for_each_tensor([&](const std::string&, const MatX<float>& t) { a.push_back(t); });
  back.for_each_tensor([&](const std::string&, const MatX<float>& t) { b.push_back(t); });
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const Eigen::MatrixXf obs = testing::random_observed(12, 6, 3).cast<float>();
  EXPECT_EQ(rollout<float>(m, obs, nullptr, 12).states, rollout<float>(back, obs, nullptr, 12).states);
}

TEST(ModelIo, DoubleRoundTripIsBitwise) {
  const auto m = sample_model<double>();
  const std::string bytes = serialize(m);
  EXPECT_NE(bytes.find("dtype float64"), std::string::npos);
  const auto back = deserialize<double>(bytes);
  const Eigen::MatrixXd obs = testing::random_observed(12, 6, 4);
  EXPECT_EQ(rollout<double>(m, obs, nullptr, 12).states, rollout<double>(back, obs, nullptr, 12).states);
}

TEST(ModelIo, FloatFileLoadsAsDouble) {
  const auto m = sample_model<float>();
  const auto back = deserialize<double>(serialize(m));
  EXPECT_EQ(back.out_w, m.out_w.cast<double>());
}

TEST(ModelIo, ManifestShapesMatchModel) {
  const auto m = sample_model<float>();
  std::istringstream in(serialize(m), std::ios::binary);
  const ModelManifest man = read_manifest(in);
  EXPECT_EQ(man.dtype, "float32");
  EXPECT_EQ(man.config.hidden_size, 10);
  EXPECT_EQ(man.config.num_layers, 2);
  size_t i = 0;
  m.for_each_tensor([&](const std::string& name, const MatX<float>& t) {
    ASSERT_LT(i, man.tensors.size());
    EXPECT_EQ(man.tensors[i].name, name);
    EXPECT_EQ(man.tensors[i].rows, t.rows());
    EXPECT_EQ(man.tensors[i].cols, t.cols());
    ++i;
  });
  EXPECT_EQ(i, man.tensors.size());
}

TEST(ModelIo, CorruptedHeaderIsFormatError) {
  std::string bytes = serialize(sample_model<float>());
  bytes[2] = 'X';
  EXPECT_THROW(deserialize<float>(bytes), FormatError);
  std::string garbled = serialize(sample_model<float>());
  const auto pos = garbled.find("tensor ");
  garbled.replace(pos, 7, "tensro ");
  EXPECT_THROW(deserialize<float>(garbled), FormatError);
  EXPECT_THROW(deserialize<float>(""), FormatError);
}

TEST(ModelIo, TruncatedBlobIsFormatError) {
  const std::string bytes = serialize(sample_model<float>());
  EXPECT_THROW(deserialize<float>(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(deserialize<float>(bytes + "x"), FormatError);
}

TEST(ModelIo, ShapeMismatchIsFormatError) {
  std::string bytes = serialize(sample_model<float>());
  const auto pos = bytes.find("config hidden_size 10");
  ASSERT_NE(pos, std::string::npos);
  bytes.replace(pos, 21, "config hidden_size 11");
  EXPECT_THROW(deserialize<float>(bytes), FormatError);
}

TEST(ModelIo, MissingFileIsIoError) {
  EXPECT_THROW(load_model<float>(std::filesystem::path("/nonexistent/model.mfo")), IoError);
}

TEST(ModelIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "mfo_model_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.mfo";
  const auto m = sample_model<float>();
  save_model(m, path);
  EXPECT_EQ(load_model<float>(path).in_w, m.in_w);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mfo
