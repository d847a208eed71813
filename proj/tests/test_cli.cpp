#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfo/cli.hpp"
#include "mfo/dataio.hpp"
#include "mfo/manifest.hpp"

namespace mfo {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static fs::path root() { return fs::temp_directory_path() / "mfo_cli_test"; }
  static std::string p(const std::string& rel) { return (root() / rel).string(); }
  static std::string config(const std::string& name) { return (fs::path(MFO_CONFIG_DIR) / name).string(); }

  // One small dataset and model shared by every test.
  static void SetUpTestSuite() {
    fs::remove_all(root());
    fs::create_directories(root());
    const CliRun s = cli({"synth", "--count", "10", "--duration", "2.5", "--seed", "3", "--out", p("data")});
    ASSERT_EQ(s.code, 0) << s.err;
    const CliRun t = cli({"train", "--data", p("data"), "--epochs", "1", "--hidden", "8", "--out", p("train")});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() { fs::remove_all(root()); }
};

TEST_F(CliTest, PipelineProducesEightHorizonColumns) {
  EXPECT_TRUE(fs::exists(p("train/model.mfo")));
  EXPECT_TRUE(fs::exists(p("train/loss_curve.csv")));
  const CliRun e = cli({"eval", "--model", p("train/model.mfo"), "--data", p("data"), "--out", p("eval")});
  ASSERT_EQ(e.code, 0) << e.err;
  const std::string report = read_text_file(p("eval/eval_report.csv"));
  const std::string header = report.substr(0, report.find('\n'));
  EXPECT_EQ(header, "method,125,250,375,500,625,750,875,1000");
  EXPECT_NE(report.find("\nzerovel,"), std::string::npos);
  EXPECT_NE(report.find("\ninterp (w),"), std::string::npos);
  EXPECT_TRUE(fs::exists(p("eval/run_manifest.json")));
}

TEST_F(CliTest, ManifestsRecordArgumentsAndHashes) {
  const RunManifest m = RunManifest::from_json_text(read_text_file(p("data/run_manifest.json")));
  EXPECT_EQ(m.command, "synth");
  EXPECT_EQ(m.seed, 3u);
  EXPECT_EQ(m.args.front(), "synth");
  ASSERT_EQ(m.outputs.size(), 11u);
  for (const auto& o : m.outputs) EXPECT_EQ(o.hash, file_hash(o.path));
  const std::string text = read_text_file(p("data/run_manifest.json"));
  EXPECT_EQ(text.find("time"), std::string::npos);
}

TEST_F(CliTest, OptimizeWithoutModelIsConfigErrorWithNoOutput) {
  const CliRun r = cli({"optimize", "--input", p("data/traj_0000.csv"), "--objective", config("objective.json"),
                     "--out", p("no_model")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_FALSE(fs::exists(p("no_model")));
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("error").at("kind"), "config");
  EXPECT_FALSE(j.at("error").at("message").get<std::string>().empty());
}

TEST_F(CliTest, PredictAndOptimizeWriteTrajectories) {
  const CliRun pr = cli({"predict", "--model", p("train/model.mfo"), "--input", p("data/traj_0000.csv"), "--frames",
                      "30", "--horizon", "20", "--out", p("predict")});
  ASSERT_EQ(pr.code, 0) << pr.err;
  EXPECT_EQ(load_trajectory(p("predict/prediction.csv")).frames(), 20);
  const CliRun op = cli({"optimize", "--model", p("train/model.mfo"), "--input", p("data/traj_0000.csv"), "--frames",
                      "30", "--objective", config("objective.json"), "--goal", "0.3,-0.2,1.0", "--out", p("opt")});
  ASSERT_EQ(op.code, 0) << op.err;
  EXPECT_EQ(load_trajectory(p("opt/optimized.csv")).frames(), 30);
  const CliRun te = cli({"trace-export", "--result", p("opt/result.json"), "--out", p("trace")});
  ASSERT_EQ(te.code, 0) << te.err;
  const std::string trace = read_text_file(p("trace/trace.csv"));
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "iteration,objective,gradient_norm,step,evaluations");
}

TEST_F(CliTest, PlanJointEmitsEqualLengthTrajectories) {
  const CliRun r = cli({"plan-joint", "--model", p("train/model.mfo"), "--input", p("data/traj_0001.csv"), "--frames",
                     "30", "--objective", config("joint.json"), "--out", p("joint")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Trajectory h = load_trajectory(p("joint/human.csv"));
  const Trajectory rb = load_trajectory(p("joint/robot.csv"));
  EXPECT_EQ(h.frames(), rb.frames());
  EXPECT_EQ(h.frames(), 30);
  EXPECT_EQ(rb.layout, Layout::kRobot);
}

TEST_F(CliTest, ErrorClassesMapToExitCodes) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"dance"}).code, kExitUsage);
  EXPECT_EQ(cli({"synth", "--count", "many", "--out", p("x")}).code, kExitUsage);
  EXPECT_EQ(cli({"synth", "--kind", "running", "--out", p("x")}).code, kExitConfig);

  write_text_file(p("bad.json"), "{\"alpha\": ");
  const CliRun fmt = cli({"optimize", "--model", p("train/model.mfo"), "--input", p("data/traj_0000.csv"),
                       "--objective", p("bad.json"), "--out", p("bad")});
  EXPECT_EQ(fmt.code, kExitFormat);
  EXPECT_EQ(nlohmann::json::parse(fmt.err).at("error").at("kind"), "format");

  write_text_file(p("junk.mfo"), "not a model\n");
  EXPECT_EQ(cli({"predict", "--model", p("junk.mfo"), "--input", p("data/traj_0000.csv"), "--out", p("j")}).code,
            kExitFormat);
  const CliRun dim = cli({"predict", "--model", p("train/model.mfo"), "--input", p("data/traj_0000.csv"), "--frames",
                       "500", "--out", p("dim")});
  EXPECT_EQ(dim.code, kExitDimension);
  EXPECT_EQ(cli({"synth", "--help"}).code, kExitOk);
}

TEST_F(CliTest, BinaryReportsExitCode) {
  const std::string cmd = std::string(MFO_CLI_PATH) + " optimize --out " + p("bin_out") + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), kExitConfig);
}

}  // namespace
}  // namespace mfo
