#include "mfo/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mfo/config_io.hpp"
#include "mfo/dataio.hpp"
#include "mfo/errors.hpp"
#include "mfo/evaluation.hpp"
#include "mfo/format.hpp"
#include "mfo/manifest.hpp"
#include "mfo/model_io.hpp"
#include "mfo/optimize.hpp"
#include "mfo/synthetic.hpp"
#include "mfo/training.hpp"

namespace mfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

Skeleton load_skeleton(const std::string& path) {
  return path.empty() ? Skeleton::default_human() : Skeleton::load(path);
}

void require(const std::string& value, const std::string& what) {
  if (value.empty()) throw ConfigError("missing required " + what);
}

void require_file(const std::string& path, const std::string& what) {
  require(path, what);
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

PredictorModel<double> load_model_file(const std::string& path, const Skeleton& skel) {
  require_file(path, "model file (--model)");
  auto model = load_model<double>(fs::path(path));
  if (model.config.state_dim != skel.state_dim()) throw DimensionError("model state dimension does not match the skeleton");
  return model;
}

Eigen::Vector3d parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_number<double>(item, "coordinate"));
  if (v.size() != 3) throw ConfigError("expected x,y,z but got '" + text + "'");
  return {v[0], v[1], v[2]};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_number<int>(item, "integer"));
  return v;
}

Eigen::MatrixXd observed_window(const Trajectory& traj, int from, int frames) {
  const int n = frames > 0 ? frames : static_cast<int>(traj.frames()) - from;
  if (from < 0 || n < 2 || from + n > traj.frames()) throw DimensionError("observed window outside the trajectory");
  return traj.states.middleCols(from, n);
}

json matrix_json(const Eigen::MatrixXd& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

json terms_json(const ObjectiveTerms& t) {
  return {{"delta", t.delta}, {"goal", t.goal}, {"obstacle", t.obstacle}, {"robot_goal", t.robot_goal},
          {"robot_obstacle", t.robot_obstacle}, {"robot_smooth", t.robot_smooth}, {"interaction", t.interaction}};
}

json result_json(const OptimizationResult& r) {
  json trace = json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"iteration", it.iteration}, {"objective", it.value}, {"gradient_norm", it.gradient_norm},
                     {"step", it.step}, {"evaluations", it.evaluations}});
  }
  json j;
  j["format"] = "mfo-result-v1";
  j["termination"] = termination_name(r.termination);
  j["iterations"] = r.iterations;
  j["value"] = r.value;
  j["gradient_norm"] = r.gradient_norm;
  j["terms"] = terms_json(r.terms);
  j["trace"] = trace;
  j["delta"] = matrix_json(r.delta);
  if (r.robot) j["robot"] = matrix_json(*r.robot);
  return j;
}

void write_manifest_file(const fs::path& dir, RunManifest& man) {
  write_text_file(dir / "run_manifest.json", man.to_json_text());
}

// --- synth ------------------------------------------------------------------

struct SynthOptions {
  std::string config, kind, out, skeleton;
  int count = -1;
  double duration = -1;
  long long seed = -1;
};

void cmd_synth(const Context& ctx, const SynthOptions& o) {
  require(o.out, "output directory (--out)");
  SyntheticSpec spec = o.config.empty() ? SyntheticSpec{} : load_synthetic_spec(o.config);
  if (!o.kind.empty()) spec.kind = parse_synthetic_kind(o.kind);
  if (o.count >= 0) spec.count = o.count;
  if (o.duration > 0) spec.duration = o.duration;
  if (o.seed >= 0) spec.seed = static_cast<std::uint64_t>(o.seed);
  const Skeleton skel = load_skeleton(o.skeleton);
  const Dataset data = generate_synthetic(spec, skel);

  const fs::path dir = o.out;
  save_dataset(dir, data, skel);
  RunManifest man{"synth", ctx.args, spec.seed, {}, {}};
  if (!o.config.empty()) man.add_input("config", o.config);
  if (!o.skeleton.empty()) man.add_input("skeleton", o.skeleton);
  man.add_output("dataset", dir / "dataset.json");
  for (size_t i = 0; i < data.trajectories.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%04zu.csv", i);
    man.add_output("trajectory", dir / name);
  }
  write_manifest_file(dir, man);
  ctx.out << "wrote " << data.trajectories.size() << " " << data.kind << " trajectories to " << dir.string() << "\n";
}

// --- train ------------------------------------------------------------------

struct TrainOptions {
  std::string data, config, out, skeleton;
  int epochs = -1, batch = -1, hidden = -1, layers = -1;
  double lr = -1;
  long long seed = -1;
};

std::vector<Sample> holdout_samples(const Dataset& data, const TrainingConfig& cfg, int stride,
                                    std::vector<Sample>* train_samples) {
  std::vector<Trajectory> train, hold;
  split_holdout(data.trajectories, cfg.holdout_fraction, train, hold);
  if (train_samples) *train_samples = slice_dataset(train, cfg).samples;
  TrainingConfig eval_cfg = cfg;
  eval_cfg.stride = stride;
  return slice_dataset(hold, eval_cfg).samples;
}

void cmd_train(const Context& ctx, const TrainOptions& o) {
  require(o.out, "output directory (--out)");
  require_file(o.data, "dataset directory (--data)");
  TrainingFile tf = o.config.empty() ? TrainingFile{} : load_training_config(o.config);
  if (o.epochs >= 0) tf.training.epochs = o.epochs;
  if (o.batch > 0) tf.training.batch_size = o.batch;
  if (o.lr > 0) tf.training.learning_rate = o.lr;
  if (o.seed >= 0) tf.training.seed = static_cast<std::uint64_t>(o.seed);
  if (o.hidden > 0) tf.model.hidden_size = o.hidden;
  if (o.layers > 0) tf.model.num_layers = o.layers;
  tf.training.validate();

  const Skeleton skel = load_skeleton(o.skeleton);
  const Dataset data = load_dataset(o.data, skel);
  std::vector<Sample> train_set;
  const std::vector<Sample> hold = holdout_samples(data, tf.training, tf.training.stride, &train_set);
  if (train_set.empty()) throw ConfigError("train: no training samples (trajectories shorter than one window?)");

  ModelConfig mc = tf.model;
  mc.state_dim = skel.state_dim();
  mc.frame_rate = tf.training.frame_rate;
  auto init = PredictorModel<float>::random(mc, tf.training.seed, 0.1f);
  const auto result = train(std::move(init), train_set, hold, tf.training, [&](const LossRecord& r) {
    ctx.out << "epoch " << r.epoch << " train " << format_fixed(r.train_loss, 4) << " holdout "
            << (std::isfinite(r.holdout_loss) ? format_fixed(r.holdout_loss, 4) : std::string("nan")) << "\n";
  });

  const fs::path dir = o.out;
  fs::create_directories(dir);
  save_model(result.model, dir / "model.mfo");
  write_text_file(dir / "loss_curve.csv", loss_curve_csv(result.curve));
  RunManifest man{"train", ctx.args, tf.training.seed, {}, {}};
  man.add_input("dataset", fs::path(o.data) / "dataset.json");
  if (!o.config.empty()) man.add_input("config", o.config);
  man.add_output("model", dir / "model.mfo");
  man.add_output("loss_curve", dir / "loss_curve.csv");
  write_manifest_file(dir, man);
}

// --- predict / optimize / plan-joint ----------------------------------------

struct PredictOptions {
  std::string model, input, objective, out, skeleton, goal;
  int from = 0, frames = 0, horizon = 0;
};

void cmd_predict(const Context& ctx, const PredictOptions& o) {
  require(o.out, "output directory (--out)");
  const Skeleton skel = load_skeleton(o.skeleton);
  const auto model = load_model_file(o.model, skel);
  require_file(o.input, "input trajectory (--input)");
  const Trajectory in = load_trajectory(o.input, &skel);
  const int horizon = o.horizon > 0 ? o.horizon : 30;
  const auto r = rollout(model, observed_window(in, o.from, o.frames), static_cast<const DeltaInput<double>*>(nullptr),
                         horizon);
  const fs::path dir = o.out;
  save_trajectory(dir / "prediction.csv", Trajectory(model.config.frame_rate, Layout::kHuman, r.states), &skel);
  RunManifest man{"predict", ctx.args, 0, {}, {}};
  man.add_input("model", o.model);
  man.add_input("input", o.input);
  man.add_output("prediction", dir / "prediction.csv");
  write_manifest_file(dir, man);
}

ObjectiveFile objective_with_overrides(const PredictOptions& o) {
  require_file(o.objective, "objective file (--objective)");
  ObjectiveFile f = load_objective(o.objective);
  if (o.horizon > 0) f.spec.horizon = o.horizon;
  if (!o.goal.empty()) f.spec.human_goal = parse_point(o.goal);
  return f;
}

void cmd_optimize(const Context& ctx, const PredictOptions& o) {
  require(o.out, "output directory (--out)");
  const Skeleton skel = load_skeleton(o.skeleton);
  const auto model = load_model_file(o.model, skel);
  require_file(o.input, "input trajectory (--input)");
  const ObjectiveFile f = objective_with_overrides(o);
  const Trajectory in = load_trajectory(o.input, &skel);
  const auto res = optimize_prediction(model, observed_window(in, o.from, o.frames), f.spec, skel, f.lbfgs);

  const fs::path dir = o.out;
  save_trajectory(dir / "optimized.csv", Trajectory(model.config.frame_rate, Layout::kHuman, res.states), &skel);
  write_text_file(dir / "result.json", result_json(res).dump(2) + "\n");
  RunManifest man{"optimize", ctx.args, 0, {}, {}};
  man.add_input("model", o.model);
  man.add_input("input", o.input);
  man.add_input("objective", o.objective);
  man.add_output("optimized", dir / "optimized.csv");
  man.add_output("result", dir / "result.json");
  write_manifest_file(dir, man);
  ctx.out << "termination " << termination_name(res.termination) << " after " << res.iterations
          << " iterations, objective " << format_double(res.value) << "\n";
}

void cmd_plan_joint(const Context& ctx, const PredictOptions& o) {
  require(o.out, "output directory (--out)");
  const Skeleton skel = load_skeleton(o.skeleton);
  const auto model = load_model_file(o.model, skel);
  require_file(o.input, "input trajectory (--input)");
  const ObjectiveFile f = objective_with_overrides(o);
  const Trajectory in = load_trajectory(o.input, &skel);
  JointProblem p;
  p.model = &model;
  p.skeleton = &skel;
  p.observed = observed_window(in, o.from, o.frames);
  p.spec = f.spec;
  p.robot_start = f.robot_start;
  const auto res = optimize_joint(p, f.lbfgs);

  const fs::path dir = o.out;
  const double rate = model.config.frame_rate;
  save_trajectory(dir / "human.csv", Trajectory(rate, Layout::kHuman, res.states), &skel);
  save_trajectory(dir / "robot.csv", Trajectory(rate, Layout::kRobot, *res.robot), nullptr);
  write_text_file(dir / "result.json", result_json(res).dump(2) + "\n");
  RunManifest man{"plan-joint", ctx.args, 0, {}, {}};
  man.add_input("model", o.model);
  man.add_input("input", o.input);
  man.add_input("objective", o.objective);
  man.add_output("human", dir / "human.csv");
  man.add_output("robot", dir / "robot.csv");
  man.add_output("result", dir / "result.json");
  write_manifest_file(dir, man);
  ctx.out << "termination " << termination_name(res.termination) << " after " << res.iterations
          << " iterations, objective " << format_double(res.value) << "\n";
}

// --- eval -------------------------------------------------------------------

struct EvalOptions {
  std::string model, data, config, objective, out, skeleton, horizons;
  int stride = 10;
};

void cmd_eval(const Context& ctx, const EvalOptions& o) {
  require(o.out, "output directory (--out)");
  const Skeleton skel = load_skeleton(o.skeleton);
  const auto model = load_model_file(o.model, skel);
  require_file(o.data, "dataset directory (--data)");
  if (o.stride < 1) throw ConfigError("eval: stride must be >= 1");
  TrainingFile tf = o.config.empty() ? TrainingFile{} : load_training_config(o.config);
  BenchmarkOptions bo;
  if (!o.horizons.empty()) bo.horizons_ms = parse_int_list(o.horizons);
  if (!o.objective.empty()) {
    require_file(o.objective, "objective file (--objective)");
    const ObjectiveFile f = load_objective(o.objective);
    bo.optimize = true;
    bo.objective = f.spec;
    bo.lbfgs = f.lbfgs;
  }
  const Dataset data = load_dataset(o.data, skel);
  const auto samples = holdout_samples(data, tf.training, o.stride, nullptr);
  if (samples.empty()) throw ConfigError("eval: the dataset has no held-out samples");
  const EvalReport report = run_benchmark(model, samples, skel, bo);

  const fs::path dir = o.out;
  write_text_file(dir / "eval_report.csv", report.to_csv());
  RunManifest man{"eval", ctx.args, 0, {}, {}};
  man.add_input("model", o.model);
  man.add_input("dataset", fs::path(o.data) / "dataset.json");
  if (!o.config.empty()) man.add_input("config", o.config);
  if (!o.objective.empty()) man.add_input("objective", o.objective);
  man.add_output("report", dir / "eval_report.csv");
  write_manifest_file(dir, man);
  ctx.out << report.to_csv();
}

// --- trace-export -----------------------------------------------------------

struct TraceOptions {
  std::string result, out;
};

void cmd_trace_export(const Context& ctx, const TraceOptions& o) {
  require(o.out, "output directory (--out)");
  require_file(o.result, "optimization result (--result)");
  std::vector<IterationRecord> trace;
  try {
    const json j = json::parse(read_text_file(o.result));
    if (j.at("format").get<std::string>() != "mfo-result-v1") throw FormatError("unknown result format");
    for (const auto& r : j.at("trace")) {
      trace.push_back({r.at("iteration").get<int>(), r.at("objective").get<double>(),
                       r.at("gradient_norm").get<double>(), r.at("step").get<double>(),
                       r.at("evaluations").get<int>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("result file: ") + e.what());
  }
  const fs::path dir = o.out;
  write_text_file(dir / "trace.csv", trace_to_csv(trace));
  RunManifest man{"trace-export", ctx.args, 0, {}, {}};
  man.add_input("result", o.result);
  man.add_output("trace", dir / "trace.csv");
  write_manifest_file(dir, man);
}

int report_error(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const FormatError*>(&e)) return kExitFormat;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const DimensionError*>(&e)) return kExitDimension;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const TermError*>(&e)) return kExitTerm;
  return kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human motion prediction and trajectory refinement", "mfo"};
  app.require_subcommand(1);
  const Context ctx{args, out, err};
  std::function<void()> action;

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", so.config, "Synthetic spec (JSON)");
  synth->add_option("--kind", so.kind, "reaching | walking | reaching-with-obstacle");
  synth->add_option("--count", so.count, "Number of trajectories");
  synth->add_option("--duration", so.duration, "Seconds per trajectory");
  synth->add_option("--seed", so.seed, "Random seed");
  synth->add_option("--skeleton", so.skeleton, "Skeleton file (JSON)");
  synth->add_option("--out", so.out, "Output dataset directory");
  synth->callback([&] { action = [&] { cmd_synth(ctx, so); }; });

  TrainOptions to;
  auto* tr = app.add_subcommand("train", "Train a predictor on a dataset");
  tr->add_option("--data", to.data, "Dataset directory");
  tr->add_option("--config", to.config, "Training config (JSON)");
  tr->add_option("--epochs", to.epochs);
  tr->add_option("--batch", to.batch);
  tr->add_option("--lr", to.lr);
  tr->add_option("--seed", to.seed);
  tr->add_option("--hidden", to.hidden);
  tr->add_option("--layers", to.layers);
  tr->add_option("--skeleton", to.skeleton);
  tr->add_option("--out", to.out, "Output directory");
  tr->callback([&] { action = [&] { cmd_train(ctx, to); }; });

  PredictOptions po;
  auto add_prediction_options = [&](CLI::App* sub, bool with_objective) {
    sub->add_option("--model", po.model, "Model file");
    sub->add_option("--input", po.input, "Observed trajectory (CSV)");
    sub->add_option("--from", po.from, "First observed frame");
    sub->add_option("--frames", po.frames, "Number of observed frames (default: to the end)");
    sub->add_option("--horizon", po.horizon, "Predicted frames");
    sub->add_option("--skeleton", po.skeleton);
    sub->add_option("--out", po.out, "Output directory");
    if (with_objective) {
      sub->add_option("--objective", po.objective, "Objective file (JSON)");
      sub->add_option("--goal", po.goal, "Human goal override x,y,z");
    }
  };
  auto* pr = app.add_subcommand("predict", "Roll out the learned predictor");
  add_prediction_options(pr, false);
  pr->callback([&] { action = [&] { cmd_predict(ctx, po); }; });
  auto* op = app.add_subcommand("optimize", "Refine a prediction against human objectives");
  add_prediction_options(op, true);
  op->callback([&] { action = [&] { cmd_optimize(ctx, po); }; });
  auto* pj = app.add_subcommand("plan-joint", "Jointly optimize the human prediction and a robot path");
  add_prediction_options(pj, true);
  pj->callback([&] { action = [&] { cmd_plan_joint(ctx, po); }; });

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "Key-joint error table on held-out data");
  ev->add_option("--model", eo.model);
  ev->add_option("--data", eo.data);
  ev->add_option("--config", eo.config, "Training config (windows and holdout)");
  ev->add_option("--objective", eo.objective, "Adds goal-optimized rows");
  ev->add_option("--horizons", eo.horizons, "Comma separated milliseconds");
  ev->add_option("--stride", eo.stride, "Frames between evaluation windows");
  ev->add_option("--skeleton", eo.skeleton);
  ev->add_option("--out", eo.out);
  ev->callback([&] { action = [&] { cmd_eval(ctx, eo); }; });

  TraceOptions tro;
  auto* te = app.add_subcommand("trace-export", "Export an optimization trace as CSV");
  te->add_option("--result", tro.result, "result.json from optimize or plan-joint");
  te->add_option("--out", tro.out);
  te->callback([&] { action = [&] { cmd_trace_export(ctx, tro); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", e.what(), kExitUsage);
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e.kind(), e.what(), exit_code_for(e));
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "io", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), kExitInternal);
  }
}

}  // namespace mfo
