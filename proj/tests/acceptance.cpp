// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any fails. Arguments, when given, select criteria by number.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfo/costs.hpp"
#include "mfo/dataio.hpp"
#include "mfo/evaluation.hpp"
#include "mfo/kinematics.hpp"
#include "mfo/lbfgs.hpp"
#include "mfo/manifest.hpp"
#include "mfo/optimize.hpp"
#include "mfo/rotation.hpp"
#include "mfo/synthetic.hpp"
#include "mfo/training.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace mfo;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// --- shared reaching model ---------------------------------------------------

struct ReachingSetup {
  Skeleton skel = Skeleton::default_human();
  PredictorModel<double> model;
  std::vector<Sample> holdout;
  double train_seconds = 0;
  TrainingConfig cfg;
};

const ReachingSetup& reaching() {
  static std::optional<ReachingSetup> setup;
  if (setup) return *setup;
  setup.emplace();
  ReachingSetup& s = *setup;

  SyntheticSpec spec;
  spec.kind = SyntheticKind::kReaching;
  spec.count = 40;
  spec.duration = 3.0;
  spec.seed = 11;
  const Dataset data = generate_synthetic(spec, s.skel);

  s.cfg.learning_rate = 1e-3;
  s.cfg.epochs = 30;
  s.cfg.stride = 2;
  s.cfg.seed = 5;
  s.cfg.holdout_fraction = 0.2;
  std::vector<Trajectory> train_traj, hold_traj;
  split_holdout(data.trajectories, s.cfg.holdout_fraction, train_traj, hold_traj);
  const auto train_set = slice_dataset(train_traj, s.cfg).samples;
  TrainingConfig eval_cfg = s.cfg;
  eval_cfg.stride = 3;
  s.holdout = slice_dataset(hold_traj, eval_cfg).samples;

  ModelConfig mc;
  mc.state_dim = s.skel.state_dim();
  mc.frame_rate = s.cfg.frame_rate;
  const auto t0 = Clock::now();
  auto trained = train(PredictorModel<float>::random(mc, s.cfg.seed, 0.1f), train_set, s.holdout, s.cfg);
  s.train_seconds = seconds_since(t0);
  s.model = trained.model.cast<double>();
  return s;
}

Eigen::MatrixXd observed_window(const Trajectory& t, int from, int frames) {
  return t.states.middleCols(from, frames);
}

// --- 1: gradient correctness ---------------------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  const Skeleton skel = testing::tiny_arm();
  constexpr int T = 10;
  double worst_delta = 0, worst_robot = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = PredictorModel<double>::random(testing::tiny_config(12, 32), seed, 0.5);
    ObjectiveContext ctx;
    ctx.model = &model;
    ctx.skeleton = &skel;
    ctx.observed = testing::random_observed(12, 6, 100 + seed, 0.04);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    auto rv = [&] { return Eigen::Vector3d(u(rng), u(rng), u(rng)); };
    ctx.robot_start = 0.5 * rv();

    ObjectiveSpec spec;
    spec.horizon = T;
    spec.alpha = 3.0;
    spec.human_goal = 0.5 * rv();
    spec.robot_goal = 0.5 * rv();
    spec.interaction_point = seed % 2 ? InteractionPoint::kEndEffector : InteractionPoint::kBase;
    spec.smoothness = seed % 3 == 0 ? SmoothnessVariant::kStartAnchored : SmoothnessVariant::kFree;
    const Eigen::Vector3d wrist = forward_kinematics(skel, ctx.observed.col(5)).col(1);
    spec.scene = Scene({Sphere{wrist + 0.1 * rv(), 0.25}, Sphere{ctx.robot_start + 0.1 * rv(), 0.2}});
    spec.weights = {0.3, 1.0, 0.7, 1.1, 0.6, 0.2, 0.9};

    Eigen::MatrixXd delta(12, T);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta.data()[i] = 0.05 * u(rng);
    Eigen::Matrix3Xd robot(3, T);
    for (int t = 0; t < T; ++t) robot.col(t) = ctx.robot_start + (t + 1) * 0.05 * Eigen::Vector3d(-1, 0.6, 0.1) + 0.01 * rv();

    const auto ev = total_objective(delta, &robot, spec, ctx);
    auto f_delta = [&](const Eigen::VectorXd& v) {
      return total_objective(Eigen::Map<const Eigen::MatrixXd>(v.data(), 12, T), &robot, spec, ctx, false).value;
    };
    auto f_robot = [&](const Eigen::VectorXd& v) {
      const Eigen::Matrix3Xd x = Eigen::Map<const Eigen::Matrix3Xd>(v.data(), 3, T);
      return total_objective(delta, &x, spec, ctx, false).value;
    };
    const Eigen::VectorXd gd = Eigen::Map<const Eigen::VectorXd>(ev.grad_delta.data(), ev.grad_delta.size());
    const Eigen::VectorXd gr = Eigen::Map<const Eigen::VectorXd>(ev.grad_robot.data(), ev.grad_robot.size());
    const Eigen::VectorXd fd_d = testing::numeric_gradient(f_delta, Eigen::Map<const Eigen::VectorXd>(delta.data(), delta.size()), 1e-6);
    const Eigen::VectorXd fd_r = testing::numeric_gradient(f_robot, Eigen::Map<const Eigen::VectorXd>(robot.data(), robot.size()), 1e-6);
    worst_delta = std::max(worst_delta, testing::relative_error(gd, fd_d));
    worst_robot = std::max(worst_robot, testing::relative_error(gr, fd_r));
  }
  const double secs = seconds_since(t0);
  return {worst_delta < 1e-4 && worst_robot < 1e-4 && secs < 30,
          "max rel err dC/ddelta " + fmt(worst_delta, 3) + ", dC/dx " + fmt(worst_robot, 3) + ", " + fmt(secs, 3) + " s"};
}

// --- 2: goal-set refinement ----------------------------------------------------

Outcome goal_refinement() {
  const ReachingSetup& s = reaching();
  SyntheticSpec spec;
  spec.count = 20;
  spec.duration = 3.0;
  spec.seed = 202;
  const Dataset data = generate_synthetic(spec, s.skel);
  const int wrist = s.skel.end_effector("right_wrist");
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> dist(0.05, 0.20);
  LbfgsConfig cfg;
  cfg.max_iterations = 100;

  int reached = 0;
  bool monotone = true;
  double worst = 0;
  for (int i = 0; i < spec.count; ++i) {
    const Eigen::MatrixXd obs = observed_window(data.trajectories[static_cast<size_t>(i)], 15, 30);
    ObjectiveSpec os;
    os.horizon = 30;
    os.weights = {1e-2, 1, 0, 0, 0, 0, 0};
    const auto r0 = rollout<double>(s.model, obs, nullptr, os.horizon);
    const Eigen::Vector3d end0 = forward_kinematics(s.skel, r0.states.col(os.horizon - 1)).col(wrist);
    Eigen::Vector3d dir(n(rng), n(rng), n(rng));
    dir.normalize();
    os.human_goal = end0 + dist(rng) * dir;

    const auto r = optimize_prediction(s.model, obs, os, s.skel, cfg);
    const Eigen::Vector3d end = forward_kinematics(s.skel, r.states.col(os.horizon - 1)).col(wrist);
    const double err = (end - *os.human_goal).norm();
    worst = std::max(worst, err);
    if (err < 0.01 && r.iterations <= 100) ++reached;
    if (cost_goal(end, *os.human_goal) > cost_goal(end0, *os.human_goal)) monotone = false;
  }
  return {reached >= 18 && monotone, std::to_string(reached) + "/20 within 1 cm, worst " + fmt(worst * 100, 3) +
                                         " cm, goal cost " + (monotone ? "never increased" : "increased")};
}

// --- 3: prediction ordering ----------------------------------------------------

Outcome prediction_ordering() {
  const ReachingSetup& s = reaching();
  BenchmarkOptions bo;
  bo.optimize = true;
  bo.objective.weights = {1e-2, 1, 0, 0, 0, 0, 0};
  bo.objective.horizon = 30;
  const EvalReport rep = run_benchmark(s.model, s.holdout, s.skel, bo);
  const auto& zv = rep.row("zerovel").values;
  const auto& md = rep.row("model").values;
  const auto& op = rep.row("optimized").values;
  bool pass = s.train_seconds <= 600;
  std::string detail = "train " + fmt(s.train_seconds, 3) + " s;";
  for (size_t h = 0; h < rep.horizons_ms.size(); ++h) {
    pass = pass && md[h] < zv[h];
    if (rep.horizons_ms[h] >= 500) pass = pass && op[h] <= md[h];
    detail += " " + std::to_string(rep.horizons_ms[h]) + ":" + fmt(zv[h], 3) + "/" + fmt(md[h], 3) + "/" + fmt(op[h], 3);
  }
  return {pass, detail + " (zerovel/model/optimized, m)"};
}

// --- 4: obstacle avoidance -----------------------------------------------------

double min_sdf(const Scene& scene, const Eigen::Matrix3Xd& path) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < path.cols(); ++t) m = std::min(m, scene.distance(path.col(t)));
  return m;
}

Eigen::Matrix3Xd wrist_path(const Skeleton& skel, const Eigen::MatrixXd& states, int wrist) {
  Eigen::Matrix3Xd p(3, states.cols());
  for (Eigen::Index t = 0; t < states.cols(); ++t) p.col(t) = forward_kinematics(skel, states.col(t)).col(wrist);
  return p;
}

// Point at half the arc length of a path that starts at `anchor`.
Eigen::Vector3d arc_midpoint(const Eigen::Vector3d& anchor, const Eigen::Matrix3Xd& path) {
  std::vector<double> cum{0};
  Eigen::Vector3d prev = anchor;
  for (Eigen::Index t = 0; t < path.cols(); ++t) {
    cum.push_back(cum.back() + (path.col(t) - prev).norm());
    prev = path.col(t);
  }
  const auto it = std::lower_bound(cum.begin(), cum.end(), cum.back() / 2);
  const Eigen::Index k = std::max<Eigen::Index>(1, it - cum.begin());
  return path.col(k - 1);
}

Outcome obstacle_avoidance() {
  const ReachingSetup& s = reaching();
  SyntheticSpec spec;
  spec.count = 20;
  spec.seed = 404;
  const Dataset data = generate_synthetic(spec, s.skel);
  const int wrist = s.skel.end_effector("right_wrist");
  constexpr int kHorizon = 30, kObserved = 30;
  constexpr double kRadius = 0.08;

  int tried = 0, passed = 0;
  std::string detail;
  for (const Trajectory& traj : data.trajectories) {
    if (tried == 3) break;
    // Observation window whose unperturbed prediction moves the wrist most.
    Eigen::MatrixXd obs;
    Eigen::Matrix3Xd p0;
    double best = 0;
    for (int from = 0; from + kObserved <= traj.frames(); from += 3) {
      const Eigen::MatrixXd o = observed_window(traj, from, kObserved);
      const Eigen::Matrix3Xd p = wrist_path(s.skel, rollout<double>(s.model, o, nullptr, kHorizon).states, wrist);
      const Eigen::Vector3d anchor = forward_kinematics(s.skel, o.col(kObserved - 1)).col(wrist);
      const double len = (p.col(0) - anchor).norm() + (p.rightCols(kHorizon - 1) - p.leftCols(kHorizon - 1)).colwise().norm().sum();
      if (len > best) {
        best = len;
        obs = o;
        p0 = p;
      }
    }
    if (best < 0.3) continue;
    const Eigen::Vector3d anchor = forward_kinematics(s.skel, obs.col(kObserved - 1)).col(wrist);
    const Eigen::Vector3d center = arc_midpoint(anchor, p0);
    if ((anchor - center).norm() < kRadius + 0.05 || (p0.col(kHorizon - 1) - center).norm() < kRadius + 0.05) continue;
    ++tried;

    ObjectiveSpec os;
    os.horizon = kHorizon;
    os.alpha = 20;
    os.weights = {1e-2, 1, 1, 0, 0, 0, 0};
    os.human_goal = p0.col(kHorizon - 1);
    os.scene = Scene({Sphere{center, kRadius}});
    const double sdf0 = min_sdf(os.scene, p0);

    ObjectiveContext ctx;
    ctx.model = &s.model;
    ctx.skeleton = &s.skel;
    ctx.observed = obs;
    const double c0 = total_objective(Eigen::MatrixXd::Zero(obs.rows(), kHorizon), nullptr, os, ctx, false).value;
    LbfgsConfig cfg;
    cfg.max_iterations = 300;
    const auto r = optimize_prediction(s.model, obs, os, s.skel, cfg);
    const Eigen::Matrix3Xd p = wrist_path(s.skel, r.states, wrist);
    const double sdf = min_sdf(os.scene, p);
    const double goal_err = (p.col(kHorizon - 1) - *os.human_goal).norm();
    const bool ok = sdf0 < -0.02 && sdf >= 0 && goal_err < 0.02 && r.value < c0;
    passed += ok;
    detail += (detail.empty() ? "" : "; ") + std::string("sdf ") + fmt(sdf0 * 100, 3) + "->" + fmt(sdf * 100, 3) +
              " cm, goal " + fmt(goal_err * 100, 3) + " cm, C " + fmt(c0, 3) + "->" + fmt(r.value, 3);
  }
  return {tried == 3 && passed == 3, std::to_string(passed) + "/" + std::to_string(tried) + " scenarios: " + detail};
}

// --- 5: joint coordination -----------------------------------------------------

Outcome joint_coordination() {
  // The human walks along +x at 4 cm/frame (a constant-velocity predictor);
  // the robot crosses along +y at the same height. The robot-only plan starts
  // from rest, so the human line is placed where that plan is at mid-horizon.
  const Skeleton skel = Skeleton::default_human();
  ModelConfig mc;
  mc.state_dim = skel.state_dim();
  auto model = PredictorModel<double>::zeros(mc);
  const double v = 0.04, h = 0.95;
  const int T = 30, obs_frames = 10;
  model.out_b(0, 0) = v;
  const int wrist = skel.end_effector("right_wrist");

  JointProblem pb;
  pb.model = &model;
  pb.skeleton = &skel;
  pb.robot_start = {0, -v * T / 2.0, h};
  pb.spec.horizon = T;
  pb.spec.alpha = 10;
  pb.spec.robot_goal = Eigen::Vector3d(0, v * T / 2.0, h);
  pb.spec.smoothness = SmoothnessVariant::kStartAnchored;
  pb.spec.interaction_point = InteractionPoint::kBase;
  pb.spec.weights = {1e-2, 1, 0, 1, 0, 1, 0};
  LbfgsConfig cfg;
  cfg.max_iterations = 2000;

  auto place_human = [&](double y) {
    pb.observed = Eigen::MatrixXd::Zero(skel.state_dim(), obs_frames);
    for (int t = 0; t < obs_frames; ++t) {
      pb.observed(0, t) = -v * (T / 2.0) - v * (obs_frames - 1 - t);
      pb.observed(1, t) = y;
      pb.observed(2, t) = h;
    }
    const auto r0 = rollout<double>(model, pb.observed, nullptr, T);
    pb.spec.human_goal = forward_kinematics(skel, r0.states.col(T - 1)).col(wrist);
  };
  place_human(0);
  place_human((*optimize_joint(pb, cfg).robot)(1, T / 2 - 1));

  auto min_distance = [](const OptimizationResult& r) {
    return (r.states.topRows<3>() - *r.robot).colwise().norm().minCoeff();
  };
  auto goal_error = [&](const OptimizationResult& r) {
    const double hg = (forward_kinematics(skel, r.states.col(T - 1)).col(wrist) - *pb.spec.human_goal).norm();
    const double rg = (r.robot->col(T - 1) - *pb.spec.robot_goal).norm();
    return std::max(hg, rg);
  };
  const auto off = optimize_joint(pb, cfg);
  pb.spec.weights.interaction = 1;
  const auto on = optimize_joint(pb, cfg);

  const double d_off = min_distance(off), d_on = min_distance(on);
  const double g_on = goal_error(on);
  const double smooth_ratio = on.terms.robot_smooth / off.terms.robot_smooth;
  const bool pass = d_off < 0.1 && d_on > 0.3 && g_on < 0.05 && goal_error(off) < 0.05 && smooth_ratio < 1.5;
  return {pass, "min distance " + fmt(d_off, 3) + " m -> " + fmt(d_on, 3) + " m, goal error " + fmt(g_on * 100, 3) +
                    " cm, robot smoothness x" + fmt(smooth_ratio, 3)};
}

// --- 6: smoothness operator ----------------------------------------------------

Outcome smoothness_operator() {
  bool stencil_ok = true;
  double worst_eig = 0, worst_cost = 0;
  for (int T : {3, 4, 5, 10, 30, 60}) {
    const Eigen::MatrixXd K = build_K(T);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, T, 0.7), lin(3, T);
    for (int t = 0; t < T; ++t) lin.col(t) = Eigen::Vector3d(0.1, -2, 0.5) + t * Eigen::Vector3d(0.3, 0.01, -0.2);
    worst_cost = std::max({worst_cost, std::abs(cost_smooth(c, K)), std::abs(cost_smooth(lin, K))});
    if (T >= 5) {
      Eigen::RowVectorXd stencil(5);
      stencil << 1, -4, 6, -4, 1;
      for (int i = 2; i + 2 < T; ++i) stencil_ok = stencil_ok && K.row(i).segment(i - 2, 5) == stencil;
    }
  }
  return {stencil_ok && worst_eig >= -1e-10 && worst_cost < 1e-10,
          "min eigenvalue " + fmt(worst_eig, 3) + ", constant/linear cost " + fmt(worst_cost, 3) + ", interior stencil " +
              (stencil_ok ? "matches" : "differs")};
}

// --- 7: optimizer benchmark ----------------------------------------------------

Outcome optimizer_benchmark() {
  LbfgsConfig cfg;
  cfg.max_iterations = 200;
  cfg.gradient_tolerance = 1e-10;
  cfg.relative_decrease_tolerance = 0;
  auto rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  const auto r = lbfgs_minimize(rosen, Eigen::Vector2d(-1.2, 1.0), cfg);
  const double rosen_err = (r.x - Eigen::Vector2d(1, 1)).norm();

  // Isotropic quadratics c |x - a|^2 from x0 = 0, default settings.
  int worst_iters = 0;
  double worst_quad = 0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (int dim : {1, 2, 3, 10, 66}) {
    for (double c : {0.01, 1.0, 100.0, 1e4}) {
      const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(dim, [&] { return 3 * n(rng); });
      auto quad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2 * c * (x - a);
        return c * (x - a).squaredNorm();
      };
      const auto q = lbfgs_minimize(quad, Eigen::VectorXd::Zero(dim));
      worst_iters = std::max(worst_iters, q.termination == Termination::kConverged ? q.iterations : 1000);
      worst_quad = std::max(worst_quad, (q.x - a).norm());
    }
  }
  return {rosen_err < 1e-6 && r.iterations <= 200 && worst_iters <= 3 && worst_quad < 1e-8,
          "Rosenbrock error " + fmt(rosen_err, 3) + " in " + std::to_string(r.iterations) +
              " iterations, quadratics in <= " + std::to_string(worst_iters) + " (error " + fmt(worst_quad, 3) + ")"};
}

// --- 8: kinematics suite -------------------------------------------------------

Outcome kinematics_suite() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  double worst_round = 0, worst_equiv = 0;
  bool antipodal_exact = true;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d v(u(rng), u(rng), u(rng));
    const ExpMap<double> e(v);
    const auto q = expmap_to_quat(e);
    const Eigen::Vector3d back = quat_to_expmap(q).vector();
    worst_round = std::max(worst_round, (rotation_matrix(back) - testing::axis_angle_matrix(v)).cwiseAbs().maxCoeff());
    worst_round = std::max(worst_round, quat_loss_pair(expmap_to_quat(back), q));
    const auto p = expmap_to_quat(Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const Quat<double> neg(-q.w(), -q.x(), -q.y(), -q.z());
    antipodal_exact = antipodal_exact && quat_loss_pair(q, p) == quat_loss_pair(neg, p) &&
                      quat_loss_pair(q, neg) == quat_loss_pair(q, q);
  }
  const Skeleton skel = Skeleton::default_human();
  std::uniform_real_distribution<double> a(-1.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(skel.state_dim());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = k < 3 ? u(rng) : a(rng);
    const Eigen::Matrix3Xd p0 = forward_kinematics(skel, x);
    const Eigen::Vector3d d(u(rng), u(rng), u(rng));
    Eigen::VectorXd xt = x;
    xt.head<3>() += d;
    worst_equiv = std::max(worst_equiv, ((forward_kinematics(skel, xt).colwise() - d) - p0).cwiseAbs().maxCoeff());
    const Eigen::Matrix3d R = testing::axis_angle_matrix(Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const Eigen::AngleAxisd composed(R * testing::axis_angle_matrix(x.segment<3>(3)));
    Eigen::VectorXd xr = x;
    xr.segment<3>(3) = composed.angle() * composed.axis();
    const Eigen::Vector3d b = x.head<3>();
    const Eigen::Matrix3Xd expected = (R * (p0.colwise() - b)).colwise() + b;
    worst_equiv = std::max(worst_equiv, (forward_kinematics(skel, xr) - expected).cwiseAbs().maxCoeff());
  }
  return {worst_round < 1e-9 && worst_equiv < 1e-9 && antipodal_exact,
          "round trip " + fmt(worst_round, 3) + ", equivariance " + fmt(worst_equiv, 3) + ", antipodal " +
              (antipodal_exact ? "exact" : "inexact")};
}

// --- 9: determinism ------------------------------------------------------------

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int run_binary(const std::vector<std::string>& args) {
  std::string cmd = shell_quote(MFO_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "mfo_acceptance_determinism";
  fs::remove_all(root);
  auto p = [&](const std::string& rel) { return (root / rel).string(); };
  auto cfg = [](const std::string& name) { return (fs::path(MFO_CONFIG_DIR) / name).string(); };
  const std::vector<std::vector<std::string>> pipeline = {
      {"synth", "--count", "8", "--duration", "2.5", "--seed", "9", "--out", p("data")},
      {"synth", "--kind", "reaching-with-obstacle", "--count", "2", "--duration", "4", "--seed", "4", "--out",
       p("obstacle")},
      {"train", "--data", p("data"), "--config", cfg("training.json"), "--epochs", "2", "--hidden", "8", "--out",
       p("train")},
      {"predict", "--model", p("train/model.mfo"), "--input", p("data/traj_0000.csv"), "--frames", "30", "--out",
       p("predict")},
      {"optimize", "--model", p("train/model.mfo"), "--input", p("data/traj_0001.csv"), "--frames", "30",
       "--objective", cfg("objective.json"), "--out", p("optimize")},
      {"plan-joint", "--model", p("train/model.mfo"), "--input", p("data/traj_0002.csv"), "--frames", "30",
       "--objective", cfg("joint.json"), "--out", p("joint")},
      {"eval", "--model", p("train/model.mfo"), "--data", p("data"), "--objective", cfg("objective.json"), "--out",
       p("eval")},
      {"trace-export", "--result", p("optimize/result.json"), "--out", p("trace")},
  };
  const char* dirs[] = {"data", "obstacle", "train", "predict", "optimize", "joint", "eval", "trace"};
  for (const auto& args : pipeline) {
    if (const int code = run_binary(args); code != 0) {
      return {false, args.front() + " exited with " + std::to_string(code)};
    }
  }
  // Rerun every command from the arguments its manifest recorded, then check
  // each recorded output hash.
  int files = 0, csvs = 0, mismatched = 0;
  for (const char* d : dirs) {
    const RunManifest m = RunManifest::from_json_text(read_text_file(root / d / "run_manifest.json"));
    if (const int code = run_binary(m.args); code != 0) {
      return {false, "rerun of " + m.command + " exited with " + std::to_string(code)};
    }
    for (const auto& o : m.outputs) {
      ++files;
      if (fs::path(o.path).extension() == ".csv") ++csvs;
      if (file_hash(o.path) != o.hash) ++mismatched;
    }
  }
  fs::remove_all(root);
  return {mismatched == 0 && csvs > 0, std::to_string(pipeline.size()) + " commands rerun, " + std::to_string(files) +
                                           " outputs (" + std::to_string(csvs) + " CSV), " +
                                           std::to_string(mismatched) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"objective gradients match finite differences", gradients},
      {"goal-set refinement", goal_refinement},
      {"prediction ordering against baselines", prediction_ordering},
      {"obstacle avoidance", obstacle_avoidance},
      {"joint human-robot coordination", joint_coordination},
      {"smoothness operator", smoothness_operator},
      {"optimizer benchmark", optimizer_benchmark},
      {"kinematics suite", kinematics_suite},
      {"CLI determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << " ["
              << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
