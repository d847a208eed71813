#include "mfo/optimize.hpp"

#include "mfo/errors.hpp"

namespace mfo {

namespace {

OptimizationResult finish(const LbfgsResult& res, const ObjectiveEvaluation& ev) {
  OptimizationResult out;
  out.states = ev.rollout.states;
  out.value = res.value;
  out.terms = ev.terms;
  out.trace = res.trace;
  out.termination = res.termination;
  out.iterations = res.iterations;
  out.gradient_norm = res.gradient.norm();
  return out;
}

}  // namespace

OptimizationResult optimize_prediction(const PredictorModel<double>& model, const Eigen::MatrixXd& observed,
                                       const ObjectiveSpec& spec, const Skeleton& skeleton,
                                       const LbfgsConfig& cfg) {
  spec.validate();
  if (!spec.human_only()) throw ConfigError("optimize: robot and interaction weights must be zero");
  const ObjectiveContext ctx{&model, &skeleton, observed, Eigen::Vector3d::Zero()};
  const Eigen::Index d = model.config.state_dim, t = spec.horizon;

  auto f = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
    const Eigen::MatrixXd delta = Eigen::Map<const Eigen::MatrixXd>(z.data(), d, t);
    const auto ev = total_objective(delta, nullptr, spec, ctx, true);
    g = Eigen::Map<const Eigen::VectorXd>(ev.grad_delta.data(), ev.grad_delta.size());
    return ev.value;
  };
  const LbfgsResult res = lbfgs_minimize(f, Eigen::VectorXd::Zero(d * t), cfg);

  const Eigen::MatrixXd delta = Eigen::Map<const Eigen::MatrixXd>(res.x.data(), d, t);
  OptimizationResult out = finish(res, total_objective(delta, nullptr, spec, ctx, false));
  out.delta = delta;
  return out;
}

Eigen::Matrix3Xd straight_line(const Eigen::Vector3d& start, const Eigen::Vector3d& goal, int horizon) {
  if (horizon < 1) throw DimensionError("straight_line: horizon must be >= 1");
  Eigen::Matrix3Xd x(3, horizon);
  for (int k = 1; k <= horizon; ++k) x.col(k - 1) = start + (static_cast<double>(k) / horizon) * (goal - start);
  return x;
}

OptimizationResult optimize_joint(const JointProblem& problem, const LbfgsConfig& cfg) {
  if (!problem.model || !problem.skeleton) throw ConfigError("plan: missing model or skeleton");
  const ObjectiveSpec& spec = problem.spec;
  spec.validate();
  const Eigen::Index d = problem.model->config.state_dim, t = spec.horizon;

  Eigen::Matrix3Xd x0;
  if (problem.robot_init) {
    x0 = *problem.robot_init;
  } else if (spec.robot_goal) {
    x0 = straight_line(problem.robot_start, *spec.robot_goal, static_cast<int>(t));
  } else {
    x0 = problem.robot_start.replicate(1, t);
  }
  if (x0.cols() != t) throw DimensionError("plan: robot horizon differs from human horizon");

  const ObjectiveContext ctx{problem.model, problem.skeleton, problem.observed, problem.robot_start};
  const Eigen::Index nd = d * t;
  auto unpack = [&](const Eigen::VectorXd& z, Eigen::MatrixXd& delta, Eigen::Matrix3Xd& x) {
    delta = Eigen::Map<const Eigen::MatrixXd>(z.data(), d, t);
    x = Eigen::Map<const Eigen::Matrix3Xd>(z.data() + nd, 3, t);
  };
  auto f = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
    Eigen::MatrixXd delta;
    Eigen::Matrix3Xd x;
    unpack(z, delta, x);
    const auto ev = total_objective(delta, &x, spec, ctx, true);
    g.resize(z.size());
    g.head(nd) = Eigen::Map<const Eigen::VectorXd>(ev.grad_delta.data(), nd);
    g.tail(3 * t) = Eigen::Map<const Eigen::VectorXd>(ev.grad_robot.data(), 3 * t);
    return ev.value;
  };

  Eigen::VectorXd z0(nd + 3 * t);
  z0.head(nd).setZero();
  z0.tail(3 * t) = Eigen::Map<const Eigen::VectorXd>(x0.data(), 3 * t);
  const LbfgsResult res = lbfgs_minimize(f, z0, cfg);

  Eigen::MatrixXd delta;
  Eigen::Matrix3Xd x;
  unpack(res.x, delta, x);
  OptimizationResult out = finish(res, total_objective(delta, &x, spec, ctx, false));
  out.delta = std::move(delta);
  out.robot = std::move(x);
  return out;
}

}  // namespace mfo
