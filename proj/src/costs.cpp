#include "mfo/costs.hpp"

#include <cmath>

#include "mfo/errors.hpp"
#include "mfo/kinematics.hpp"

namespace mfo {

void ObjectiveSpec::validate() const {
  const auto& w = weights;
  for (double v : {w.delta, w.goal, w.obstacle, w.robot_goal, w.robot_obstacle, w.robot_smooth, w.interaction}) {
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("objective: weights must be finite and >= 0");
  }
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ConfigError("objective: alpha must be > 0");
  if (horizon < 1) throw ConfigError("objective: horizon must be >= 1");
  if (w.goal > 0 && !human_goal) throw ConfigError("objective: goal weight set but no human goal given");
  if (w.robot_goal > 0 && !robot_goal) throw ConfigError("objective: robot goal weight set but no robot goal given");
  if (w.robot_smooth > 0 && horizon < 3) throw ConfigError("objective: smoothness needs horizon >= 3");
}

double ObjectiveTerms::weighted_sum(const ObjectiveWeights& w) const {
  return w.delta * delta + w.goal * goal + w.obstacle * obstacle + w.robot_goal * robot_goal +
         w.robot_obstacle * robot_obstacle + w.robot_smooth * robot_smooth + w.interaction * interaction;
}

double cost_delta(const Eigen::MatrixXd& delta, Eigen::MatrixXd* grad) {
  if (grad) *grad = 2.0 * delta;
  return delta.squaredNorm();
}

double cost_goal(const Eigen::Vector3d& final_position, const Eigen::Vector3d& goal, Eigen::Vector3d* grad) {
  const Eigen::Vector3d e = final_position - goal;
  if (grad) *grad = 2.0 * e;
  return e.squaredNorm();
}

double cost_obstacle(const Eigen::Vector3d& anchor, const Eigen::Matrix3Xd& path, const Scene& scene,
                     double alpha, Eigen::Matrix3Xd* grad) {
  const Eigen::Index n = path.cols();
  if (grad) grad->setZero(3, n);
  double total = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Vector3d prev = t == 0 ? anchor : Eigen::Vector3d(path.col(t - 1));
    const Eigen::Vector3d step = path.col(t) - prev;
    const double arc = step.norm();
    if (scene.empty() || arc == 0) continue;
    Eigen::Vector3d g;
    const double sdf = scene.distance(path.col(t), grad ? &g : nullptr);
    const double potential = std::exp(-alpha * sdf);
    total += potential * arc;
    if (grad) {
      grad->col(t) += -alpha * potential * arc * g + potential * step / arc;
      if (t > 0) grad->col(t - 1) -= potential * step / arc;
    }
  }
  return total;
}

double cost_interaction(const Eigen::Vector3d& human_anchor, const Eigen::Matrix3Xd& human,
                        const Eigen::Vector3d& robot_anchor, const Eigen::Matrix3Xd& robot, double alpha,
                        Eigen::Matrix3Xd* grad_human, Eigen::Matrix3Xd* grad_robot) {
  if (human.cols() != robot.cols()) throw DimensionError("interaction: human and robot lengths differ");
  const Eigen::Index n = human.cols();
  if (grad_human) grad_human->setZero(3, n);
  if (grad_robot) grad_robot->setZero(3, n);
  double total = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Vector3d hs = human.col(t) - (t == 0 ? human_anchor : Eigen::Vector3d(human.col(t - 1)));
    const Eigen::Vector3d rs = robot.col(t) - (t == 0 ? robot_anchor : Eigen::Vector3d(robot.col(t - 1)));
    const double dh = hs.norm(), dr = rs.norm();
    if (dh == 0 || dr == 0) continue;
    const Eigen::Vector3d sep = human.col(t) - robot.col(t);
    const double dist = sep.norm();
    const double e = std::exp(-alpha * dist);
    total += e * dh * dr;
    const Eigen::Vector3d dsep = dist > 0 ? Eigen::Vector3d(-alpha * e * dh * dr * sep / dist)
                                          : Eigen::Vector3d::Zero();
    if (grad_human) {
      grad_human->col(t) += dsep + e * dr * hs / dh;
      if (t > 0) grad_human->col(t - 1) -= e * dr * hs / dh;
    }
    if (grad_robot) {
      grad_robot->col(t) += -dsep + e * dh * rs / dr;
      if (t > 0) grad_robot->col(t - 1) -= e * dh * rs / dr;
    }
  }
  return total;
}

Eigen::MatrixXd build_K(int horizon, SmoothnessVariant variant) {
  if (horizon < 3) throw DimensionError("build_K: horizon must be >= 3");
  const int n = horizon;
  if (variant == SmoothnessVariant::kBanded) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      K(i, i) = 6;
      if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = -4;
      if (i + 2 < n) K(i, i + 2) = K(i + 2, i) = 1;
    }
    K(n - 1, n - 1) = 1;
    return K;
  }
  const bool anchored = variant == SmoothnessVariant::kStartAnchored;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(anchored ? n : n - 2, n);
  int row = 0;
  if (anchored) {
    D(row++, 0) = 1;  // (rest, rest, x_1)
    D(row, 0) = -2;   // (rest, x_1, x_2)
    D(row++, 1) = 1;
  }
  for (int i = 0; i + 2 < n; ++i, ++row) {
    D(row, i) = 1;
    D(row, i + 1) = -2;
    D(row, i + 2) = 1;
  }
  return D.transpose() * D;
}

double cost_smooth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& K, Eigen::MatrixXd* grad) {
  if (x.cols() != K.rows() || K.rows() != K.cols()) throw DimensionError("cost_smooth: x must have K.rows() columns");
  const Eigen::MatrixXd xk = x * K;
  if (grad) *grad = xk + x * K.transpose();
  return xk.cwiseProduct(x).sum();
}

PointPath human_point_path(const Skeleton& skel, const Eigen::VectorXd& last_observed,
                           const Eigen::MatrixXd& predicted, int joint, bool with_jacobians) {
  PointPath out;
  out.anchor = forward_kinematics(skel, last_observed).col(joint);
  out.points.resize(3, predicted.cols());
  if (with_jacobians) out.jacobians.reserve(static_cast<size_t>(predicted.cols()));
  for (Eigen::Index t = 0; t < predicted.cols(); ++t) {
    auto pj = joint_position_jacobian(skel, predicted.col(t), joint);
    out.points.col(t) = pj.position;
    if (with_jacobians) out.jacobians.push_back(std::move(pj.jacobian));
  }
  return out;
}

PointPath base_point_path(const Eigen::VectorXd& last_observed, const Eigen::MatrixXd& predicted) {
  PointPath out;
  out.anchor = last_observed.head<3>();
  out.points = predicted.topRows<3>();
  return out;
}

namespace {

// Adds J_t^T g_t into the state gradient for every step of a point path.
void pull_back(const PointPath& path, bool is_base, const Eigen::Matrix3Xd& g, Eigen::MatrixXd& dstates) {
  for (Eigen::Index t = 0; t < g.cols(); ++t) {
    if (is_base) {
      dstates.col(t).head<3>() += g.col(t);
    } else {
      dstates.col(t).noalias() += path.jacobians[static_cast<size_t>(t)].transpose() * g.col(t);
    }
  }
}

template <typename F>
auto attribute(const char* term, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const TermError&) {
    throw;
  } catch (const std::exception& e) {
    throw TermError(term, e.what());
  }
}

}  // namespace

ObjectiveEvaluation total_objective(const Eigen::MatrixXd& delta, const Eigen::Matrix3Xd* robot,
                                    const ObjectiveSpec& spec, const ObjectiveContext& ctx, bool with_gradient) {
  spec.validate();
  if (!ctx.model || !ctx.skeleton) throw ConfigError("objective: missing model or skeleton");
  const auto& model = *ctx.model;
  const auto& skel = *ctx.skeleton;
  const auto& w = spec.weights;
  const int horizon = spec.horizon;
  const Eigen::Index d = model.config.state_dim;
  if (delta.rows() != d || delta.cols() != horizon) {
    throw DimensionError("objective: delta must be state_dim x horizon");
  }
  if (ctx.observed.rows() != d) throw DimensionError("objective: observed state dimension");
  if (d != skel.state_dim()) throw DimensionError("objective: model and skeleton dimensions differ");
  const bool robot_terms = w.robot_goal > 0 || w.robot_obstacle > 0 || w.robot_smooth > 0 || w.interaction > 0;
  if (robot_terms && !robot) throw ConfigError("objective: robot terms enabled without a robot trajectory");
  if (robot && robot->cols() != horizon) throw DimensionError("objective: robot horizon differs from human horizon");

  ObjectiveEvaluation ev;
  const DeltaInput<double> din{delta, {}};
  ev.rollout = attribute("rollout", [&] { return rollout(model, ctx.observed, &din, horizon); });
  const Eigen::MatrixXd& pred = ev.rollout.states;
  const Eigen::VectorXd last = ctx.observed.col(ctx.observed.cols() - 1);

  Eigen::MatrixXd dstates = Eigen::MatrixXd::Zero(d, horizon);
  ev.grad_delta = Eigen::MatrixXd::Zero(d, horizon);
  if (robot) ev.grad_robot = Eigen::Matrix3Xd::Zero(3, horizon);

  const bool need_ee = w.goal > 0 || w.obstacle > 0 ||
                       (w.interaction > 0 && spec.interaction_point == InteractionPoint::kEndEffector);
  PointPath ee;
  if (need_ee) {
    const char* term = w.goal > 0 ? "goal" : w.obstacle > 0 ? "obstacle" : "interaction";
    ee = attribute(term, [&] {
      return human_point_path(skel, last, pred, skel.end_effector(spec.end_effector), with_gradient);
    });
  }

  if (w.delta > 0) {
    Eigen::MatrixXd g;
    ev.terms.delta = cost_delta(delta, with_gradient ? &g : nullptr);
    if (with_gradient) ev.grad_delta += w.delta * g;
  }
  if (w.goal > 0) {
    Eigen::Vector3d g;
    ev.terms.goal = cost_goal(ee.points.col(horizon - 1), *spec.human_goal, with_gradient ? &g : nullptr);
    if (with_gradient) {
      dstates.col(horizon - 1).noalias() += w.goal * ee.jacobians.back().transpose() * g;
    }
  }
  if (w.obstacle > 0) {
    Eigen::Matrix3Xd g;
    ev.terms.obstacle = attribute("obstacle", [&] {
      return cost_obstacle(ee.anchor, ee.points, spec.scene, spec.alpha, with_gradient ? &g : nullptr);
    });
    if (with_gradient) pull_back(ee, false, w.obstacle * g, dstates);
  }

  if (robot) {
    const Eigen::Matrix3Xd& x = *robot;
    if (w.robot_goal > 0) {
      Eigen::Vector3d g;
      ev.terms.robot_goal = cost_goal(x.col(horizon - 1), *spec.robot_goal, with_gradient ? &g : nullptr);
      if (with_gradient) ev.grad_robot.col(horizon - 1) += w.robot_goal * g;
    }
    if (w.robot_obstacle > 0) {
      Eigen::Matrix3Xd g;
      ev.terms.robot_obstacle = attribute("robot_obstacle", [&] {
        return cost_obstacle(ctx.robot_start, x, spec.scene, spec.alpha, with_gradient ? &g : nullptr);
      });
      if (with_gradient) ev.grad_robot += w.robot_obstacle * g;
    }
    if (w.robot_smooth > 0) {
      Eigen::MatrixXd g;
      const Eigen::MatrixXd K = build_K(horizon, spec.smoothness);
      const Eigen::MatrixXd rel = x.colwise() - ctx.robot_start;
      ev.terms.robot_smooth = attribute("robot_smooth", [&] {
        return cost_smooth(rel, K, with_gradient ? &g : nullptr);
      });
      if (with_gradient) ev.grad_robot += w.robot_smooth * g;
    }
    if (w.interaction > 0) {
      const bool base = spec.interaction_point == InteractionPoint::kBase;
      const PointPath hp = base ? base_point_path(last, pred) : ee;
      Eigen::Matrix3Xd gh, gr;
      ev.terms.interaction = attribute("interaction", [&] {
        return cost_interaction(hp.anchor, hp.points, ctx.robot_start, x, spec.alpha,
                                with_gradient ? &gh : nullptr, with_gradient ? &gr : nullptr);
      });
      if (with_gradient) {
        pull_back(hp, base, w.interaction * gh, dstates);
        ev.grad_robot += w.interaction * gr;
      }
    }
  }

  ev.value = ev.terms.weighted_sum(w);
  if (with_gradient && (w.goal > 0 || w.obstacle > 0 || (robot && w.interaction > 0))) {
    ev.grad_delta += attribute("rollout", [&] { return grad_delta(model, ev.rollout, dstates); });
  }
  return ev;
}

}  // namespace mfo
