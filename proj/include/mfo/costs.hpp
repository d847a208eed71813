#pragma once

// Cost terms of the refinement objective and their gradients.
//
//   c(delta, x) = w1 |delta|^2 + w2 goal(delta) + w3 obstacle(delta)      (human)
//               + w4 goal_R(x) + w5 obstacle_R(x) + w6 smooth(x)          (robot)
//               + w7 interaction(delta, x)                                (coupling)
//
// Human positions come from forward kinematics of the predicted states; the
// robot is a point trajectory (identity kinematics).

#include <Eigen/Core>

#include <optional>
#include <string>

#include "mfo/model.hpp"
#include "mfo/scene.hpp"
#include "mfo/skeleton.hpp"
#include "mfo/trajectory.hpp"

namespace mfo {

enum class SmoothnessVariant {
  kFree,           // K = D^T D, D the (T-2) x T second-difference stencil
  kStartAnchored,  // two rest samples prepended (robot starts at rest); free end
  kBanded,        // 6/-4/1 band with a (1, -4, 1) last row; indefinite
};

enum class InteractionPoint { kBase, kEndEffector };

struct ObjectiveWeights {
  double delta = 1e-2;           // w1
  double goal = 1.0;             // w2
  double obstacle = 1.0;         // w3
  double robot_goal = 1.0;       // w4
  double robot_obstacle = 1.0;   // w5
  double robot_smooth = 1e-1;    // w6
  double interaction = 1.0;      // w7
};

struct ObjectiveSpec {
  ObjectiveWeights weights;
  double alpha = 10.0;  // obstacle sharpness, 1/m
  std::optional<Eigen::Vector3d> human_goal;
  std::string end_effector = "right_wrist";
  std::optional<Eigen::Vector3d> robot_goal;
  Scene scene;
  int horizon = 30;
  SmoothnessVariant smoothness = SmoothnessVariant::kFree;
  InteractionPoint interaction_point = InteractionPoint::kBase;

  void validate() const;
  bool human_only() const {
    return weights.robot_goal == 0 && weights.robot_obstacle == 0 && weights.robot_smooth == 0 &&
           weights.interaction == 0;
  }
};

// --- individual terms ------------------------------------------------------

double cost_delta(const Eigen::MatrixXd& delta, Eigen::MatrixXd* grad = nullptr);

double cost_goal(const Eigen::Vector3d& final_position, const Eigen::Vector3d& goal,
                 Eigen::Vector3d* grad = nullptr);

// sum_t exp(-alpha sdf(p_t)) |p_t - p_{t-1}|, with p_0 = anchor.
double cost_obstacle(const Eigen::Vector3d& anchor, const Eigen::Matrix3Xd& path, const Scene& scene,
                     double alpha, Eigen::Matrix3Xd* grad = nullptr);

// sum_t exp(-alpha |p_t - x_t|) |p_t - p_{t-1}| |x_t - x_{t-1}|.
double cost_interaction(const Eigen::Vector3d& human_anchor, const Eigen::Matrix3Xd& human,
                        const Eigen::Vector3d& robot_anchor, const Eigen::Matrix3Xd& robot, double alpha,
                        Eigen::Matrix3Xd* grad_human = nullptr, Eigen::Matrix3Xd* grad_robot = nullptr);

Eigen::MatrixXd build_K(int horizon, SmoothnessVariant variant = SmoothnessVariant::kFree);

// sum over coordinates (rows of x) of x_i K x_i^T.
double cost_smooth(const Eigen::MatrixXd& x, const Eigen::MatrixXd& K, Eigen::MatrixXd* grad = nullptr);

// --- composite objective ---------------------------------------------------

struct ObjectiveContext {
  const PredictorModel<double>* model = nullptr;
  const Skeleton* skeleton = nullptr;
  Eigen::MatrixXd observed;  // human states, state_dim x frames
  Eigen::Vector3d robot_start = Eigen::Vector3d::Zero();
};

struct ObjectiveTerms {  // unweighted
  double delta = 0, goal = 0, obstacle = 0, robot_goal = 0, robot_obstacle = 0, robot_smooth = 0,
         interaction = 0;
  double weighted_sum(const ObjectiveWeights& w) const;
};

struct ObjectiveEvaluation {
  double value = 0;
  ObjectiveTerms terms;
  Eigen::MatrixXd grad_delta;  // state_dim x horizon
  Eigen::Matrix3Xd grad_robot;  // 3 x horizon (empty without a robot)
  RolloutResult<double> rollout;
};

// Human points tracked by the objective along a predicted state sequence.
struct PointPath {
  Eigen::Vector3d anchor;  // at the last observed frame
  Eigen::Matrix3Xd points;
  std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> jacobians;  // d point_t / d state_t
};
PointPath human_point_path(const Skeleton& skel, const Eigen::VectorXd& last_observed,
                           const Eigen::MatrixXd& predicted, int joint, bool with_jacobians);
PointPath base_point_path(const Eigen::VectorXd& last_observed, const Eigen::MatrixXd& predicted);

// Evaluates the weighted objective with one shared rollout and one reverse
// pass. `robot` may be null for a human-only problem.
ObjectiveEvaluation total_objective(const Eigen::MatrixXd& delta, const Eigen::Matrix3Xd* robot,
                                    const ObjectiveSpec& spec, const ObjectiveContext& ctx,
                                    bool with_gradient = true);

}  // namespace mfo
