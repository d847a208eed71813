#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "mfo/costs.hpp"
#include "mfo/lbfgs.hpp"
#include "mfo/model.hpp"
#include "mfo/skeleton.hpp"

namespace mfo {

struct OptimizationResult {
  Eigen::MatrixXd delta;                // state_dim x horizon
  std::optional<Eigen::Matrix3Xd> robot;  // joint problems only
  Eigen::MatrixXd states;               // refined human prediction, state_dim x horizon
  double value = 0;
  ObjectiveTerms terms;
  std::vector<IterationRecord> trace;
  Termination termination = Termination::kMaxIterations;
  int iterations = 0;
  double gradient_norm = 0;
};

// Refines the prediction for `observed` (state_dim x frames) by minimizing
// the human terms over delta, starting from delta = 0. Robot weights must be
// zero.
OptimizationResult optimize_prediction(const PredictorModel<double>& model, const Eigen::MatrixXd& observed,
                                       const ObjectiveSpec& spec, const Skeleton& skeleton,
                                       const LbfgsConfig& cfg = {});

struct JointProblem {
  const PredictorModel<double>* model = nullptr;
  const Skeleton* skeleton = nullptr;
  Eigen::MatrixXd observed;
  ObjectiveSpec spec;
  Eigen::Vector3d robot_start = Eigen::Vector3d::Zero();
  std::optional<Eigen::Matrix3Xd> robot_init;  // default: straight line to the robot goal
};

// x_t = start + (t / T) (goal - start), t = 1..T.
Eigen::Matrix3Xd straight_line(const Eigen::Vector3d& start, const Eigen::Vector3d& goal, int horizon);

// Minimizes over the stacked variable (delta, x).
OptimizationResult optimize_joint(const JointProblem& problem, const LbfgsConfig& cfg = {});

}  // namespace mfo
