#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "mfo/costs.hpp"
#include "mfo/lbfgs.hpp"
#include "mfo/model.hpp"
#include "mfo/skeleton.hpp"
#include "mfo/trajectory.hpp"
#include "mfo/training.hpp"

namespace mfo {

// Reaching horizons (ms) and the longer grid used for obstacle scenes.
std::vector<int> default_horizons_ms();
std::vector<int> obstacle_horizons_ms();

// 1-based prediction step closest to `ms` at `frame_rate` (halves round up).
int horizon_step(int ms, double frame_rate);

// Repeats the last observed state `horizon` times.
Eigen::MatrixXd zero_velocity_baseline(const Eigen::MatrixXd& observed, int horizon);

// p_k = start + (k / T) (goal - start), k = 1..T.
Eigen::Matrix3Xd interpolation_baseline(const Eigen::Vector3d& start, const Eigen::Vector3d& goal, int horizon);

// Sum over the skeleton's key joints of the FK position distance.
double key_joint_error(const Skeleton& skel, const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth);
double joint_error(const Skeleton& skel, int joint, const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth);

struct EvalRow {
  std::string method;
  std::vector<double> values;  // meters, one per horizon
};

struct EvalReport {
  std::vector<int> horizons_ms;
  std::vector<EvalRow> rows;

  const EvalRow& row(const std::string& method) const;
  // method,<h1>,<h2>,...; cells with 2 decimals.
  std::string to_csv() const;
};

// Mean key-joint error per horizon over samples. Predictions and truths are
// future trajectories aligned at step 1. Throws when a horizon exceeds the
// prediction length or frame rates differ.
EvalRow evaluate(const std::string& method, const std::vector<Trajectory>& predictions,
                 const std::vector<Trajectory>& truths, const Skeleton& skel, const std::vector<int>& horizons_ms);

// Wrist-only variant: one joint, predicted as 3-D points (3 x T each).
EvalRow evaluate_points(const std::string& method, const std::vector<Eigen::Matrix3Xd>& predictions,
                        const std::vector<Trajectory>& truths, const Skeleton& skel, int joint,
                        const std::vector<int>& horizons_ms);

struct BenchmarkOptions {
  std::vector<int> horizons_ms = default_horizons_ms();
  // With `optimize`, each sample is also refined towards its true final
  // end-effector position using `objective` (human terms only).
  bool optimize = false;
  ObjectiveSpec objective;
  LbfgsConfig lbfgs;
};

// Rows: zerovel, model, [optimized], then wrist-only rows suffixed " (w)"
// including interp. The wrist is `objective.end_effector`.
EvalReport run_benchmark(const PredictorModel<double>& model, const std::vector<Sample>& samples,
                         const Skeleton& skel, const BenchmarkOptions& opts);

}  // namespace mfo
