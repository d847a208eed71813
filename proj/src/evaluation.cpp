#include "mfo/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "mfo/errors.hpp"
#include "mfo/format.hpp"
#include "mfo/kinematics.hpp"
#include "mfo/optimize.hpp"

namespace mfo {

std::vector<int> default_horizons_ms() { return {125, 250, 375, 500, 625, 750, 875, 1000}; }
std::vector<int> obstacle_horizons_ms() { return {250, 500, 750, 1000, 1250, 1500, 1750, 2000}; }

int horizon_step(int ms, double frame_rate) {
  if (ms <= 0) throw ConfigError("eval: horizons must be positive");
  const int step = static_cast<int>(std::floor(ms * frame_rate / 1000.0 + 0.5));
  return std::max(step, 1);
}

Eigen::MatrixXd zero_velocity_baseline(const Eigen::MatrixXd& observed, int horizon) {
  if (observed.cols() == 0) throw DimensionError("zero-velocity baseline: empty observation");
  if (horizon < 1) throw DimensionError("zero-velocity baseline: horizon must be >= 1");
  return observed.col(observed.cols() - 1).replicate(1, horizon);
}

Eigen::Matrix3Xd interpolation_baseline(const Eigen::Vector3d& start, const Eigen::Vector3d& goal, int horizon) {
  if (horizon < 1) throw DimensionError("interpolation baseline: horizon must be >= 1");
  Eigen::Matrix3Xd out(3, horizon);
  for (int k = 1; k < horizon; ++k) out.col(k - 1) = start + (static_cast<double>(k) / horizon) * (goal - start);
  out.col(horizon - 1) = goal;
  return out;
}

double key_joint_error(const Skeleton& skel, const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  const Eigen::Matrix3Xd a = forward_kinematics(skel, predicted);
  const Eigen::Matrix3Xd b = forward_kinematics(skel, truth);
  double sum = 0;
  for (int j : skel.key_joints()) sum += (a.col(j) - b.col(j)).norm();
  return sum;
}

double joint_error(const Skeleton& skel, int joint, const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  return (forward_kinematics(skel, predicted).col(joint) - forward_kinematics(skel, truth).col(joint)).norm();
}

const EvalRow& EvalReport::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw ConfigError("eval: no row for method " + method);
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "method";
  for (int h : horizons_ms) out << ',' << h;
  out << '\n';
  for (const auto& r : rows) {
    out << r.method;
    for (double v : r.values) out << ',' << format_fixed(v, 2);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<int> steps_for(const std::vector<int>& horizons_ms, double frame_rate, Eigen::Index available) {
  std::vector<int> steps;
  for (int ms : horizons_ms) {
    const int k = horizon_step(ms, frame_rate);
    if (k > available) {
      throw DimensionError("eval: horizon " + std::to_string(ms) + " ms is beyond the prediction length");
    }
    steps.push_back(k);
  }
  return steps;
}

}  // namespace

EvalRow evaluate(const std::string& method, const std::vector<Trajectory>& predictions,
                 const std::vector<Trajectory>& truths, const Skeleton& skel, const std::vector<int>& horizons_ms) {
  if (predictions.size() != truths.size()) throw DimensionError("eval: prediction and truth counts differ");
  EvalRow row{method, std::vector<double>(horizons_ms.size(), 0.0)};
  if (predictions.empty()) return row;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const auto& g = truths[i];
    if (std::abs(p.frame_rate - g.frame_rate) > 1e-9) throw ConfigError("eval: frame rates differ");
    const auto steps = steps_for(horizons_ms, p.frame_rate, std::min(p.frames(), g.frames()));
    for (size_t h = 0; h < steps.size(); ++h) {
      const Eigen::Index c = steps[h] - 1;
      row.values[h] += key_joint_error(skel, p.states.col(c), g.states.col(c));
    }
  }
  for (double& v : row.values) v /= static_cast<double>(predictions.size());
  return row;
}

EvalRow evaluate_points(const std::string& method, const std::vector<Eigen::Matrix3Xd>& predictions,
                        const std::vector<Trajectory>& truths, const Skeleton& skel, int joint,
                        const std::vector<int>& horizons_ms) {
  if (predictions.size() != truths.size()) throw DimensionError("eval: prediction and truth counts differ");
  EvalRow row{method, std::vector<double>(horizons_ms.size(), 0.0)};
  if (predictions.empty()) return row;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const auto& g = truths[i];
    const auto steps = steps_for(horizons_ms, g.frame_rate, std::min(predictions[i].cols(), g.frames()));
    for (size_t h = 0; h < steps.size(); ++h) {
      const Eigen::Index c = steps[h] - 1;
      row.values[h] += (predictions[i].col(c) - forward_kinematics(skel, g.states.col(c)).col(joint)).norm();
    }
  }
  for (double& v : row.values) v /= static_cast<double>(predictions.size());
  return row;
}

EvalReport run_benchmark(const PredictorModel<double>& model, const std::vector<Sample>& samples,
                         const Skeleton& skel, const BenchmarkOptions& opts) {
  EvalReport report;
  report.horizons_ms = opts.horizons_ms;
  const int wrist = skel.end_effector(opts.objective.end_effector);
  const double rate = model.config.frame_rate;
  std::vector<Trajectory> truth, zerovel, predicted, optimized;
  std::vector<Eigen::Matrix3Xd> interp;
  for (const auto& s : samples) {
    const int horizon = static_cast<int>(s.target.cols());
    truth.emplace_back(rate, Layout::kHuman, s.target);
    zerovel.emplace_back(rate, Layout::kHuman, zero_velocity_baseline(s.observed, horizon));
    predicted.emplace_back(rate, Layout::kHuman,
                           rollout(model, s.observed, static_cast<const DeltaInput<double>*>(nullptr), horizon).states);
    const Eigen::Vector3d start = forward_kinematics(skel, s.observed.col(s.observed.cols() - 1)).col(wrist);
    const Eigen::Vector3d goal = forward_kinematics(skel, s.target.col(horizon - 1)).col(wrist);
    interp.push_back(interpolation_baseline(start, goal, horizon));
    if (opts.optimize) {
      ObjectiveSpec spec = opts.objective;
      spec.human_goal = goal;
      spec.horizon = horizon;
      optimized.emplace_back(rate, Layout::kHuman,
                             optimize_prediction(model, s.observed, spec, skel, opts.lbfgs).states);
    }
  }
  auto wrist_points = [&](const std::vector<Trajectory>& trajs) {
    std::vector<Eigen::Matrix3Xd> pts;
    for (const auto& t : trajs) {
      Eigen::Matrix3Xd p(3, t.frames());
      for (Eigen::Index k = 0; k < t.frames(); ++k) p.col(k) = forward_kinematics(skel, t.states.col(k)).col(wrist);
      pts.push_back(std::move(p));
    }
    return pts;
  };
  const auto& h = opts.horizons_ms;
  report.rows.push_back(evaluate("zerovel", zerovel, truth, skel, h));
  report.rows.push_back(evaluate("model", predicted, truth, skel, h));
  if (opts.optimize) report.rows.push_back(evaluate("optimized", optimized, truth, skel, h));
  report.rows.push_back(evaluate_points("zerovel (w)", wrist_points(zerovel), truth, skel, wrist, h));
  report.rows.push_back(evaluate_points("model (w)", wrist_points(predicted), truth, skel, wrist, h));
  report.rows.push_back(evaluate_points("interp (w)", interp, truth, skel, wrist, h));
  if (opts.optimize) {
    report.rows.push_back(evaluate_points("optimized (w)", wrist_points(optimized), truth, skel, wrist, h));
  }
  return report;
}

}  // namespace mfo
