#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace mfo {

struct LbfgsConfig {
  int memory = 10;
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;  // on the Euclidean gradient norm
  double relative_decrease_tolerance = 1e-9;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_trials = 20;

  void validate() const;
};

enum class Termination {
  kConverged,         // gradient norm below tolerance
  kStalled,           // relative objective decrease below tolerance
  kMaxIterations,
  kLineSearchFailure,
};

const char* termination_name(Termination t);

struct IterationRecord {
  int iteration = 0;  // 0 is the starting point
  double value = 0;
  double gradient_norm = 0;
  double step = 0;
  int evaluations = 0;  // cumulative
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0;
  Eigen::VectorXd gradient;
  std::vector<IterationRecord> trace;  // one record per accepted iterate
  Termination termination = Termination::kMaxIterations;
  int iterations = 0;
  int evaluations = 0;
};

// Returns f(x) and writes the gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Limited-memory BFGS with a strong-Wolfe line search. Throws NumericError
// when the objective or gradient is not finite at x0.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsConfig& cfg = {});

// CSV with header iteration,objective,gradient_norm,step,evaluations.
std::string trace_to_csv(const std::vector<IterationRecord>& trace);

}  // namespace mfo
