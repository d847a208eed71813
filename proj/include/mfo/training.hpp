#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mfo/model.hpp"
#include "mfo/trajectory.hpp"

namespace mfo {

struct TrainingConfig {
  double slice_seconds = 2.0;
  double input_seconds = 1.0;
  double frame_rate = 30.0;
  double learning_rate = 1e-4;
  int batch_size = 8;
  int epochs = 10;
  std::uint64_t seed = 0;
  int stride = 1;  // frames between window starts
  double clip_norm = 5.0;
  double holdout_fraction = 0.1;
  bool augment = true;
  bool fit_normalization = true;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  int slice_frames() const;
  int input_frames() const;
  void validate() const;
};

struct Sample {
  Eigen::MatrixXd observed;  // state_dim x input_frames
  Eigen::MatrixXd target;    // state_dim x (slice_frames - input_frames)

  Eigen::MatrixXd full() const;
};

struct SliceResult {
  std::vector<Sample> samples;
  int skipped = 0;  // trajectories shorter than one window
};

SliceResult slice_dataset(const std::vector<Trajectory>& trajectories, const TrainingConfig& cfg);

// Splits off the last round(fraction * n) trajectories (at most n - 1) as
// held-out data.
void split_holdout(const std::vector<Trajectory>& all, double fraction, std::vector<Trajectory>& train,
                   std::vector<Trajectory>& holdout);

// Rotates base position and base rotation of every frame by `theta` about
// the vertical axis through the first observed base position.
Sample augment_heading(const Sample& s, double theta);
Sample augment_heading(const Sample& s, std::mt19937_64& rng);

// Sum over frames of |p' - p|^2 (base position) plus the sum over frames and
// rotations (base and joints) of quat_loss_pair. Columns are frames. When
// `grad` is given it receives dL/d(predicted).
template <typename S>
S sequence_loss(const MatX<S>& predicted, const MatX<S>& target, MatX<S>* grad = nullptr);

inline double loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
  return sequence_loss<double>(predicted, target);
}

// Feature shift/scale and readout scale from the statistics of the samples.
template <typename S>
void fit_normalization(PredictorModel<S>& model, const std::vector<Sample>& samples);

struct LossRecord {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0;
  double holdout_loss = 0;  // NaN without held-out samples
};

template <typename S>
struct TrainingResult {
  PredictorModel<S> model;
  std::vector<LossRecord> curve;
  int train_samples = 0;
  int holdout_samples = 0;
};

// Mean per-sample loss over the full window (one-step predictions over the
// observed part, closed-loop predictions over the rest).
template <typename S>
double evaluate_loss(const PredictorModel<S>& model, const std::vector<Sample>& samples, int batch_size = 64);

using EpochCallback = std::function<void(const LossRecord&)>;

template <typename S>
TrainingResult<S> train(PredictorModel<S> model, const std::vector<Sample>& train_set,
                        const std::vector<Sample>& holdout_set, const TrainingConfig& cfg,
                        const EpochCallback& on_epoch = {});

std::string loss_curve_csv(const std::vector<LossRecord>& curve);

}  // namespace mfo
