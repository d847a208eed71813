#include "mfo/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mfo/errors.hpp"
#include "mfo/format.hpp"
#include "mfo/rotation.hpp"

namespace mfo {

int TrainingConfig::slice_frames() const { return static_cast<int>(std::lround(slice_seconds * frame_rate)); }
int TrainingConfig::input_frames() const { return static_cast<int>(std::lround(input_seconds * frame_rate)); }

void TrainingConfig::validate() const {
  if (!(frame_rate > 0)) throw ConfigError("training: frame_rate must be > 0");
  if (std::abs(slice_seconds * frame_rate - slice_frames()) > 1e-6 ||
      std::abs(input_seconds * frame_rate - input_frames()) > 1e-6) {
    throw ConfigError("training: slice and input lengths must be whole numbers of frames");
  }
  if (input_frames() < 2) throw ConfigError("training: input window needs at least 2 frames");
  if (slice_frames() <= input_frames()) throw ConfigError("training: slice must be longer than the input window");
  if (!(learning_rate > 0)) throw ConfigError("training: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("training: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("training: epochs must be >= 0");
  if (stride < 1) throw ConfigError("training: stride must be >= 1");
  if (!(clip_norm > 0)) throw ConfigError("training: clip_norm must be > 0");
  if (!(holdout_fraction >= 0 && holdout_fraction < 1)) throw ConfigError("training: holdout_fraction in [0, 1)");
}

Eigen::MatrixXd Sample::full() const {
  Eigen::MatrixXd f(observed.rows(), observed.cols() + target.cols());
  f << observed, target;
  return f;
}

SliceResult slice_dataset(const std::vector<Trajectory>& trajectories, const TrainingConfig& cfg) {
  cfg.validate();
  const int window = cfg.slice_frames(), input = cfg.input_frames();
  SliceResult out;
  for (const auto& traj : trajectories) {
    if (std::abs(traj.frame_rate - cfg.frame_rate) > 1e-9) {
      throw ConfigError("slice: trajectory frame rate differs from the training frame rate");
    }
    if (!out.samples.empty() && traj.dim() != out.samples.front().observed.rows()) {
      throw DimensionError("slice: trajectories have different state dimensions");
    }
    if (traj.frames() < window) {
      ++out.skipped;
      continue;
    }
    for (Eigen::Index start = 0; start + window <= traj.frames(); start += cfg.stride) {
      out.samples.push_back({traj.states.middleCols(start, input),
                             traj.states.middleCols(start + input, window - input)});
    }
  }
  return out;
}

void split_holdout(const std::vector<Trajectory>& all, double fraction, std::vector<Trajectory>& train,
                   std::vector<Trajectory>& holdout) {
  const long n = static_cast<long>(all.size());
  const long n_hold = n < 2 ? 0 : std::min(n - 1, std::lround(fraction * static_cast<double>(n)));
  train.assign(all.begin(), all.end() - n_hold);
  holdout.assign(all.end() - n_hold, all.end());
}

Sample augment_heading(const Sample& s, double theta) {
  if (theta == 0) return s;
  Eigen::MatrixXd f = s.full();
  const Eigen::Vector3d pivot = s.observed.col(0).head<3>();
  const Eigen::Vector3d yaw(0, 0, theta);
  const Eigen::Matrix3d r = rotation_matrix(yaw);
  const Eigen::Quaterniond qz = expmap_to_quat(yaw);
  for (Eigen::Index t = 0; t < f.cols(); ++t) {
    f.col(t).head<3>() = pivot + r * (f.col(t).head<3>() - pivot);
    const Eigen::Quaterniond q = qz * expmap_to_quat(f.col(t).segment<3>(3));
    f.col(t).segment<3>(3) = quat_to_expmap(q.normalized()).vector();
  }
  unwrap_rotation_block(f.middleRows<3>(3));
  Sample out;
  out.observed = f.leftCols(s.observed.cols());
  out.target = f.rightCols(s.target.cols());
  return out;
}

Sample augment_heading(const Sample& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  return augment_heading(s, dist(rng));
}

template <typename S>
S sequence_loss(const MatX<S>& predicted, const MatX<S>& target, MatX<S>* grad) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw DimensionError("loss: predicted and target shapes differ");
  }
  if (predicted.rows() < 6 || predicted.rows() % 3 != 0) throw DimensionError("loss: state must be 6 + 3J");
  if (grad) grad->setZero(predicted.rows(), predicted.cols());
  S total = 0;
  for (Eigen::Index t = 0; t < predicted.cols(); ++t) {
    const Vec3<S> dp = predicted.col(t).template head<3>() - target.col(t).template head<3>();
    total += dp.squaredNorm();
    if (grad) grad->col(t).template head<3>() = S(2) * dp;
    for (Eigen::Index r = 3; r < predicted.rows(); r += 3) {
      const auto vp = predicted.col(t).template segment<3>(r);
      const Eigen::Matrix<S, 4, 1> qp = expmap_to_quat(vp).coeffs();
      const Eigen::Matrix<S, 4, 1> qt = expmap_to_quat(target.col(t).template segment<3>(r)).coeffs();
      const Eigen::Matrix<S, 4, 1> minus = qp - qt, plus = qp + qt;
      const bool use_minus = minus.squaredNorm() <= plus.squaredNorm();
      const Eigen::Matrix<S, 4, 1>& e = use_minus ? minus : plus;
      const S n = e.norm();
      total += n;
      if (grad && n > 0) {
        // coeffs() is (x, y, z, w); the Jacobian rows are (w, x, y, z).
        const Eigen::Matrix<S, 4, 1> ewxyz(e[3], e[0], e[1], e[2]);
        grad->col(t).template segment<3>(r) = expmap_to_quat_jacobian(vp).transpose() * (ewxyz / n);
      }
    }
  }
  return total;
}

template float sequence_loss<float>(const MatX<float>&, const MatX<float>&, MatX<float>*);
template double sequence_loss<double>(const MatX<double>&, const MatX<double>&, MatX<double>*);

template <typename S>
void fit_normalization(PredictorModel<S>& model, const std::vector<Sample>& samples) {
  const auto& coords = model.config.recurrent_coords;
  const Eigen::Index nc = static_cast<Eigen::Index>(coords.size());
  const Eigen::Index d = model.config.state_dim, f = model.config.feature_dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f), sq = Eigen::VectorXd::Zero(f);
  double count = 0;
  for (const auto& s : samples) {
    const Eigen::MatrixXd full = s.full();
    if (full.rows() != d) throw DimensionError("normalization: sample state dimension");
    const Eigen::MatrixXd vel = finite_difference_velocities(full);
    for (Eigen::Index t = 0; t < full.cols(); ++t) {
      Eigen::VectorXd feat(f);
      for (Eigen::Index i = 0; i < nc; ++i) feat[i] = full(coords[static_cast<size_t>(i)], t);
      feat.tail(d) = vel.col(t);
      sum += feat;
      sq += feat.cwiseAbs2();
      count += 1;
    }
  }
  if (count == 0) return;
  const Eigen::VectorXd mean = sum / count;
  const Eigen::VectorXd var = (sq / count - mean.cwiseAbs2()).cwiseMax(0.0);
  const Eigen::VectorXd stdev = var.cwiseSqrt();
  model.feature_shift = mean.cast<S>();
  model.feature_scale = stdev.cwiseMax(1e-2).cwiseInverse().cast<S>();
  model.output_scale = stdev.tail(d).cwiseMax(1e-3).cast<S>();
}

template void fit_normalization<float>(PredictorModel<float>&, const std::vector<Sample>&);
template void fit_normalization<double>(PredictorModel<double>&, const std::vector<Sample>&);

namespace {

template <typename S>
struct BatchFrames {
  std::vector<MatX<S>> observed;  // input_frames matrices, state_dim x batch
  std::vector<MatX<S>> target;
};

template <typename S>
BatchFrames<S> make_batch(const std::vector<const Sample*>& batch) {
  BatchFrames<S> b;
  const Eigen::Index d = batch.front()->observed.rows();
  const Eigen::Index n_in = batch.front()->observed.cols(), n_out = batch.front()->target.cols();
  const Eigen::Index bs = static_cast<Eigen::Index>(batch.size());
  b.observed.assign(static_cast<size_t>(n_in), MatX<S>(d, bs));
  b.target.assign(static_cast<size_t>(n_out), MatX<S>(d, bs));
  for (Eigen::Index j = 0; j < bs; ++j) {
    const Sample& s = *batch[static_cast<size_t>(j)];
    if (s.observed.cols() != n_in || s.target.cols() != n_out || s.observed.rows() != d) {
      throw DimensionError("batch: samples must share one shape");
    }
    for (Eigen::Index t = 0; t < n_in; ++t) b.observed[static_cast<size_t>(t)].col(j) = s.observed.col(t).cast<S>();
    for (Eigen::Index t = 0; t < n_out; ++t) b.target[static_cast<size_t>(t)].col(j) = s.target.col(t).cast<S>();
  }
  return b;
}

// Summed loss over the batch; fills per-frame upstream gradients scaled by
// `grad_scale` when requested.
template <typename S>
double batch_loss(const Unrolled<S>& un, const BatchFrames<S>& b, S grad_scale, std::vector<MatX<S>>* dencoder,
                  std::vector<MatX<S>>* dstates) {
  double total = 0;
  MatX<S> g;
  if (dencoder) dencoder->resize(un.encoder_predictions.size());
  if (dstates) dstates->resize(un.states.size());
  for (size_t i = 0; i < un.encoder_predictions.size(); ++i) {
    total += sequence_loss<S>(un.encoder_predictions[i], b.observed[i + 1], dencoder ? &g : nullptr);
    if (dencoder) (*dencoder)[i] = g * grad_scale;
  }
  for (size_t k = 0; k < un.states.size(); ++k) {
    total += sequence_loss<S>(un.states[k], b.target[k], dstates ? &g : nullptr);
    if (dstates) (*dstates)[k] = g * grad_scale;
  }
  return total;
}

}  // namespace

template <typename S>
double evaluate_loss(const PredictorModel<S>& model, const std::vector<Sample>& samples, int batch_size) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  for (size_t start = 0; start < samples.size(); start += static_cast<size_t>(batch_size)) {
    std::vector<const Sample*> batch;
    for (size_t i = start; i < std::min(samples.size(), start + static_cast<size_t>(batch_size)); ++i) {
      batch.push_back(&samples[i]);
    }
    const auto b = make_batch<S>(batch);
    const auto un = unroll(model, b.observed, {}, static_cast<int>(b.target.size()), false);
    total += batch_loss<S>(un, b, S(0), nullptr, nullptr);
  }
  return total / static_cast<double>(samples.size());
}

template double evaluate_loss<float>(const PredictorModel<float>&, const std::vector<Sample>&, int);
template double evaluate_loss<double>(const PredictorModel<double>&, const std::vector<Sample>&, int);

template <typename S>
TrainingResult<S> train(PredictorModel<S> model, const std::vector<Sample>& train_set,
                        const std::vector<Sample>& holdout_set, const TrainingConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.validate();
  model.check();
  if (train_set.empty()) throw ConfigError("train: empty dataset");
  if (std::abs(model.config.frame_rate - cfg.frame_rate) > 1e-9) {
    throw ConfigError("train: model frame rate differs from the training frame rate");
  }
  TrainingResult<S> res;
  res.train_samples = static_cast<int>(train_set.size());
  res.holdout_samples = static_cast<int>(holdout_set.size());
  if (cfg.epochs > 0 && cfg.fit_normalization) fit_normalization(model, train_set);

  auto record = [&](int epoch) {
    LossRecord r{epoch, evaluate_loss(model, train_set), evaluate_loss(model, holdout_set)};
    if (!std::isfinite(r.train_loss)) throw NumericError("train: loss became non-finite at epoch " + std::to_string(epoch));
    res.curve.push_back(r);
    if (on_epoch) on_epoch(r);
  };
  record(0);

  std::vector<MatX<S>*> params, moment1, moment2, grads;
  PredictorModel<S> m1 = zeros_like(model), m2 = zeros_like(model), grad = zeros_like(model);
  model.for_each_parameter([&](const std::string&, MatX<S>& t) { params.push_back(&t); });
  m1.for_each_parameter([&](const std::string&, MatX<S>& t) { moment1.push_back(&t); });
  m2.for_each_parameter([&](const std::string&, MatX<S>& t) { moment2.push_back(&t); });
  grad.for_each_parameter([&](const std::string&, MatX<S>& t) { grads.push_back(&t); });

  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      std::vector<Sample> augmented;
      augmented.reserve(end - start);
      for (size_t i = start; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        augmented.push_back(cfg.augment ? augment_heading(s, rng) : s);
      }
      std::vector<const Sample*> batch;
      for (const auto& s : augmented) batch.push_back(&s);
      const auto b = make_batch<S>(batch);

      // Training never perturbs the decoder: the delta list stays empty.
      const auto un = unroll(model, b.observed, {}, static_cast<int>(b.target.size()), true);
      std::vector<MatX<S>> dencoder, dstates;
      const double l = batch_loss<S>(un, b, S(1) / static_cast<S>(batch.size()), &dencoder, &dstates);
      if (!std::isfinite(l)) throw NumericError("train: loss became non-finite at epoch " + std::to_string(epoch));

      for (auto* g : grads) g->setZero();
      unroll_backward(model, un.cache, dstates, dencoder, true, &grad);

      double norm2 = 0;
      for (auto* g : grads) norm2 += static_cast<double>(g->squaredNorm());
      const double norm = std::sqrt(norm2);
      if (!std::isfinite(norm)) throw NumericError("train: gradient became non-finite at epoch " + std::to_string(epoch));
      const S clip = norm > cfg.clip_norm ? static_cast<S>(cfg.clip_norm / norm) : S(1);

      ++step;
      const S b1 = static_cast<S>(cfg.beta1), b2 = static_cast<S>(cfg.beta2);
      const S c1 = static_cast<S>(1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
      const S c2 = static_cast<S>(1.0 - std::pow(cfg.beta2, static_cast<double>(step)));
      const S lr = static_cast<S>(cfg.learning_rate), eps = static_cast<S>(cfg.epsilon);
      for (size_t p = 0; p < params.size(); ++p) {
        const MatX<S> g = *grads[p] * clip;
        *moment1[p] = b1 * *moment1[p] + (S(1) - b1) * g;
        *moment2[p] = b2 * moment2[p]->array() + (S(1) - b2) * g.array().square();
        params[p]->array() -= lr * (moment1[p]->array() / c1) / ((moment2[p]->array() / c2).sqrt() + eps);
      }
    }
    record(epoch);
  }
  res.model = std::move(model);
  return res;
}

template TrainingResult<float> train<float>(PredictorModel<float>, const std::vector<Sample>&,
                                            const std::vector<Sample>&, const TrainingConfig&,
                                            const EpochCallback&);
template TrainingResult<double> train<double>(PredictorModel<double>, const std::vector<Sample>&,
                                              const std::vector<Sample>&, const TrainingConfig&,
                                              const EpochCallback&);

std::string loss_curve_csv(const std::vector<LossRecord>& curve) {
  std::ostringstream out;
  out << "epoch,train_loss,holdout_loss\n";
  for (const auto& r : curve) {
    out << r.epoch << ',' << format_double(r.train_loss) << ','
        << (std::isfinite(r.holdout_loss) ? format_double(r.holdout_loss) : std::string("nan")) << '\n';
  }
  return out.str();
}

}  // namespace mfo
