#pragma once

// Position-velocity recurrent encoder-decoder.
//
// Every step feeds [masked state ; velocity] through an input projection and
// a stack of GRU cells, and reads a velocity out of the top hidden state.
// The encoder walks the observed frames 0..N-2 (teacher forced). The decoder
// starts from the last observed frame and runs closed loop:
//
//   v_k  = readout(stack([s'_{k-1}]_mask, u_{k-1}))
//   u_k  = v_k + delta_k            (emitted velocity, fed to the next step)
//   s'_k = s'_{k-1} + u_k           (residual connection)
//
// with s'_0, u_0 the last observed state and velocity. A perturbation at
// step k therefore moves s'_k and every later state, and nothing before it.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mfo/errors.hpp"
#include "mfo/gru.hpp"
#include "mfo/kinematics.hpp"
#include "mfo/trajectory.hpp"

namespace mfo {

struct ModelConfig {
  int state_dim = 66;
  int hidden_size = 32;
  int num_layers = 1;
  int input_size = 32;  // width of the input projection
  double frame_rate = 30.0;
  // State coordinates that enter the recurrent unit. Empty means "all but the
  // base position".
  std::vector<int> recurrent_coords;

  static std::vector<int> default_recurrent_coords(int state_dim) {
    std::vector<int> c;
    for (int i = 3; i < state_dim; ++i) c.push_back(i);
    return c;
  }
  void resolve() {
    if (state_dim < 1 || hidden_size < 1 || num_layers < 1 || input_size < 1) {
      throw ConfigError("model: sizes must be positive");
    }
    if (!(frame_rate > 0)) throw ConfigError("model: frame rate must be positive");
    if (recurrent_coords.empty()) recurrent_coords = default_recurrent_coords(state_dim);
    for (int c : recurrent_coords) {
      if (c < 0 || c >= state_dim) throw ConfigError("model: recurrent coordinate out of range");
    }
  }
  int feature_dim() const { return static_cast<int>(recurrent_coords.size()) + state_dim; }
};

template <typename S>
struct PredictorModel {
  ModelConfig config;
  MatX<S> in_w, in_b;  // input projection: input_size x feature_dim, input_size x 1
  std::vector<GruLayer<S>> layers;
  MatX<S> out_w, out_b;  // readout: state_dim x hidden, state_dim x 1
  // Fixed feature normalization (features - shift) .* scale, and readout
  // scale. Not trained.
  MatX<S> feature_shift, feature_scale, output_scale;

  static PredictorModel zeros(ModelConfig cfg) {
    cfg.resolve();
    PredictorModel m;
    m.config = cfg;
    const int f = cfg.feature_dim(), e = cfg.input_size, h = cfg.hidden_size, d = cfg.state_dim;
    m.in_w.setZero(e, f);
    m.in_b.setZero(e, 1);
    for (int l = 0; l < cfg.num_layers; ++l) m.layers.emplace_back(l == 0 ? e : h, h);
    m.out_w.setZero(d, h);
    m.out_b.setZero(d, 1);
    m.feature_shift.setZero(f, 1);
    m.feature_scale.setOnes(f, 1);
    m.output_scale.setOnes(d, 1);
    return m;
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static PredictorModel random(ModelConfig cfg, std::uint64_t seed, S readout_gain = S(1)) {
    PredictorModel m = zeros(std::move(cfg));
    std::mt19937_64 rng(seed);
    auto fill = [&](MatX<S>& w, S gain) {
      const S bound = gain / std::sqrt(static_cast<S>(w.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<S>(dist(rng));
    };
    fill(m.in_w, S(1));
    for (auto& l : m.layers) {
      for (auto* w : {&l.w_z, &l.w_r, &l.w_h, &l.u_z, &l.u_r, &l.u_h}) fill(*w, S(1));
    }
    fill(m.out_w, readout_gain);
    return m;
  }

  // Trainable tensors, in a fixed order.
  template <typename F>
  void for_each_parameter(F&& f) {
    f("input/w", in_w);
    f("input/b", in_b);
    for (size_t l = 0; l < layers.size(); ++l) layers[l].for_each("gru" + std::to_string(l) + "/", f);
    f("output/w", out_w);
    f("output/b", out_b);
  }
  template <typename F>
  void for_each_tensor(F&& f) {
    for_each_parameter(f);
    f("norm/feature_shift", feature_shift);
    f("norm/feature_scale", feature_scale);
    f("norm/output_scale", output_scale);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<PredictorModel*>(this)->for_each_tensor(
        [&](const std::string& n, MatX<S>& m) { f(n, static_cast<const MatX<S>&>(m)); });
  }

  template <typename T>
  PredictorModel<T> cast() const {
    PredictorModel<T> out;
    out.config = config;
    out.in_w = in_w.template cast<T>();
    out.in_b = in_b.template cast<T>();
    for (const auto& l : layers) out.layers.push_back(l.template cast<T>());
    out.out_w = out_w.template cast<T>();
    out.out_b = out_b.template cast<T>();
    out.feature_shift = feature_shift.template cast<T>();
    out.feature_scale = feature_scale.template cast<T>();
    out.output_scale = output_scale.template cast<T>();
    return out;
  }

  void check() const {
    const Eigen::Index f = config.feature_dim(), d = config.state_dim;
    if (config.recurrent_coords.empty()) throw DimensionError("model: unresolved config");
    if (static_cast<int>(layers.size()) != config.num_layers) throw DimensionError("model: layer count");
    if (in_w.rows() != config.input_size || in_w.cols() != f || in_b.rows() != config.input_size) {
      throw DimensionError("model: input projection shape");
    }
    Eigen::Index width = config.input_size;
    for (const auto& l : layers) {
      l.check();
      if (l.input_size() != width || l.hidden_size() != config.hidden_size) {
        throw DimensionError("model: gru layer shape");
      }
      width = l.hidden_size();
    }
    if (out_w.rows() != d || out_w.cols() != config.hidden_size || out_b.rows() != d) {
      throw DimensionError("model: readout shape");
    }
    if (feature_shift.rows() != f || feature_scale.rows() != f || output_scale.rows() != d) {
      throw DimensionError("model: normalization shape");
    }
  }
};

// Zero-initialised gradient container with the same shapes as `m`.
template <typename S>
PredictorModel<S> zeros_like(const PredictorModel<S>& m) {
  PredictorModel<S> g = m;
  g.for_each_tensor([](const std::string&, MatX<S>& t) { t.setZero(); });
  return g;
}

// Per-step perturbation of the decoder velocity; column k-1 is delta_k.
template <typename S>
struct DeltaInput {
  MatX<S> values;
  VecX<S> mask;  // empty: every coordinate may be perturbed

  static DeltaInput zeros(Eigen::Index dim, Eigen::Index horizon) {
    return DeltaInput{MatX<S>::Zero(dim, horizon), VecX<S>()};
  }
  MatX<S> effective() const {
    if (mask.size() == 0) return values;
    if (mask.size() != values.rows()) throw DimensionError("delta: mask size");
    return values.array().colwise() * mask.array();
  }
};

template <typename S>
struct StepCache {
  MatX<S> features;  // normalized
  std::vector<GruStepCache<S>> cells;
};

template <typename S>
struct UnrollCache {
  std::vector<StepCache<S>> encoder, decoder;
  std::vector<int> recurrent_coords;
};

// Batched unroll: every matrix is state_dim x batch.
template <typename S>
struct Unrolled {
  std::vector<MatX<S>> encoder_predictions;  // entry i predicts observed frame i+1
  std::vector<MatX<S>> states;               // s'_1 .. s'_T
  std::vector<MatX<S>> velocities;           // u_1 .. u_T
  UnrollCache<S> cache;
};

namespace detail {

template <typename S>
MatX<S> step_forward(const PredictorModel<S>& m, const MatX<S>& state, const MatX<S>& velocity,
                     std::vector<MatX<S>>& hidden, StepCache<S>* cache) {
  const auto& coords = m.config.recurrent_coords;
  const Eigen::Index nc = static_cast<Eigen::Index>(coords.size());
  MatX<S> feat(m.config.feature_dim(), state.cols());
  for (Eigen::Index i = 0; i < nc; ++i) feat.row(i) = state.row(coords[static_cast<size_t>(i)]);
  feat.bottomRows(velocity.rows()) = velocity;
  feat = ((feat.colwise() - m.feature_shift.col(0)).array().colwise() * m.feature_scale.col(0).array()).matrix();

  MatX<S> x = (m.in_w * feat).colwise() + m.in_b.col(0);
  if (cache) cache->cells.resize(m.layers.size());
  for (size_t l = 0; l < m.layers.size(); ++l) {
    hidden[l] = gru_cell_step(m.layers[l], x, hidden[l], cache ? &cache->cells[l] : nullptr);
    x = hidden[l];
  }
  if (cache) cache->features = std::move(feat);
  MatX<S> v = (m.out_w * x).colwise() + m.out_b.col(0);
  return v.array().colwise() * m.output_scale.col(0).array();
}

// Backward through one step given dL/dv (readout output) and the recurrent
// hidden gradients from the following step. Returns dL/d(features) in
// unnormalized units.
template <typename S>
MatX<S> step_backward(const PredictorModel<S>& m, const StepCache<S>& c, const MatX<S>& dv,
                      std::vector<MatX<S>>& dhidden, PredictorModel<S>* grad) {
  const size_t nl = m.layers.size();
  const MatX<S> dvs = dv.array().colwise() * m.output_scale.col(0).array();
  // Top hidden output, recomputed from the cell cache: h' = h + z * (cand - h).
  const auto& last = c.cells[nl - 1];
  const MatX<S> h_top = last.h_prev + last.z.cwiseProduct(last.candidate - last.h_prev);
  if (grad) {
    grad->out_w.noalias() += dvs * h_top.transpose();
    grad->out_b += dvs.rowwise().sum();
  }
  dhidden[nl - 1].noalias() += m.out_w.transpose() * dvs;
  MatX<S> dx;
  for (size_t l = nl; l-- > 0;) {
    MatX<S> dh_prev;
    dx = gru_cell_backward(m.layers[l], c.cells[l], dhidden[l], dh_prev, grad ? &grad->layers[l] : nullptr);
    dhidden[l] = std::move(dh_prev);
    if (l > 0) dhidden[l - 1] += dx;
  }
  if (grad) {
    grad->in_w.noalias() += dx * c.features.transpose();
    grad->in_b += dx.rowwise().sum();
  }
  MatX<S> dfeat = m.in_w.transpose() * dx;
  return dfeat.array().colwise() * m.feature_scale.col(0).array();
}

}  // namespace detail

// Runs the encoder over `observed` (N frames, each state_dim x batch) and the
// decoder for `horizon` steps. `delta` is empty (no perturbation) or holds
// `horizon` matrices.
template <typename S>
Unrolled<S> unroll(const PredictorModel<S>& m, const std::vector<MatX<S>>& observed,
                   const std::vector<MatX<S>>& delta, int horizon, bool keep_cache) {
  const Eigen::Index d = m.config.state_dim;
  if (observed.size() < 2) throw DimensionError("rollout: need at least 2 observed frames");
  if (horizon < 1) throw DimensionError("rollout: horizon must be >= 1");
  const Eigen::Index batch = observed[0].cols();
  for (const auto& o : observed) {
    if (o.rows() != d || o.cols() != batch) throw DimensionError("rollout: observed state dimension");
  }
  if (!delta.empty()) {
    if (delta.size() != static_cast<size_t>(horizon)) throw DimensionError("rollout: delta length != horizon");
    for (const auto& dl : delta) {
      if (dl.rows() != d || dl.cols() != batch) throw DimensionError("rollout: delta dimension");
    }
  }

  Unrolled<S> out;
  out.cache.recurrent_coords = m.config.recurrent_coords;
  std::vector<MatX<S>> hidden(m.layers.size(), MatX<S>::Zero(m.config.hidden_size, batch));
  const size_t n = observed.size();
  auto velocity_at = [&](size_t i) -> MatX<S> {
    return i == 0 ? MatX<S>(observed[1] - observed[0]) : MatX<S>(observed[i] - observed[i - 1]);
  };

  if (keep_cache) out.cache.encoder.resize(n - 1);
  out.encoder_predictions.reserve(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    MatX<S> v = detail::step_forward(m, observed[i], velocity_at(i), hidden,
                                     keep_cache ? &out.cache.encoder[i] : nullptr);
    out.encoder_predictions.push_back(observed[i] + v);
  }

  MatX<S> s = observed[n - 1];
  MatX<S> u = velocity_at(n - 1);
  if (keep_cache) out.cache.decoder.resize(static_cast<size_t>(horizon));
  out.states.reserve(static_cast<size_t>(horizon));
  out.velocities.reserve(static_cast<size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    MatX<S> v = detail::step_forward(m, s, u, hidden,
                                     keep_cache ? &out.cache.decoder[static_cast<size_t>(k)] : nullptr);
    u = delta.empty() ? MatX<S>(v + MatX<S>::Zero(d, batch)) : MatX<S>(v + delta[static_cast<size_t>(k)]);
    s = s + u;
    out.states.push_back(s);
    out.velocities.push_back(u);
  }
  return out;
}

// Reverse pass of `unroll`. `dstates[k]` is dL/ds'_{k+1} (empty matrices are
// treated as zero); `dencoder[i]` is dL/d(encoder_predictions[i]) and is only
// used when `through_encoder` is set. Weight gradients are accumulated into
// `grad` when given; dL/d(delta) is returned per decoder step.
template <typename S>
std::vector<MatX<S>> unroll_backward(const PredictorModel<S>& m, const UnrollCache<S>& cache,
                                     const std::vector<MatX<S>>& dstates,
                                     const std::vector<MatX<S>>& dencoder, bool through_encoder,
                                     PredictorModel<S>* grad) {
  const size_t horizon = cache.decoder.size();
  if (horizon == 0) throw Error("grad: missing cached activations (rollout was run without cache)");
  if (dstates.size() != horizon) throw DimensionError("grad: upstream length != horizon");
  const Eigen::Index d = m.config.state_dim;
  const Eigen::Index batch = cache.decoder[0].features.cols();
  const auto& coords = m.config.recurrent_coords;
  const Eigen::Index nc = static_cast<Eigen::Index>(coords.size());

  std::vector<MatX<S>> dhidden(m.layers.size(), MatX<S>::Zero(m.config.hidden_size, batch));
  std::vector<MatX<S>> ddelta(horizon);
  MatX<S> gs = MatX<S>::Zero(d, batch);
  MatX<S> gu = MatX<S>::Zero(d, batch);
  for (size_t k = horizon; k-- > 0;) {
    if (dstates[k].size() != 0) {
      if (dstates[k].rows() != d || dstates[k].cols() != batch) throw DimensionError("grad: upstream shape");
      gs += dstates[k];
    }
    gu += gs;
    ddelta[k] = gu;
    const MatX<S> dfeat = detail::step_backward(m, cache.decoder[k], gu, dhidden, grad);
    for (Eigen::Index i = 0; i < nc; ++i) gs.row(coords[static_cast<size_t>(i)]) += dfeat.row(i);
    gu = dfeat.bottomRows(d);
  }
  if (through_encoder) {
    if (cache.encoder.empty()) throw Error("grad: missing encoder activations");
    for (size_t i = cache.encoder.size(); i-- > 0;) {
      MatX<S> dv = (i < dencoder.size() && dencoder[i].size() != 0) ? dencoder[i] : MatX<S>::Zero(d, batch);
      detail::step_backward(m, cache.encoder[i], dv, dhidden, grad);
    }
  }
  return ddelta;
}

template <typename S>
struct RolloutResult {
  MatX<S> states;      // state_dim x horizon, column k-1 = s'_k
  MatX<S> velocities;  // state_dim x horizon, emitted u_k
  std::shared_ptr<const UnrollCache<S>> cache;
  VecX<S> delta_mask;
};

namespace detail {

template <typename S, typename Derived>
std::vector<MatX<S>> split_columns(const Eigen::MatrixBase<Derived>& m) {
  std::vector<MatX<S>> out;
  out.reserve(static_cast<size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.cols(); ++i) out.emplace_back(m.col(i).template cast<S>());
  return out;
}

}  // namespace detail

// Single-sequence prediction s'_{1:T} = f(s_{0:t}, delta_{1:T}).
template <typename S, typename Derived>
RolloutResult<S> rollout(const PredictorModel<S>& m, const Eigen::MatrixBase<Derived>& observed,
                         const DeltaInput<S>* delta, int horizon) {
  if (observed.cols() == 0) throw DimensionError("rollout: empty observation");
  std::vector<MatX<S>> dl;
  VecX<S> mask;
  if (delta) {
    const MatX<S> eff = delta->effective();
    if (eff.cols() != horizon || eff.rows() != m.config.state_dim) {
      throw DimensionError("rollout: delta must be state_dim x horizon");
    }
    dl = detail::split_columns<S>(eff);
    mask = delta->mask;
  }
  auto un = unroll(m, detail::split_columns<S>(observed), dl, horizon, true);
  RolloutResult<S> r;
  r.states.resize(m.config.state_dim, horizon);
  r.velocities.resize(m.config.state_dim, horizon);
  for (int k = 0; k < horizon; ++k) {
    r.states.col(k) = un.states[static_cast<size_t>(k)];
    r.velocities.col(k) = un.velocities[static_cast<size_t>(k)];
  }
  r.cache = std::make_shared<const UnrollCache<S>>(std::move(un.cache));
  r.delta_mask = std::move(mask);
  return r;
}

template <typename S>
RolloutResult<S> rollout(const PredictorModel<S>& m, const Trajectory& observed, const DeltaInput<S>* delta,
                         int horizon) {
  return rollout(m, observed.states, delta, horizon);
}

// Vector-Jacobian product dL/d(delta) given dL/ds' (state_dim x horizon).
template <typename S, typename Derived>
MatX<S> grad_delta(const PredictorModel<S>& m, const RolloutResult<S>& r,
                   const Eigen::MatrixBase<Derived>& upstream) {
  if (!r.cache) throw Error("grad_delta: missing cached activations");
  if (upstream.rows() != r.states.rows() || upstream.cols() != r.states.cols()) {
    throw DimensionError("grad_delta: upstream shape must match the rollout");
  }
  const auto g = unroll_backward<S>(m, *r.cache, detail::split_columns<S>(upstream), {}, false, nullptr);
  MatX<S> out(upstream.rows(), upstream.cols());
  for (Eigen::Index k = 0; k < out.cols(); ++k) out.col(k) = g[static_cast<size_t>(k)];
  if (r.delta_mask.size() != 0) out = out.array().colwise() * r.delta_mask.array();
  return out;
}

template <typename S, typename D1, typename D2>
MatX<S> grad_delta(const PredictorModel<S>& m, const Eigen::MatrixBase<D1>& observed, const DeltaInput<S>& delta,
                   int horizon, const Eigen::MatrixBase<D2>& upstream) {
  return grad_delta(m, rollout(m, observed, &delta, horizon), upstream);
}

}  // namespace mfo
