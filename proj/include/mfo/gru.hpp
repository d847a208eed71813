#pragma once

// Gated recurrent unit with a hand-written backward pass. Inputs and hidden
// states are column-major batches: each column is one sequence.

#include <Eigen/Core>

#include <random>
#include <string>

#include "mfo/errors.hpp"
#include "mfo/kinematics.hpp"

namespace mfo {

template <typename S>
struct GruLayer {
  // update (z), reset (r) and candidate (h) gates
  MatX<S> w_z, w_r, w_h;  // hidden x input
  MatX<S> u_z, u_r, u_h;  // hidden x hidden
  MatX<S> b_z, b_r, b_h;  // hidden x 1

  GruLayer() = default;
  GruLayer(Eigen::Index input, Eigen::Index hidden) {
    for (auto* w : {&w_z, &w_r, &w_h}) w->setZero(hidden, input);
    for (auto* u : {&u_z, &u_r, &u_h}) u->setZero(hidden, hidden);
    for (auto* b : {&b_z, &b_r, &b_h}) b->setZero(hidden, 1);
  }

  Eigen::Index input_size() const { return w_z.cols(); }
  Eigen::Index hidden_size() const { return w_z.rows(); }

  void check() const {
    const auto h = hidden_size(), i = input_size();
    for (const auto* w : {&w_z, &w_r, &w_h}) {
      if (w->rows() != h || w->cols() != i) throw DimensionError("gru: input weight shape");
    }
    for (const auto* u : {&u_z, &u_r, &u_h}) {
      if (u->rows() != h || u->cols() != h) throw DimensionError("gru: recurrent weight shape");
    }
    for (const auto* b : {&b_z, &b_r, &b_h}) {
      if (b->rows() != h || b->cols() != 1) throw DimensionError("gru: bias shape");
    }
  }

  template <typename F>
  void for_each(const std::string& prefix, F&& f) {
    f(prefix + "w_z", w_z); f(prefix + "w_r", w_r); f(prefix + "w_h", w_h);
    f(prefix + "u_z", u_z); f(prefix + "u_r", u_r); f(prefix + "u_h", u_h);
    f(prefix + "b_z", b_z); f(prefix + "b_r", b_r); f(prefix + "b_h", b_h);
  }
  template <typename F>
  void for_each(const std::string& prefix, F&& f) const {
    const_cast<GruLayer*>(this)->for_each(prefix, [&](const std::string& n, MatX<S>& m) {
      f(n, static_cast<const MatX<S>&>(m));
    });
  }

  template <typename T>
  GruLayer<T> cast() const {
    GruLayer<T> out;
    out.w_z = w_z.template cast<T>(); out.w_r = w_r.template cast<T>(); out.w_h = w_h.template cast<T>();
    out.u_z = u_z.template cast<T>(); out.u_r = u_r.template cast<T>(); out.u_h = u_h.template cast<T>();
    out.b_z = b_z.template cast<T>(); out.b_r = b_r.template cast<T>(); out.b_h = b_h.template cast<T>();
    return out;
  }
};

// Activations of one cell step kept for the backward pass.
template <typename S>
struct GruStepCache {
  MatX<S> x, h_prev, z, r, candidate;
};

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return (S(1) / (S(1) + (-a.array()).exp())).matrix();
}

}  // namespace detail

// h' = (1 - z) * h + z * tanh(W_h x + U_h (r * h) + b_h)
template <typename S>
MatX<S> gru_cell_step(const GruLayer<S>& g, const MatX<S>& x, const MatX<S>& h,
                      GruStepCache<S>* cache = nullptr) {
  if (x.rows() != g.input_size() || h.rows() != g.hidden_size() || x.cols() != h.cols()) {
    throw DimensionError("gru_cell_step: shape mismatch");
  }
  MatX<S> z = detail::sigmoid(MatX<S>((g.w_z * x + g.u_z * h).colwise() + g.b_z.col(0)));
  MatX<S> r = detail::sigmoid(MatX<S>((g.w_r * x + g.u_r * h).colwise() + g.b_r.col(0)));
  MatX<S> rh = r.cwiseProduct(h);
  MatX<S> cand = ((g.w_h * x + g.u_h * rh).colwise() + g.b_h.col(0)).array().tanh().matrix();
  MatX<S> out = h + z.cwiseProduct(cand - h);
  if (cache) {
    cache->x = x;
    cache->h_prev = h;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->candidate = std::move(cand);
  }
  return out;
}

// Reverse-mode step. Accumulates weight gradients into `grad` (if not null)
// and returns dL/dx; dL/dh_prev is written to `dh_prev`.
template <typename S>
MatX<S> gru_cell_backward(const GruLayer<S>& g, const GruStepCache<S>& c, const MatX<S>& dh_new,
                          MatX<S>& dh_prev, GruLayer<S>* grad) {
  const MatX<S> dz = dh_new.cwiseProduct(c.candidate - c.h_prev);
  const MatX<S> dcand = dh_new.cwiseProduct(c.z);
  const MatX<S> da_h = dcand.cwiseProduct(
      (MatX<S>::Ones(c.candidate.rows(), c.candidate.cols()) - c.candidate.cwiseAbs2()));
  const MatX<S> da_z = dz.cwiseProduct(c.z.cwiseProduct((S(1) - c.z.array()).matrix()));
  const MatX<S> rh = c.r.cwiseProduct(c.h_prev);
  const MatX<S> drh = g.u_h.transpose() * da_h;
  const MatX<S> da_r = drh.cwiseProduct(c.h_prev).cwiseProduct(c.r.cwiseProduct((S(1) - c.r.array()).matrix()));

  dh_prev = dh_new.cwiseProduct((S(1) - c.z.array()).matrix()) + drh.cwiseProduct(c.r) +
            g.u_z.transpose() * da_z + g.u_r.transpose() * da_r;
  MatX<S> dx = g.w_h.transpose() * da_h + g.w_z.transpose() * da_z + g.w_r.transpose() * da_r;

  if (grad) {
    grad->w_z.noalias() += da_z * c.x.transpose();
    grad->w_r.noalias() += da_r * c.x.transpose();
    grad->w_h.noalias() += da_h * c.x.transpose();
    grad->u_z.noalias() += da_z * c.h_prev.transpose();
    grad->u_r.noalias() += da_r * c.h_prev.transpose();
    grad->u_h.noalias() += da_h * rh.transpose();
    grad->b_z += da_z.rowwise().sum();
    grad->b_r += da_r.rowwise().sum();
    grad->b_h += da_h.rowwise().sum();
  }
  return dx;
}

}  // namespace mfo
