#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "urllc/matrix.hpp"
#include "urllc/net_model.hpp"
#include "urllc/rng.hpp"

namespace urllc {

// A_hat = D^{-1/2} (A + I) D^{-1/2}, kept as per-node coefficient lists.
// Degrees count the self-loop, so an isolated node carries coefficient 1.
struct NormalizedAdjacency {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> coeffs;
};

inline NormalizedAdjacency normalize_adjacency(const ConflictGraph& graph) {
  const int n = graph.size();
  NormalizedAdjacency adj;
  adj.n = n;
  adj.coeffs.resize(n);

  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(graph.degree(i) + 1));
  }
  for (int i = 0; i < n; ++i) {
    auto& row = adj.coeffs[i];
    const std::uint8_t* g = graph.row(i);
    for (int j = 0; j < n; ++j) {
      if (j == i || g[j]) row.emplace_back(j, inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  }
  return adj;
}

// Y = A_hat * X.
template <typename T>
Mat<T> apply_adjacency(const NormalizedAdjacency& adj, const Mat<T>& x) {
  assert(adj.n == x.rows());
  Mat<T> y(x.rows(), x.cols());
  const int cols = x.cols();
  for (int i = 0; i < adj.n; ++i) {
    T* yi = y.row(i);
    for (const auto& [j, coeff] : adj.coeffs[i]) {
      const T w = static_cast<T>(coeff);
      const T* xj = x.row(j);
      for (int k = 0; k < cols; ++k) yi[k] += w * xj[k];
    }
  }
  return y;
}

struct GcnDims {
  int in = 0;
  int hidden = 128;
  int out = 1;  // Q-heads; 1 = plain priority score, 2 = {ACTIVE, INACTIVE}
};

// Two graph-convolution layers plus a linear head. Double precision is the
// reference path; the float instantiation exists for the reduced-precision
// mode and its relaxed tests.
template <typename T>
struct GcnParamsT {
  GcnDims dims;
  Mat<T> w1;              // in x hidden
  Mat<T> w2;              // hidden x hidden
  Mat<T> w_out;           // hidden x out
  std::vector<T> b_out;   // out

  static GcnParamsT init(const GcnDims& dims, Rng& rng) {
    GcnParamsT p;
    p.dims = dims;
    p.w1 = xavier(dims.in, dims.hidden, rng);
    p.w2 = xavier(dims.hidden, dims.hidden, rng);
    p.w_out = xavier(dims.hidden, dims.out, rng);
    p.b_out.assign(dims.out, T{0});
    return p;
  }

  static GcnParamsT zeros(const GcnDims& dims) {
    GcnParamsT p;
    p.dims = dims;
    p.w1 = Mat<T>(dims.in, dims.hidden);
    p.w2 = Mat<T>(dims.hidden, dims.hidden);
    p.w_out = Mat<T>(dims.hidden, dims.out);
    p.b_out.assign(dims.out, T{0});
    return p;
  }

  std::size_t n_parameters() const {
    return w1.size() + w2.size() + w_out.size() + b_out.size();
  }

 private:
  static Mat<T> xavier(int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Mat<T> m(fan_in, fan_out);
    for (auto& v : m.data()) v = static_cast<T>(rng.uniform(-bound, bound));
    return m;
  }
};

using GcnParams = GcnParamsT<double>;

template <typename T>
struct GcnCacheT {
  Mat<T> ax;   // A_hat X
  Mat<T> z1;   // A_hat X W1
  Mat<T> ah1;  // A_hat ReLU(z1)
  Mat<T> z2;   // A_hat H1 W2
  Mat<T> h2;   // ReLU(z2)
};

template <typename T>
struct GcnForwardT {
  Mat<T> q;  // n x out
  GcnCacheT<T> cache;
};

template <typename T>
Mat<T> relu(const Mat<T>& m) {
  Mat<T> r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    r.data()[i] = m.data()[i] > T{0} ? m.data()[i] : T{0};
  }
  return r;
}

// H1 = ReLU(A_hat X W1); H2 = ReLU(A_hat H1 W2); q_i = W_out^T h2_i + b_out.
template <typename T>
GcnForwardT<T> forward(const Mat<T>& features, const NormalizedAdjacency& adj,
                       const GcnParamsT<T>& params) {
  assert(features.cols() == params.dims.in);
  assert(features.rows() == adj.n);

  GcnForwardT<T> out;
  auto& c = out.cache;
  c.ax = apply_adjacency(adj, features);
  c.z1 = matmul(c.ax, params.w1);
  Mat<T> h1 = relu(c.z1);
  c.ah1 = apply_adjacency(adj, h1);
  c.z2 = matmul(c.ah1, params.w2);
  c.h2 = relu(c.z2);
  out.q = matmul(c.h2, params.w_out);
  for (int i = 0; i < out.q.rows(); ++i) {
    for (int k = 0; k < params.dims.out; ++k) out.q(i, k) += params.b_out[k];
  }
  return out;
}

template <typename T>
struct GcnGradsT {
  Mat<T> w1;
  Mat<T> w2;
  Mat<T> w_out;
  std::vector<T> b_out;
};

// Exact gradients of sum_ik grad_q(i,k) * q(i,k). ReLU subgradient at 0 is 0.
template <typename T>
GcnGradsT<T> backward(const GcnCacheT<T>& cache, const NormalizedAdjacency& adj,
                      const GcnParamsT<T>& params, const Mat<T>& grad_q) {
  assert(grad_q.rows() == adj.n && grad_q.cols() == params.dims.out);

  GcnGradsT<T> g;
  g.b_out.assign(params.dims.out, T{0});
  for (int i = 0; i < grad_q.rows(); ++i) {
    for (int k = 0; k < grad_q.cols(); ++k) g.b_out[k] += grad_q(i, k);
  }
  g.w_out = matmul_at_b(cache.h2, grad_q);

  Mat<T> d_h2 = matmul_a_bt(grad_q, params.w_out);
  for (std::size_t i = 0; i < d_h2.size(); ++i) {
    if (cache.z2.data()[i] <= T{0}) d_h2.data()[i] = T{0};
  }
  g.w2 = matmul_at_b(cache.ah1, d_h2);

  // A_hat is symmetric, so the adjoint of apply_adjacency is itself.
  Mat<T> d_h1 = apply_adjacency(adj, matmul_a_bt(d_h2, params.w2));
  for (std::size_t i = 0; i < d_h1.size(); ++i) {
    if (cache.z1.data()[i] <= T{0}) d_h1.data()[i] = T{0};
  }
  g.w1 = matmul_at_b(cache.ax, d_h1);
  return g;
}

// Per-link priority: q_ACTIVE - q_INACTIVE for a two-head net, the raw score
// for a single head.
template <typename T>
std::vector<T> priorities_from_q(const Mat<T>& q) {
  std::vector<T> p(q.rows());
  for (int i = 0; i < q.rows(); ++i) {
    p[i] = q.cols() >= 2 ? q(i, 0) - q(i, 1) : q(i, 0);
  }
  return p;
}

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamStateT {
  AdamConfig cfg;
  long step = 0;
  Mat<T> m_w1, v_w1;
  Mat<T> m_w2, v_w2;
  Mat<T> m_wout, v_wout;
  std::vector<T> m_b, v_b;

  static AdamStateT init(const GcnParamsT<T>& params, const AdamConfig& cfg = {}) {
    AdamStateT s;
    s.cfg = cfg;
    s.m_w1 = Mat<T>(params.w1.rows(), params.w1.cols());
    s.v_w1 = Mat<T>(params.w1.rows(), params.w1.cols());
    s.m_w2 = Mat<T>(params.w2.rows(), params.w2.cols());
    s.v_w2 = Mat<T>(params.w2.rows(), params.w2.cols());
    s.m_wout = Mat<T>(params.w_out.rows(), params.w_out.cols());
    s.v_wout = Mat<T>(params.w_out.rows(), params.w_out.cols());
    s.m_b.assign(params.b_out.size(), T{0});
    s.v_b.assign(params.b_out.size(), T{0});
    return s;
  }
};

using AdamState = AdamStateT<double>;

namespace detail {

template <typename T>
void adam_update_span(T* param, T* m, T* v, const T* grad, std::size_t n,
                      const AdamConfig& cfg, double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = static_cast<double>(grad[i]);
    const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / bias1;
    const double v_hat = vi / bias2;
    param[i] = static_cast<T>(static_cast<double>(param[i]) -
                              cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

}  // namespace detail

// Standard bias-corrected Adam over all parameter tensors at once.
template <typename T>
void adam_step(GcnParamsT<T>& params, const GcnGradsT<T>& grads, AdamStateT<T>& state) {
  assert(params.w1.same_shape(grads.w1) && params.w2.same_shape(grads.w2) &&
         params.w_out.same_shape(grads.w_out) && params.b_out.size() == grads.b_out.size());
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  detail::adam_update_span(params.w1.data().data(), state.m_w1.data().data(),
                           state.v_w1.data().data(), grads.w1.data().data(), params.w1.size(),
                           state.cfg, bias1, bias2);
  detail::adam_update_span(params.w2.data().data(), state.m_w2.data().data(),
                           state.v_w2.data().data(), grads.w2.data().data(), params.w2.size(),
                           state.cfg, bias1, bias2);
  detail::adam_update_span(params.w_out.data().data(), state.m_wout.data().data(),
                           state.v_wout.data().data(), grads.w_out.data().data(),
                           params.w_out.size(), state.cfg, bias1, bias2);
  detail::adam_update_span(params.b_out.data(), state.m_b.data(), state.v_b.data(),
                           grads.b_out.data(), params.b_out.size(), state.cfg, bias1, bias2);
}

// Flat views used by checkpointing and the finite-difference harness.
template <typename T>
std::vector<double> flatten_params(const GcnParamsT<T>& p) {
  std::vector<double> flat;
  flat.reserve(p.n_parameters());
  for (const auto& v : p.w1.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : p.w2.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : p.w_out.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : p.b_out) flat.push_back(static_cast<double>(v));
  return flat;
}

template <typename T>
void unflatten_params(const std::vector<double>& flat, GcnParamsT<T>& p) {
  assert(flat.size() == p.n_parameters());
  std::size_t k = 0;
  for (auto& v : p.w1.data()) v = static_cast<T>(flat[k++]);
  for (auto& v : p.w2.data()) v = static_cast<T>(flat[k++]);
  for (auto& v : p.w_out.data()) v = static_cast<T>(flat[k++]);
  for (auto& v : p.b_out) v = static_cast<T>(flat[k++]);
}

template <typename T>
std::vector<double> flatten_grads(const GcnGradsT<T>& g) {
  std::vector<double> flat;
  for (const auto& v : g.w1.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : g.w2.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : g.w_out.data()) flat.push_back(static_cast<double>(v));
  for (const auto& v : g.b_out) flat.push_back(static_cast<double>(v));
  return flat;
}

}  // namespace urllc
