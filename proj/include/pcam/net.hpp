#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcam/rng.hpp"

namespace pcam {

// Fully-connected value network with a state-value head and a per-action
// advantage head: Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a').
// Templated on the scalar so tests can run the identical math in double.
template <typename T>
struct DuelingNet {
  struct Dense {
    int in = 0, out = 0;
    std::vector<T> w;  // row-major, out x in
    std::vector<T> b;

    void resize(int in_dim, int out_dim) {
      in = in_dim;
      out = out_dim;
      w.assign(static_cast<std::size_t>(in) * static_cast<std::size_t>(out), T(0));
      b.assign(static_cast<std::size_t>(out), T(0));
    }
  };

  Dense fc1, fc2, value, advantage;

  int input_dim() const { return fc1.in; }
  int hidden_dim() const { return fc1.out; }
  int num_actions() const { return advantage.out; }

  void init(int input, int hidden, int actions, RandomSource& rng) {
    fc1.resize(input, hidden);
    fc2.resize(hidden, hidden);
    value.resize(hidden, 1);
    advantage.resize(hidden, actions);
    init_layer(fc1, rng);
    init_layer(fc2, rng);
    init_layer(value, rng);
    init_layer(advantage, rng);
  }

  std::size_t parameter_count() const {
    return fc1.w.size() + fc1.b.size() + fc2.w.size() + fc2.b.size() +
           value.w.size() + value.b.size() + advantage.w.size() +
           advantage.b.size();
  }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn("fc1.w", fc1.w);
    fn("fc1.b", fc1.b);
    fn("fc2.w", fc2.w);
    fn("fc2.b", fc2.b);
    fn("value.w", value.w);
    fn("value.b", value.b);
    fn("advantage.w", advantage.w);
    fn("advantage.b", advantage.b);
  }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    fn("fc1.w", fc1.w);
    fn("fc1.b", fc1.b);
    fn("fc2.w", fc2.w);
    fn("fc2.b", fc2.b);
    fn("value.w", value.w);
    fn("value.b", value.b);
    fn("advantage.w", advantage.w);
    fn("advantage.b", advantage.b);
  }

 private:
  static void init_layer(Dense& layer, RandomSource& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (auto& w : layer.w) w = static_cast<T>(rng.uniform(-bound, bound));
    std::fill(layer.b.begin(), layer.b.end(), T(0));
  }
};

// Per-sample activations kept for the backward pass.
template <typename T>
struct ForwardCache {
  std::vector<T> input;
  std::vector<T> h1, h2;       // post-rectifier
  std::vector<T> adv;          // raw advantage outputs
  T value = T(0);
  std::vector<T> q;
};

namespace detail {

template <typename T>
void affine(const typename DuelingNet<T>::Dense& layer, std::span<const T> x,
            std::span<T> y) {
  for (int o = 0; o < layer.out; ++o) {
    const T* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
    T acc = layer.b[static_cast<std::size_t>(o)];
    for (int i = 0; i < layer.in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = acc;
  }
}

}  // namespace detail

template <typename T>
void forward(const DuelingNet<T>& net, std::span<const T> state,
             ForwardCache<T>& cache) {
  const int in = net.input_dim();
  const int hidden = net.hidden_dim();
  const int actions = net.num_actions();
  if (static_cast<int>(state.size()) != in)
    throw std::invalid_argument("forward: input dimension mismatch");
  for (const T& s : state)
    if (!std::isfinite(static_cast<double>(s)))
      throw std::invalid_argument("forward: non-finite input");

  cache.input.assign(state.begin(), state.end());
  cache.h1.resize(static_cast<std::size_t>(hidden));
  cache.h2.resize(static_cast<std::size_t>(hidden));
  cache.adv.resize(static_cast<std::size_t>(actions));
  cache.q.resize(static_cast<std::size_t>(actions));

  detail::affine<T>(net.fc1, state, cache.h1);
  for (auto& h : cache.h1) h = std::max(T(0), h);
  detail::affine<T>(net.fc2, cache.h1, cache.h2);
  for (auto& h : cache.h2) h = std::max(T(0), h);

  T v;
  detail::affine<T>(net.value, cache.h2, std::span<T>(&v, 1));
  cache.value = v;
  detail::affine<T>(net.advantage, cache.h2, cache.adv);

  T mean = T(0);
  for (const T& a : cache.adv) mean += a;
  mean /= static_cast<T>(actions);
  for (int a = 0; a < actions; ++a)
    cache.q[static_cast<std::size_t>(a)] =
        v + cache.adv[static_cast<std::size_t>(a)] - mean;
}

// Convenience forward that returns the Q-vector.
template <typename T>
std::vector<T> forward(const DuelingNet<T>& net, std::span<const T> state) {
  ForwardCache<T> cache;
  forward(net, state, cache);
  return cache.q;
}

// Argmax with ties broken toward the lowest action id.
template <typename T>
int greedy_action(std::span<const T> q) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a)
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  return best;
}

template <typename T>
int greedy_action(const DuelingNet<T>& net, std::span<const T> state) {
  const std::vector<T> q = forward(net, state);
  return greedy_action<T>(q);
}

// Gradient buffers shaped like the network.
template <typename T>
struct NetGradients {
  DuelingNet<T> g;

  void match(const DuelingNet<T>& net) {
    g.fc1.resize(net.fc1.in, net.fc1.out);
    g.fc2.resize(net.fc2.in, net.fc2.out);
    g.value.resize(net.value.in, net.value.out);
    g.advantage.resize(net.advantage.in, net.advantage.out);
  }

  void zero() {
    g.for_each_tensor([](const char*, std::vector<T>& t) {
      std::fill(t.begin(), t.end(), T(0));
    });
  }
};

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(Q).
template <typename T>
void backward(const DuelingNet<T>& net, const ForwardCache<T>& cache,
              std::span<const T> dq, NetGradients<T>& grads) {
  const int hidden = net.hidden_dim();
  const int actions = net.num_actions();

  // Head gradients: dQ_a/dV = 1, dQ_a/dA_b = delta_ab - 1/|A|.
  T dq_sum = T(0);
  for (const T& d : dq) dq_sum += d;
  const T dvalue = dq_sum;
  std::vector<T> dadv(static_cast<std::size_t>(actions));
  for (int a = 0; a < actions; ++a)
    dadv[static_cast<std::size_t>(a)] =
        dq[static_cast<std::size_t>(a)] - dq_sum / static_cast<T>(actions);

  std::vector<T> dh2(static_cast<std::size_t>(hidden), T(0));
  // value head
  grads.g.value.b[0] += dvalue;
  {
    T* gw = grads.g.value.w.data();
    const T* h2 = cache.h2.data();
    const T* wv = net.value.w.data();
    for (int i = 0; i < hidden; ++i) {
      gw[i] += dvalue * h2[i];
      dh2[static_cast<std::size_t>(i)] += wv[i] * dvalue;
    }
  }
  // advantage head
  for (int a = 0; a < actions; ++a) {
    const T d = dadv[static_cast<std::size_t>(a)];
    if (d == T(0)) continue;
    T* gw = grads.g.advantage.w.data() + static_cast<std::size_t>(a) * hidden;
    const T* wa = net.advantage.w.data() + static_cast<std::size_t>(a) * hidden;
    const T* h2 = cache.h2.data();
    grads.g.advantage.b[static_cast<std::size_t>(a)] += d;
    for (int i = 0; i < hidden; ++i) {
      gw[i] += d * h2[i];
      dh2[static_cast<std::size_t>(i)] += wa[i] * d;
    }
  }

  // through the second rectifier
  for (int i = 0; i < hidden; ++i)
    if (cache.h2[static_cast<std::size_t>(i)] <= T(0)) dh2[static_cast<std::size_t>(i)] = T(0);

  std::vector<T> dh1(static_cast<std::size_t>(hidden), T(0));
  for (int o = 0; o < hidden; ++o) {
    const T d = dh2[static_cast<std::size_t>(o)];
    if (d == T(0)) continue;
    T* gw = grads.g.fc2.w.data() + static_cast<std::size_t>(o) * hidden;
    const T* w = net.fc2.w.data() + static_cast<std::size_t>(o) * hidden;
    const T* h1 = cache.h1.data();
    grads.g.fc2.b[static_cast<std::size_t>(o)] += d;
    for (int i = 0; i < hidden; ++i) {
      gw[i] += d * h1[i];
      dh1[static_cast<std::size_t>(i)] += w[i] * d;
    }
  }

  for (int i = 0; i < hidden; ++i)
    if (cache.h1[static_cast<std::size_t>(i)] <= T(0)) dh1[static_cast<std::size_t>(i)] = T(0);

  const int in = net.input_dim();
  for (int o = 0; o < hidden; ++o) {
    const T d = dh1[static_cast<std::size_t>(o)];
    if (d == T(0)) continue;
    T* gw = grads.g.fc1.w.data() + static_cast<std::size_t>(o) * in;
    const T* x = cache.input.data();
    grads.g.fc1.b[static_cast<std::size_t>(o)] += d;
    for (int i = 0; i < in; ++i) gw[i] += d * x[i];
  }
}

// Huber loss, quadratic within delta and linear outside.
template <typename T>
T huber_loss(T error, T delta) {
  const T abs_err = std::abs(error);
  if (abs_err <= delta) return T(0.5) * error * error;
  return delta * (abs_err - T(0.5) * delta);
}

template <typename T>
T huber_grad(T error, T delta) {
  return std::clamp(error, -delta, delta);
}

inline double huber_loss(double pred, double target, double delta) {
  return huber_loss(pred - target, delta);
}

// Scales all gradients so the global L2 norm does not exceed max_norm.
// Returns the pre-clip norm.
template <typename T>
double clip_global_norm(NetGradients<T>& grads, double max_norm) {
  double sum_sq = 0.0;
  grads.g.for_each_tensor([&](const char*, std::vector<T>& t) {
    for (const T& v : t) sum_sq += static_cast<double>(v) * static_cast<double>(v);
  });
  const double norm = std::sqrt(sum_sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    grads.g.for_each_tensor([&](const char*, std::vector<T>& t) {
      for (T& v : t) v *= scale;
    });
  }
  return norm;
}

// Adaptive-moment gradient descent over the network parameters.
template <typename T>
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void match(const DuelingNet<T>& net) {
    m_.match(net);
    v_.match(net);
    m_.zero();
    v_.zero();
    step_ = 0;
  }

  void update(DuelingNet<T>& net, const NetGradients<T>& grads) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    auto* mg = &m_.g;
    auto* vg = &v_.g;
    apply(net.fc1, grads.g.fc1, mg->fc1, vg->fc1, bc1, bc2);
    apply(net.fc2, grads.g.fc2, mg->fc2, vg->fc2, bc1, bc2);
    apply(net.value, grads.g.value, mg->value, vg->value, bc1, bc2);
    apply(net.advantage, grads.g.advantage, mg->advantage, vg->advantage, bc1, bc2);
  }

  std::int64_t steps() const { return step_; }

 private:
  using Dense = typename DuelingNet<T>::Dense;

  void apply(Dense& p, const Dense& g, Dense& m, Dense& v, double bc1, double bc2) {
    apply_span(p.w, g.w, m.w, v.w, bc1, bc2);
    apply_span(p.b, g.b, m.b, v.b, bc1, bc2);
  }

  void apply_span(std::vector<T>& p, const std::vector<T>& g, std::vector<T>& m,
                  std::vector<T>& v, double bc1, double bc2) {
    const T b1 = static_cast<T>(beta1_);
    const T b2 = static_cast<T>(beta2_);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const double mhat = static_cast<double>(m[i]) / bc1;
      const double vhat = static_cast<double>(v[i]) / bc2;
      p[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }

  double lr_ = 1e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  NetGradients<T> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace pcam
