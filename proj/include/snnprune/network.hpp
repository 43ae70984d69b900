// Copyright 2026 The snnprune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNNPRUNE_NETWORK_HPP_
#define SNNPRUNE_NETWORK_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snnprune/lif.hpp"
#include "snnprune/tensor.hpp"

namespace snnprune {

struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One synaptic stage (dense or convolutional) feeding a LIF population.
struct Layer {
  enum class Kind { kLinear, kConv };

  Kind kind = Kind::kLinear;
  Tensor w;  // linear: [out x in]; conv: [cout x cin x k x k]
  Tensor b;  // [out] resp. [cout]
  bool has_bias = true;
  LifParams lif;
  bool prunable = true;

  // conv geometry (unused for linear layers)
  std::size_t in_c = 0, in_h = 0, in_w = 0;
  std::size_t ksize = 0, stride = 1, pad = 0;
  std::size_t out_h = 0, out_w = 0;

  static Layer linear(std::size_t in, std::size_t out, LifParams lif = {}) {
    Layer l;
    l.kind = Kind::kLinear;
    l.w = Tensor::zeros({out, in});
    l.b = Tensor::zeros({out});
    l.lif = lif;
    return l;
  }

  static Layer conv(std::size_t in_c, std::size_t in_h, std::size_t in_w,
                    std::size_t out_c, std::size_t k, std::size_t stride,
                    std::size_t pad, LifParams lif = {}) {
    Layer l;
    l.kind = Kind::kConv;
    l.w = Tensor::zeros({out_c, in_c, k, k});
    l.b = Tensor::zeros({out_c});
    l.lif = lif;
    l.in_c = in_c;
    l.in_h = in_h;
    l.in_w = in_w;
    l.ksize = k;
    l.stride = stride;
    l.pad = pad;
    l.out_h = conv_out_dim(in_h, k, stride, pad);
    l.out_w = conv_out_dim(in_w, k, stride, pad);
    return l;
  }

  std::size_t in_features() const {
    return kind == Kind::kLinear ? w.dim(1) : in_c * in_h * in_w;
  }
  std::size_t out_channels() const { return w.dim(0); }
  std::size_t out_features() const {
    return kind == Kind::kLinear ? w.dim(0) : w.dim(0) * out_h * out_w;
  }
  std::size_t weight_count() const { return w.numel(); }

  // Times each weight participates in a multiply-accumulate per inference.
  double flops_per_weight() const {
    return kind == Kind::kConv ? static_cast<double>(out_h * out_w) : 1.0;
  }
};

// Synaptic current for a batch: X [B x in_features] -> [B x out_features].
inline Tensor affine_forward(const Layer& l, const Tensor& x) {
  if (x.ndim() != 2 || x.dim(1) != l.in_features())
    throw DimensionError("affine_forward: input shape mismatch");
  const std::size_t batch = x.dim(0);
  Tensor out({batch, l.out_features()});
  if (l.kind == Layer::Kind::kLinear) {
    const std::size_t in = l.w.dim(1), o = l.w.dim(0);
    gemm_acc(false, true, batch, o, in, 1.0, x.data(), in, l.w.data(), in, 0.0,
             out.data(), o);
    if (l.has_bias)
      for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < o; ++j) out[i * o + j] += l.b[j];
  } else {
    const std::size_t cout = l.out_channels();
    const std::size_t kk = l.in_c * l.ksize * l.ksize;
    const std::size_t area = l.out_h * l.out_w;
    for (std::size_t i = 0; i < batch; ++i) {
      Tensor img({l.in_c, l.in_h, l.in_w},
                 std::vector<double>(x.data() + i * l.in_features(),
                                     x.data() + (i + 1) * l.in_features()));
      Tensor cols = im2col(img, l.ksize, l.stride, l.pad);
      gemm_acc(false, false, cout, area, kk, 1.0, l.w.data(), kk, cols.data(),
               area, 0.0, out.data() + i * cout * area, area);
      if (l.has_bias)
        for (std::size_t c = 0; c < cout; ++c)
          for (std::size_t p = 0; p < area; ++p)
            out[i * cout * area + c * area + p] += l.b[c];
    }
  }
  return out;
}

// Backward through the synaptic current. Accumulates into gw/gb; fills g_in
// when requested (skipped for the bottom layer).
inline void affine_backward(const Layer& l, const Tensor& x,
                            const Tensor& g_out, Tensor& gw, Tensor& gb,
                            Tensor* g_in) {
  const std::size_t batch = x.dim(0);
  if (l.kind == Layer::Kind::kLinear) {
    const std::size_t in = l.w.dim(1), o = l.w.dim(0);
    gemm_acc(true, false, o, in, batch, 1.0, g_out.data(), o, x.data(), in, 1.0,
             gw.data(), in);
    if (l.has_bias)
      for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < o; ++j) gb[j] += g_out[i * o + j];
    if (g_in)
      gemm_acc(false, false, batch, in, o, 1.0, g_out.data(), o, l.w.data(), in,
               0.0, g_in->data(), in);
  } else {
    const std::size_t cout = l.out_channels();
    const std::size_t kk = l.in_c * l.ksize * l.ksize;
    const std::size_t area = l.out_h * l.out_w;
    for (std::size_t i = 0; i < batch; ++i) {
      Tensor img({l.in_c, l.in_h, l.in_w},
                 std::vector<double>(x.data() + i * l.in_features(),
                                     x.data() + (i + 1) * l.in_features()));
      Tensor cols = im2col(img, l.ksize, l.stride, l.pad);
      const double* go = g_out.data() + i * cout * area;
      gemm_acc(false, true, cout, kk, area, 1.0, go, area, cols.data(), area,
               1.0, gw.data(), kk);
      if (l.has_bias)
        for (std::size_t c = 0; c < cout; ++c)
          for (std::size_t p = 0; p < area; ++p) gb[c] += go[c * area + p];
      if (g_in) {
        Tensor gcols({kk, area});
        gemm_acc(true, false, kk, area, cout, 1.0, l.w.data(), kk, go, area,
                 0.0, gcols.data(), area);
        Tensor gimg = Tensor::zeros({l.in_c, l.in_h, l.in_w});
        col2im_acc(gcols, l.in_c, l.in_h, l.in_w, l.ksize, l.stride, l.pad,
                   gimg);
        std::copy(gimg.data(), gimg.data() + gimg.numel(),
                  g_in->data() + i * l.in_features());
      }
    }
  }
}

class SpikingNetwork {
 public:
  std::vector<Layer> layers;
  std::size_t timesteps = 8;
  // Reset path treated as constant in backward (gradient through H only).
  bool detached_reset = true;

  void validate() const {
    if (timesteps < 1)
      throw std::invalid_argument("SpikingNetwork: timesteps must be >= 1");
    if (layers.empty())
      throw std::invalid_argument("SpikingNetwork: no layers");
    for (std::size_t n = 0; n < layers.size(); ++n) {
      layers[n].lif.validate();
      if (n + 1 < layers.size() &&
          layers[n].out_features() != layers[n + 1].in_features())
        throw DimensionError("SpikingNetwork: layer " + std::to_string(n) +
                             " output does not feed layer " +
                             std::to_string(n + 1));
    }
  }

  std::size_t num_classes() const { return layers.back().out_features(); }
};

// Everything the STBP backward pass needs from a forward unroll.
struct Caches {
  bool relaxed = false;
  std::size_t timesteps = 0;
  Tensor input;                        // [B x in_features], constant per step
  std::vector<std::vector<Tensor>> h;  // [layer][t], B x out_features
  std::vector<std::vector<Tensor>> s;  // [layer][t]
};

struct ForwardResult {
  Tensor rates;  // [B x classes], mean spike count over timesteps
  Caches caches;
};

struct Gradients {
  std::vector<Tensor> w;
  std::vector<Tensor> b;

  static Gradients zeros_like(const SpikingNetwork& net) {
    Gradients g;
    for (const auto& l : net.layers) {
      g.w.push_back(Tensor::zeros(l.w.shape()));
      g.b.push_back(Tensor::zeros(l.b.shape()));
    }
    return g;
  }
};

// Time-unrolled forward pass with constant-current input encoding: the same
// input drives timestep 0..T-1, so the bottom layer's current is computed
// once. Output is the firing rate of the last layer.
inline ForwardResult forward_unroll(const SpikingNetwork& net,
                                    const Tensor& input,
                                    bool relaxed = false) {
  net.validate();
  if (input.ndim() != 2 || input.dim(1) != net.layers.front().in_features())
    throw DimensionError("forward_unroll: input shape mismatch");
  const std::size_t batch = input.dim(0);
  const std::size_t nl = net.layers.size();

  std::vector<LifState> states;
  states.reserve(nl);
  for (const auto& l : net.layers) {
    states.emplace_back(std::vector<std::size_t>{batch, l.out_features()});
    states.back().reset(l.lif.v_rest);
  }

  const Tensor current0 = affine_forward(net.layers[0], input);
  Tensor rates = Tensor::zeros({batch, net.num_classes()});
  for (std::size_t t = 0; t < net.timesteps; ++t) {
    const Tensor* spikes = &states[0].step(current0, net.layers[0].lif, relaxed);
    for (std::size_t n = 1; n < nl; ++n) {
      Tensor x = affine_forward(net.layers[n], *spikes);
      spikes = &states[n].step(x, net.layers[n].lif, relaxed);
    }
    for (std::size_t i = 0; i < rates.numel(); ++i) rates[i] += (*spikes)[i];
  }
  const double inv_t = 1.0 / static_cast<double>(net.timesteps);
  for (std::size_t i = 0; i < rates.numel(); ++i) rates[i] *= inv_t;

  ForwardResult res{std::move(rates), {}};
  res.caches.relaxed = relaxed;
  res.caches.timesteps = net.timesteps;
  res.caches.input = input;
  res.caches.h.resize(nl);
  res.caches.s.resize(nl);
  for (std::size_t n = 0; n < nl; ++n) {
    res.caches.h[n] = std::move(states[n].h_cache);
    res.caches.s[n] = std::move(states[n].s_cache);
  }
  return res;
}

inline Tensor relaxed_forward(const SpikingNetwork& net, const Tensor& input) {
  return forward_unroll(net, input, true).rates;
}

// STBP backward: walks timesteps last-to-first and layers top-to-bottom,
// accumulating the spatial (layer n+1 -> n) and temporal (t+1 -> t) paths.
// The surrogate derivative replaces dS/dH; in relaxed caches the same
// expressions are the exact derivatives of the smooth forward.
inline Gradients stbp_backward(const SpikingNetwork& net, const Caches& caches,
                               const Tensor& d_rates) {
  const std::size_t nl = net.layers.size();
  if (caches.h.size() != nl || caches.timesteps != net.timesteps)
    throw StateError("stbp_backward: caches do not match network");
  for (std::size_t n = 0; n < nl; ++n)
    if (caches.h[n].size() != net.timesteps)
      throw StateError("stbp_backward: cache length mismatch");
  const std::size_t batch = caches.input.dim(0);
  if (d_rates.ndim() != 2 || d_rates.dim(0) != batch ||
      d_rates.dim(1) != net.num_classes())
    throw DimensionError("stbp_backward: d_rates shape mismatch");

  Gradients grads = Gradients::zeros_like(net);
  const double inv_t = 1.0 / static_cast<double>(net.timesteps);

  // dL/dH at timestep t+1, one buffer per layer.
  std::vector<Tensor> g_h_next;
  for (const auto& l : net.layers)
    g_h_next.push_back(Tensor::zeros({batch, l.out_features()}));
  // Current deposited into layer 0 is the same every step; its weight
  // gradient folds into one GEMM at the end.
  Tensor gx0_sum = Tensor::zeros({batch, net.layers[0].out_features()});

  for (std::size_t ti = net.timesteps; ti-- > 0;) {
    Tensor g_spike;  // upstream dL/dS for the layer being processed
    for (std::size_t n = nl; n-- > 0;) {
      const Layer& l = net.layers[n];
      const Tensor& h = caches.h[n][ti];
      const Tensor& s = caches.s[n][ti];
      const double inv_tau = 1.0 / l.lif.tau_m;
      const double leak = 1.0 - inv_tau;

      Tensor g_h({batch, l.out_features()});
      for (std::size_t i = 0; i < g_h.numel(); ++i) {
        const double sp = surrogate_derivative(h[i] - l.lif.v_th);
        double up = (n == nl - 1) ? d_rates[i] * inv_t : g_spike[i];
        const double g_v = g_h_next[n][i] * leak;
        double dvdh = 1.0 - s[i];
        if (caches.relaxed || !net.detached_reset)
          dvdh += (l.lif.v_rest - h[i]) * sp;
        g_h[i] = up * sp + g_v * dvdh;
      }
      g_h_next[n] = g_h;

      Tensor g_x = std::move(g_h);
      for (std::size_t i = 0; i < g_x.numel(); ++i) g_x[i] *= inv_tau;

      if (n == 0) {
        for (std::size_t i = 0; i < g_x.numel(); ++i) gx0_sum[i] += g_x[i];
      } else {
        Tensor g_prev({batch, net.layers[n - 1].out_features()});
        affine_backward(l, caches.s[n - 1][ti], g_x, grads.w[n], grads.b[n],
                        &g_prev);
        g_spike = std::move(g_prev);
      }
    }
  }
  affine_backward(net.layers[0], caches.input, gx0_sum, grads.w[0], grads.b[0],
                  nullptr);
  return grads;
}

struct LossGrad {
  double loss = 0.0;
  Tensor d_rates;
};

inline Tensor one_hot(const std::vector<int>& labels, std::size_t classes) {
  Tensor t = Tensor::zeros({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i)
    t[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
  return t;
}

inline LossGrad loss_mse(const Tensor& rates, const Tensor& targets) {
  if (!rates.same_shape(targets))
    throw DimensionError("loss_mse: shape mismatch");
  LossGrad lg;
  lg.d_rates = Tensor::zeros(rates.shape());
  const double inv = 1.0 / static_cast<double>(rates.numel());
  for (std::size_t i = 0; i < rates.numel(); ++i) {
    const double d = rates[i] - targets[i];
    lg.loss += d * d * inv;
    lg.d_rates[i] = 2.0 * d * inv;
  }
  return lg;
}

inline LossGrad loss_cross_entropy(const Tensor& rates,
                                   const std::vector<int>& labels) {
  const std::size_t batch = rates.dim(0), c = rates.dim(1);
  if (labels.size() != batch)
    throw DimensionError("loss_cross_entropy: label count mismatch");
  LossGrad lg;
  lg.d_rates = Tensor::zeros(rates.shape());
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    double mx = rates[i * c];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, rates[i * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(rates[i * c + j] - mx);
    const auto label = static_cast<std::size_t>(labels[i]);
    lg.loss -= (rates[i * c + label] - mx - std::log(z)) * inv_b;
    for (std::size_t j = 0; j < c; ++j) {
      const double p = std::exp(rates[i * c + j] - mx) / z;
      lg.d_rates[i * c + j] = (p - (j == label ? 1.0 : 0.0)) * inv_b;
    }
  }
  return lg;
}

inline std::size_t count_correct(const Tensor& rates,
                                 const std::vector<int>& labels) {
  const std::size_t batch = rates.dim(0), c = rates.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (rates[i * c + j] > rates[i * c + best]) best = j;
    if (best == static_cast<std::size_t>(labels[i])) ++correct;
  }
  return correct;
}

}  // namespace snnprune

#endif  // SNNPRUNE_NETWORK_HPP_
