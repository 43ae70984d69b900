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

#ifndef SNNPRUNE_OPTIMIZER_HPP_
#define SNNPRUNE_OPTIMIZER_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "snnprune/network.hpp"

namespace snnprune {

// Per-layer 0/1 mask over weight slots; 0 keeps a pruned weight frozen at
// exact zero.
struct GradMask {
  std::vector<std::vector<std::uint8_t>> w;

  bool empty() const { return w.empty(); }

  static GradMask ones_like(const SpikingNetwork& net) {
    GradMask m;
    for (const auto& l : net.layers)
      m.w.emplace_back(l.weight_count(), std::uint8_t{1});
    return m;
  }
};

enum class OptimizerKind { kAdam, kSgd };

// Base weight step wrapped by the proximal update. Adam for shallow nets,
// SGD with momentum and weight decay for deep ones.
class Optimizer {
 public:
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-4;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void init(const SpikingNetwork& net) {
    m_w_.clear(); v_w_.clear(); m_b_.clear(); v_b_.clear();
    for (const auto& l : net.layers) {
      m_w_.push_back(Tensor::zeros(l.w.shape()));
      v_w_.push_back(Tensor::zeros(l.w.shape()));
      m_b_.push_back(Tensor::zeros(l.b.shape()));
      v_b_.push_back(Tensor::zeros(l.b.shape()));
    }
    step_count_ = 0;
  }

  void reset_moments() {
    for (auto& t : m_w_) std::fill(t.vec().begin(), t.vec().end(), 0.0);
    for (auto& t : v_w_) std::fill(t.vec().begin(), t.vec().end(), 0.0);
    for (auto& t : m_b_) std::fill(t.vec().begin(), t.vec().end(), 0.0);
    for (auto& t : v_b_) std::fill(t.vec().begin(), t.vec().end(), 0.0);
    step_count_ = 0;
  }

  void step(SpikingNetwork& net, const Gradients& grads,
            const GradMask* mask = nullptr) {
    ++step_count_;
    for (std::size_t n = 0; n < net.layers.size(); ++n) {
      const std::uint8_t* wm =
          (mask && !mask->empty()) ? mask->w[n].data() : nullptr;
      update(net.layers[n].w, grads.w[n], m_w_[n], v_w_[n], wm);
      if (net.layers[n].has_bias)
        update(net.layers[n].b, grads.b[n], m_b_[n], v_b_[n], nullptr);
    }
  }

  std::size_t step_count() const { return step_count_; }
  std::vector<Tensor>& moments_m_w() { return m_w_; }
  std::vector<Tensor>& moments_v_w() { return v_w_; }
  std::vector<Tensor>& moments_m_b() { return m_b_; }
  std::vector<Tensor>& moments_v_b() { return v_b_; }
  void set_step_count(std::size_t c) { step_count_ = c; }

 private:
  void update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
              const std::uint8_t* mask) {
    if (kind == OptimizerKind::kAdam) {
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count_));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count_));
      for (std::size_t i = 0; i < param.numel(); ++i) {
        if (mask && !mask[i]) { param[i] = 0.0; continue; }
        const double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      }
    } else {
      for (std::size_t i = 0; i < param.numel(); ++i) {
        if (mask && !mask[i]) { param[i] = 0.0; continue; }
        const double g = grad[i] + weight_decay * param[i];
        m[i] = momentum * m[i] + g;
        param[i] -= lr * m[i];
      }
    }
  }

  std::vector<Tensor> m_w_, v_w_, m_b_, v_b_;
  std::size_t step_count_ = 0;
};

}  // namespace snnprune

#endif  // SNNPRUNE_OPTIMIZER_HPP_
