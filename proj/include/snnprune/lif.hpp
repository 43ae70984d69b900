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

#ifndef SNNPRUNE_LIF_HPP_
#define SNNPRUNE_LIF_HPP_

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "snnprune/tensor.hpp"

namespace snnprune {

struct LifParams {
  double tau_m = 2.0;
  double v_rest = 0.0;
  double v_th = 1.0;

  void validate() const {
    if (tau_m <= 0.0) throw std::invalid_argument("LifParams: tau_m must be > 0");
    if (v_th <= v_rest)
      throw std::invalid_argument("LifParams: v_th must exceed v_rest");
  }
};

inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// Shifted-ArcTan spike surrogate h(u) = arctan(pi*u)/pi + 1/2 and its
// derivative 1/(1 + pi^2 u^2). The derivative stands in for dS/dH in the
// backward pass; the smooth h itself replaces the Heaviside in relaxed mode.
inline double smooth_fire(double u) {
  return std::atan(std::numbers::pi * u) / std::numbers::pi + 0.5;
}

inline double surrogate_derivative(double u) {
  const double p = std::numbers::pi * u;
  return 1.0 / (1.0 + p * p);
}

// Membrane state of one LIF population plus the per-timestep caches the
// backward pass consumes.
struct LifState {
  Tensor v;  // potential after the most recent spike/reset
  std::vector<Tensor> h_cache;  // H_t, potential after integration
  std::vector<Tensor> s_cache;  // S_t, binary spikes (or smooth in relaxed mode)

  explicit LifState(std::vector<std::size_t> shape)
      : v(Tensor::zeros(std::move(shape))) {}

  void reset(double v_rest) {
    std::fill(v.vec().begin(), v.vec().end(), v_rest);
    h_cache.clear();
    s_cache.clear();
  }

  std::size_t steps() const { return s_cache.size(); }

  // One discrete LIF update:
  //   H = V + (1/tau)(-(V - V_rest) + X)
  //   S = Theta(H - V_th)
  //   V' = S*V_rest + (1 - S)*H
  // Returns the spike tensor; relaxed mode swaps Theta for the smooth h.
  const Tensor& step(const Tensor& x, const LifParams& p, bool relaxed = false) {
    if (!x.same_shape(v))
      throw DimensionError("lif_step: input shape does not match state");
    const double inv_tau = 1.0 / p.tau_m;
    Tensor h = v;
    Tensor s(Tensor::zeros(x.shape()));
    for (std::size_t i = 0; i < h.numel(); ++i) {
      h[i] = v[i] + inv_tau * (-(v[i] - p.v_rest) + x[i]);
      s[i] = relaxed ? smooth_fire(h[i] - p.v_th) : heaviside(h[i] - p.v_th);
      v[i] = s[i] * p.v_rest + (1.0 - s[i]) * h[i];
    }
    h_cache.push_back(std::move(h));
    s_cache.push_back(std::move(s));
    return s_cache.back();
  }
};

}  // namespace snnprune

#endif  // SNNPRUNE_LIF_HPP_
