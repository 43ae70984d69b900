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

#ifndef SNNPRUNE_RESOURCE_HPP_
#define SNNPRUNE_RESOURCE_HPP_

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "snnprune/network.hpp"
#include "snnprune/sparsity.hpp"

namespace snnprune {

enum class ResourceKind { kConnectivity, kParameters, kFlops };

// R(s): remaining resource ratio after removing the s smallest-magnitude
// view elements. Non-increasing in s; evaluated from s alone, except that
// structured kinds need the current magnitude ordering to know which layer
// each removed element sits in.
class ResourceModel {
 public:
  static ResourceModel build(const SpikingNetwork& net, ResourceKind kind,
                             const FlatView& view) {
    ResourceModel m;
    m.kind_ = kind;
    m.structured_ = view.is_structured();
    m.n_ = view.size();

    if (kind == ResourceKind::kFlops && !m.structured_) {
      // Unstructured zeros do not shrink dense FLOPs; fall back to the
      // parameter ratio.
      std::cerr << "[resource] flops kind is structured-only; "
                   "using parameters kind instead\n";
      m.kind_ = ResourceKind::kParameters;
      kind = m.kind_;
    }

    double denom = 0.0;
    for (const auto& l : net.layers) {
      switch (kind) {
        case ResourceKind::kConnectivity:
          denom += static_cast<double>(l.weight_count());
          break;
        case ResourceKind::kParameters:
          denom += static_cast<double>(l.weight_count()) +
                   (l.has_bias ? static_cast<double>(l.b.numel()) : 0.0);
          break;
        case ResourceKind::kFlops:
          denom += static_cast<double>(l.weight_count()) * l.flops_per_weight();
          break;
      }
    }
    if (denom <= 0.0)
      throw std::invalid_argument("ResourceModel: empty network");
    m.denom_ = denom;

    if (m.structured_) {
      m.elem_cost_.resize(m.n_);
      for (std::size_t i = 0; i < m.n_; ++i) {
        const Layer& l = net.layers[view.owner_layer(i)];
        const double members = static_cast<double>(view.member_count(i));
        m.elem_cost_[i] = kind == ResourceKind::kFlops
                              ? members * l.flops_per_weight()
                              : members;
      }
    }
    return m;
  }

  ResourceKind kind() const { return kind_; }
  std::size_t dim() const { return n_; }
  bool needs_assignment() const { return structured_; }

  // Cumulative removal cost when elements leave in ascending-magnitude
  // order; prefix[k] is the cost of removing the k smallest.
  std::vector<double> prefix_cost(const SortedSquares& order) const {
    std::vector<double> prefix(n_ + 1, 0.0);
    for (std::size_t k = 0; k < n_; ++k)
      prefix[k + 1] = prefix[k] + elem_cost_[order.idx[k]];
    return prefix;
  }

  double value(double s, const std::vector<double>* prefix = nullptr) const {
    check_range(s);
    return (denom_ - removed_cost(s, prefix)) / denom_;
  }

  // Forward difference over one element, clamped at the top. Always <= 0.
  double ste_grad(double s, const std::vector<double>* prefix = nullptr) const {
    check_range(s);
    const double delta = std::min(1.0, static_cast<double>(n_) - s);
    if (delta <= 0.0) return 0.0;
    // Unit cost per element makes the difference quotient -1/denom exactly;
    // computing it in closed form avoids the rounding of the ratio.
    if (!structured_) return -1.0 / denom_;
    return (value(s + delta, prefix) - value(s, prefix)) / delta;
  }

  // Smallest s with R(s) <= budget, clamped to [0, Dim]. The budget is
  // unattainable when even full removal leaves R above it; the clamp then
  // returns Dim and the caller decides how to proceed.
  double target_s(double budget,
                  const std::vector<double>* prefix = nullptr) const {
    if (!structured_) {
      const double s = (1.0 - budget) * denom_;
      return std::clamp(s, 0.0, static_cast<double>(n_));
    }
    const std::vector<double>& p = *prefix;
    const double need = (1.0 - budget) * denom_;
    const auto it = std::lower_bound(p.begin(), p.end(), need);
    return static_cast<double>(
        std::min<std::size_t>(n_, static_cast<std::size_t>(it - p.begin())));
  }

 private:
  void check_range(double s) const {
    if (!(s >= 0.0) || s > static_cast<double>(n_))
      throw std::domain_error("ResourceModel: s out of [0, Dim]");
  }

  double removed_cost(double s, const std::vector<double>* prefix) const {
    if (!structured_) return s;  // unit cost per element
    if (prefix == nullptr)
      throw std::invalid_argument(
          "ResourceModel: structured kind needs a magnitude assignment");
    const auto k = static_cast<std::size_t>(std::floor(s));
    const double frac = s - static_cast<double>(k);
    double cost = (*prefix)[k];
    if (frac > 0.0 && k < n_) cost += frac * ((*prefix)[k + 1] - (*prefix)[k]);
    return cost;
  }

  ResourceKind kind_ = ResourceKind::kConnectivity;
  bool structured_ = false;
  std::size_t n_ = 0;
  double denom_ = 1.0;
  std::vector<double> elem_cost_;  // structured only
};

}  // namespace snnprune

#endif  // SNNPRUNE_RESOURCE_HPP_
