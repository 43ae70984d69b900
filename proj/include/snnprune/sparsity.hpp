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

#ifndef SNNPRUNE_SPARSITY_HPP_
#define SNNPRUNE_SPARSITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "snnprune/network.hpp"

namespace snnprune {

inline void check_s_range(double s, std::size_t dim) {
  if (!(s >= 0.0) || s > static_cast<double>(dim))
    throw std::domain_error("sparsity: s must lie in [0, Dim(v)]");
}

// Element squares sorted ascending with (square, flat index) tie-breaking,
// plus a sequential prefix-sum chain. The chain makes the STE derivative an
// exact forward difference of the bottom-norm values.
struct SortedSquares {
  std::vector<double> sq;      // ascending
  std::vector<std::uint32_t> idx;  // original positions, same order
  std::vector<double> prefix;  // prefix[k] = fl(prefix[k-1] + sq[k-1])

  explicit SortedSquares(const std::vector<double>& v) {
    const std::size_t n = v.size();
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<double> squares(n);
    for (std::size_t i = 0; i < n; ++i) squares[i] = v[i] * v[i];
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return squares[a] != squares[b] ? squares[a] < squares[b] : a < b;
    });
    sq.resize(n);
    prefix.resize(n + 1);
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sq[i] = squares[idx[i]];
      prefix[i + 1] = prefix[i] + sq[i];
    }
  }
};

// Squared bottom-(ceil(s), 2) norm: sum of squares of the ceil(s)
// smallest-magnitude elements. Zero iff at least ceil(s) elements are zero.
inline double bottom_s2_sq(const SortedSquares& ss, double s) {
  check_s_range(s, ss.sq.size());
  const auto k = static_cast<std::size_t>(std::ceil(s));
  return ss.prefix[k];
}

inline double bottom_s2_sq(const std::vector<double>& v, double s) {
  return bottom_s2_sq(SortedSquares(v), s);
}

// Straight-through derivative of the squared bottom norm with respect to s:
// the min(Dim, floor(s)+1)-th smallest square. Equals the forward difference
// bottom_s2_sq(v, floor(s)+1) - bottom_s2_sq(v, floor(s)) by construction of
// the prefix chain.
inline double ste_sparsity_grad(const SortedSquares& ss, double s) {
  const std::size_t n = ss.sq.size();
  check_s_range(s, n);
  if (n == 0) return 0.0;
  const auto j =
      std::min(n, static_cast<std::size_t>(std::floor(s)) + 1);
  // Evaluated through the prefix chain rather than sq[j-1] directly so the
  // result is bit-identical to the forward difference of bottom_s2_sq.
  return ss.prefix[j] - ss.prefix[j - 1];
}

inline double ste_sparsity_grad(const std::vector<double>& v, double s) {
  return ste_sparsity_grad(SortedSquares(v), s);
}

// Closed-form proximal operator of eta1 * y * ||W||^2_{ceil(s),2} at w_bar:
// elements strictly above the ceil(s)-th smallest square are kept verbatim,
// the rest decay by 1/(1 + 2*eta1*y). Threshold-equal elements decay.
inline std::vector<double> prox_sparsity(const std::vector<double>& w_bar,
                                         double s, double y, double eta1,
                                         const SortedSquares* pre = nullptr) {
  check_s_range(s, w_bar.size());
  if (y < 0.0) throw std::domain_error("prox_sparsity: y must be >= 0");
  if (eta1 <= 0.0) throw std::domain_error("prox_sparsity: eta1 must be > 0");
  const auto k = static_cast<std::size_t>(std::ceil(s));
  std::vector<double> out = w_bar;
  if (k == 0) return out;
  double thresh;
  if (pre) {
    thresh = pre->sq[k - 1];
  } else {
    std::vector<double> squares(w_bar.size());
    for (std::size_t i = 0; i < w_bar.size(); ++i)
      squares[i] = w_bar[i] * w_bar[i];
    std::nth_element(squares.begin(), squares.begin() + (k - 1), squares.end());
    thresh = squares[k - 1];
  }
  const double factor = 1.0 / (1.0 + 2.0 * eta1 * y);
  for (double& w : out)
    if (!(w * w > thresh)) w *= factor;
  return out;
}

inline std::size_t count_zeros(const std::vector<double>& v, double snap_eps) {
  if (snap_eps < 0.0) throw std::domain_error("count_zeros: snap_eps < 0");
  std::size_t n = 0;
  for (double x : v)
    if (std::fabs(x) <= snap_eps) ++n;
  return n;
}

// nth_element-based helpers for the inner training loop, where full sorts
// per iteration would dominate runtime.

inline double kth_smallest_square(std::vector<double> squares, std::size_t k) {
  std::nth_element(squares.begin(), squares.begin() + (k - 1), squares.end());
  return squares[k - 1];
}

// Sum of the k smallest squares. Partition, then sum the left side.
inline double sum_bottom_squares(std::vector<double> squares, std::size_t k) {
  if (k == 0) return 0.0;
  if (k < squares.size())
    std::nth_element(squares.begin(), squares.begin() + k, squares.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += squares[i];
  return sum;
}

// Flattened view over the prunable weights of a network. Unstructured mode
// has one element per weight; structured mode has one element per column
// (linear layers) or per output filter (conv layers), valued by group norm.
class FlatView {
 public:
  struct Slot {
    std::uint32_t layer;
    std::uint32_t offset;
  };

  static FlatView unstructured(const SpikingNetwork& net) {
    FlatView fv;
    fv.structured_ = false;
    for (std::uint32_t n = 0; n < net.layers.size(); ++n) {
      if (!net.layers[n].prunable) continue;
      const std::size_t count = net.layers[n].weight_count();
      for (std::uint32_t i = 0; i < count; ++i)
        fv.slots_.push_back({n, i});
    }
    fv.values_.resize(fv.slots_.size());
    return fv;
  }

  static FlatView structured(const SpikingNetwork& net) {
    FlatView fv;
    fv.structured_ = true;
    for (std::uint32_t n = 0; n < net.layers.size(); ++n) {
      const Layer& l = net.layers[n];
      if (!l.prunable) continue;
      if (l.kind == Layer::Kind::kLinear) {
        const auto out = static_cast<std::uint32_t>(l.w.dim(0));
        const auto in = static_cast<std::uint32_t>(l.w.dim(1));
        for (std::uint32_t j = 0; j < in; ++j) {
          fv.groups_.emplace_back();
          auto& g = fv.groups_.back();
          g.layer = n;
          for (std::uint32_t i = 0; i < out; ++i)
            g.offsets.push_back(i * in + j);
        }
      } else {
        const auto cout = static_cast<std::uint32_t>(l.w.dim(0));
        const auto per = static_cast<std::uint32_t>(l.w.numel() / l.w.dim(0));
        for (std::uint32_t c = 0; c < cout; ++c) {
          fv.groups_.emplace_back();
          auto& g = fv.groups_.back();
          g.layer = n;
          for (std::uint32_t i = 0; i < per; ++i)
            g.offsets.push_back(c * per + i);
        }
      }
    }
    fv.values_.resize(fv.groups_.size());
    return fv;
  }

  bool is_structured() const { return structured_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  std::uint32_t owner_layer(std::size_t i) const {
    return structured_ ? groups_[i].layer : slots_[i].layer;
  }

  // Number of weights behind element i.
  std::size_t member_count(std::size_t i) const {
    return structured_ ? groups_[i].offsets.size() : 1;
  }

  // Re-reads element values from the network (weight for unstructured,
  // column/filter l2 norm for structured).
  void refresh(const SpikingNetwork& net) {
    if (!structured_) {
      for (std::size_t i = 0; i < slots_.size(); ++i)
        values_[i] = net.layers[slots_[i].layer].w[slots_[i].offset];
    } else {
      for (std::size_t i = 0; i < groups_.size(); ++i) {
        const Tensor& w = net.layers[groups_[i].layer].w;
        double sum = 0.0;
        for (std::uint32_t off : groups_[i].offsets) sum += w[off] * w[off];
        values_[i] = std::sqrt(sum);
      }
    }
  }

  // Writes new element values back. Unstructured assigns weights directly;
  // structured rescales every member of a group so its norm matches.
  void apply_values(SpikingNetwork& net,
                    const std::vector<double>& new_values) const {
    if (new_values.size() != values_.size())
      throw DimensionError("FlatView::apply_values: size mismatch");
    if (!structured_) {
      for (std::size_t i = 0; i < slots_.size(); ++i)
        net.layers[slots_[i].layer].w[slots_[i].offset] = new_values[i];
    } else {
      for (std::size_t i = 0; i < groups_.size(); ++i) {
        if (new_values[i] == values_[i]) continue;
        Tensor& w = net.layers[groups_[i].layer].w;
        const double factor =
            values_[i] != 0.0 ? new_values[i] / values_[i] : 0.0;
        for (std::uint32_t off : groups_[i].offsets) w[off] *= factor;
      }
    }
  }

  // Hard-zeros the k smallest-magnitude elements (whole groups when
  // structured). Kept elements are untouched.
  void zero_bottom(SpikingNetwork& net, std::size_t k) const {
    if (k == 0) return;
    k = std::min(k, size());
    SortedSquares ss(values_);
    for (std::size_t r = 0; r < k; ++r) {
      const std::uint32_t i = ss.idx[r];
      if (!structured_) {
        net.layers[slots_[i].layer].w[slots_[i].offset] = 0.0;
      } else {
        Tensor& w = net.layers[groups_[i].layer].w;
        for (std::uint32_t off : groups_[i].offsets) w[off] = 0.0;
      }
    }
  }

 private:
  struct Group {
    std::uint32_t layer;
    std::vector<std::uint32_t> offsets;
  };

  bool structured_ = false;
  std::vector<Slot> slots_;    // unstructured
  std::vector<Group> groups_;  // structured
  std::vector<double> values_;
};

// Layers with more connections than the threshold participate in pruning.
inline void mark_prunable(SpikingNetwork& net, std::size_t min_connections) {
  for (auto& l : net.layers) l.prunable = l.weight_count() > min_connections;
}

}  // namespace snnprune

#endif  // SNNPRUNE_SPARSITY_HPP_
