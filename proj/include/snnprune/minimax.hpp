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

#ifndef SNNPRUNE_MINIMAX_HPP_
#define SNNPRUNE_MINIMAX_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "snnprune/config.hpp"
#include "snnprune/data_io.hpp"
#include "snnprune/network.hpp"
#include "snnprune/optimizer.hpp"
#include "snnprune/resource.hpp"
#include "snnprune/sparsity.hpp"

namespace snnprune {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Phase : std::uint8_t { kTrain = 0, kPruning, kFinetune, kDone };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kTrain: return "train";
    case Phase::kPruning: return "prune";
    case Phase::kFinetune: return "finetune";
    case Phase::kDone: return "done";
  }
  return "?";
}

// Primal sparsity variable(s) and the two dual multipliers. Global mode
// keeps one (s, y) pair; per-layer mode one pair per prunable layer. z is
// always shared.
struct PruningState {
  std::vector<double> s{0.0};
  std::vector<double> y{0.0};
  double z = 0.0;
  std::uint64_t iterations = 0;
  std::int64_t first_iter_at_target = -1;

  double s_total() const { return std::accumulate(s.begin(), s.end(), 0.0); }
  double y_mean() const {
    return y.empty() ? 0.0
                     : std::accumulate(y.begin(), y.end(), 0.0) /
                           static_cast<double>(y.size());
  }
};

// Fine-tune epochs for the budget at index i of `budgets`, weighted so that
// tighter ratios get more epochs:
//   round( (1/S_i) * (T_epoch - C_epoch) / sum_{j>=i} 1/S_j )
// A single remaining budget absorbs all remaining epochs.
inline std::size_t finetune_epochs(std::size_t i,
                                   const std::vector<double>& budgets,
                                   std::size_t total_epochs,
                                   std::size_t used_epochs) {
  if (i >= budgets.size())
    throw std::domain_error("finetune_epochs: no remaining budgets");
  const std::size_t left =
      total_epochs > used_epochs ? total_epochs - used_epochs : 0;
  if (i + 1 == budgets.size()) return left;
  double inv_sum = 0.0;
  for (std::size_t j = i; j < budgets.size(); ++j) inv_sum += 1.0 / budgets[j];
  const double val =
      (1.0 / budgets[i]) * static_cast<double>(left) / inv_sum;
  return static_cast<std::size_t>(std::floor(val + 0.5));
}

inline std::string budget_tag(double budget) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", budget);
  return buf;
}

// ---------------------------------------------------------------------------

// Copies only the layer parameters out of a checkpoint, for warm-starting
// compression from a trained baseline. The architectures must match.
inline void load_checkpoint_weights(const std::string& path,
                                    SpikingNetwork& net) {
  BinReader r(path);
  if (r.u32() != 0x53504e43u)
    throw FormatError("checkpoint: bad magic in " + path);
  if (r.u32() != 1)
    throw FormatError("checkpoint: unsupported version in " + path);
  r.str();   // config blob
  r.u64();   // epoch
  r.u8();    // phase
  r.u64();   // ft_remaining
  r.u64();   // ft_total
  r.f64();   // current budget
  r.str();   // budget tag
  r.vec_f64();  // budgets remaining
  const std::uint64_t nl = r.u64();
  if (nl != net.layers.size())
    throw FormatError("checkpoint: layer count does not match model");
  for (auto& l : net.layers) {
    auto wv = r.vec_f64();
    if (wv.size() != l.w.numel())
      throw FormatError("checkpoint: weight payload length mismatch");
    l.w.vec() = std::move(wv);
    auto bv = r.vec_f64();
    if (bv.size() != l.b.numel())
      throw FormatError("checkpoint: bias payload length mismatch");
    l.b.vec() = std::move(bv);
    r.u8();  // prunable flag; the model string already determines it
  }
}

// Joint compression trainer: runs the gradient-descent-ascent loop over
// (W, s, y, z) and the budget-list schedule that alternates pruning with
// fine-tuning. With an empty budget list it degenerates to plain training.
class Trainer {
 public:
  Trainer(RunConfig cfg, SpikingNetwork net, Dataset train, Dataset test)
      : cfg_(std::move(cfg)),
        net_(std::move(net)),
        train_(std::move(train)),
        test_(std::move(test)),
        rng_(cfg_.seed) {
    cfg_.validate();
    net_.validate();
    if (cfg_.scope_kind() == SparsityScope::kPerLayer &&
        cfg_.structure_kind() == PruneStructure::kStructured)
      throw ConfigError("per_layer scope is unstructured-only");

    opt_.kind = cfg_.optimizer_kind();
    opt_.lr = cfg_.lr;
    opt_.momentum = cfg_.momentum;
    opt_.weight_decay = cfg_.weight_decay;
    opt_.init(net_);

    build_views();
    if (!cfg_.budgets.empty() && view_.size() == 0)
      throw ConfigError(
          "no prunable layers: every layer is at or below prunable_min, so "
          "the requested budgets are unreachable");
    budgets_remaining_ = cfg_.budgets;
    phase_ = budgets_remaining_.empty() ? Phase::kTrain : Phase::kPruning;
  }

  // Hooks for metrics capture; both optional.
  std::function<void(const MetricsRow&)> row_hook;
  std::function<void(double s, double y, double z, double r)> iteration_hook;
  // Invoked when a budget's fine-tune completes; the argument is the tag.
  std::function<void(const std::string&)> budget_hook;

  const SpikingNetwork& net() const { return net_; }
  SpikingNetwork& mutable_net() { return net_; }
  const PruningState& pruning_state() const { return ps_; }
  const RunConfig& config() const { return cfg_; }
  Phase phase() const { return phase_; }
  std::size_t epoch() const { return epoch_; }
  double last_test_acc() const { return last_test_acc_; }
  const std::vector<double>& budgets_remaining() const {
    return budgets_remaining_;
  }

  // Counted sparsity over every weight in the network (biases excluded).
  double counted_sparsity(double eps) const {
    std::size_t zeros = 0, total = 0;
    for (const auto& l : net_.layers) {
      total += l.weight_count();
      for (std::size_t i = 0; i < l.w.numel(); ++i)
        if (std::fabs(l.w[i]) <= eps) ++zeros;
    }
    return static_cast<double>(zeros) / static_cast<double>(total);
  }

  double counted_connectivity(double eps) const {
    return 1.0 - counted_sparsity(eps);
  }

  double evaluate_test() { return evaluate(test_); }

  double evaluate(const Dataset& ds, std::size_t batch_size = 256) {
    std::size_t correct = 0;
    for (std::size_t start = 0; start < ds.size(); start += batch_size) {
      const std::size_t n = std::min(batch_size, ds.size() - start);
      auto [bx, by] = slice(ds, start, n);
      const Tensor rates = forward_unroll(net_, bx).rates;
      correct += count_correct(rates, by);
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
  }

  // One full pass over the training set, then the phase-schedule check.
  MetricsRow run_epoch() {
    set_epoch_lr();
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_.size();
         start += cfg_.batch_size) {
      const std::size_t n = std::min(cfg_.batch_size, train_.size() - start);
      auto [bx, by] = gather(order, start, n);
      loss_sum += train_minibatch(bx, by);
      ++batches;
    }
    ++epoch_;
    last_test_acc_ = evaluate(test_);

    MetricsRow row;
    row.epoch = epoch_;
    row.phase = phase_name(phase_);
    row.loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    row.acc = last_test_acc_;
    row.s = ps_.s_total();
    row.y = ps_.y_mean();
    row.z = ps_.z;
    row.resource = current_resource();
    row.counted_sparsity = counted_sparsity(cfg_.snap_eps);
    if (row_hook) row_hook(row);

    advance_phase();
    return row;
  }

  // Drives epochs until the schedule completes or the epoch budget runs out.
  void run() {
    while (phase_ != Phase::kDone && epoch_ < cfg_.epochs) run_epoch();
  }

  std::int64_t first_iter_at_target() const {
    return ps_.first_iter_at_target;
  }

  // -- persistence ----------------------------------------------------------

  static constexpr std::uint32_t kCkptMagic = 0x53504e43u;  // "CNPS" le
  static constexpr std::uint32_t kCkptVersion = 1;

  void save_checkpoint(const std::string& path) const {
    BinWriter w(path);
    w.u32(kCkptMagic);
    w.u32(kCkptVersion);
    w.str(config_to_string(cfg_));
    w.u64(epoch_);
    w.u8(static_cast<std::uint8_t>(phase_));
    w.u64(ft_remaining_);
    w.u64(ft_total_);
    w.f64(current_budget_);
    w.str(achieved_tag_);
    w.vec_f64(budgets_remaining_);
    w.u64(net_.layers.size());
    for (const auto& l : net_.layers) {
      w.vec_f64(l.w.vec());
      w.vec_f64(l.b.vec());
      w.u8(l.prunable ? 1 : 0);
    }
    w.vec_f64(ps_.s);
    w.vec_f64(ps_.y);
    w.f64(ps_.z);
    w.u64(ps_.iterations);
    w.i64(ps_.first_iter_at_target);
    w.u64(opt_.step_count());
    w.f64(opt_.lr);
    auto& self = const_cast<Trainer&>(*this);
    for (std::size_t n = 0; n < net_.layers.size(); ++n) {
      w.vec_f64(self.opt_.moments_m_w()[n].vec());
      w.vec_f64(self.opt_.moments_v_w()[n].vec());
      w.vec_f64(self.opt_.moments_m_b()[n].vec());
      w.vec_f64(self.opt_.moments_v_b()[n].vec());
    }
    w.u8(mask_.empty() ? 0 : 1);
    if (!mask_.empty())
      for (const auto& m : mask_.w) w.vec_u8(m);
    std::ostringstream rs;
    rs << rng_;
    w.str(rs.str());
    w.f64(last_test_acc_);
    w.close();
  }

  // Reads only the embedded run configuration, so callers can rebuild the
  // matching datasets before a full load.
  static RunConfig peek_config(const std::string& path) {
    BinReader r(path);
    if (r.u32() != kCkptMagic)
      throw FormatError("checkpoint: bad magic in " + path);
    const std::uint32_t version = r.u32();
    if (version != kCkptVersion)
      throw FormatError("checkpoint: unsupported version " +
                        std::to_string(version));
    return parse_config_text(r.str());
  }

  static Trainer load_checkpoint(const std::string& path, Dataset train,
                                 Dataset test) {
    BinReader r(path);
    if (r.u32() != kCkptMagic)
      throw FormatError("checkpoint: bad magic in " + path);
    const std::uint32_t version = r.u32();
    if (version != kCkptVersion)
      throw FormatError("checkpoint: unsupported version " +
                        std::to_string(version));
    RunConfig cfg = parse_config_text(r.str());
    SpikingNetwork net = build_network(cfg);

    Trainer t(cfg, std::move(net), std::move(train), std::move(test));
    t.epoch_ = r.u64();
    t.phase_ = static_cast<Phase>(r.u8());
    t.ft_remaining_ = r.u64();
    t.ft_total_ = r.u64();
    t.current_budget_ = r.f64();
    t.achieved_tag_ = r.str();
    t.budgets_remaining_ = r.vec_f64();
    const std::uint64_t nl = r.u64();
    if (nl != t.net_.layers.size())
      throw FormatError("checkpoint: layer count does not match model");
    for (auto& l : t.net_.layers) {
      auto wv = r.vec_f64();
      if (wv.size() != l.w.numel())
        throw FormatError("checkpoint: weight payload length mismatch");
      l.w.vec() = std::move(wv);
      auto bv = r.vec_f64();
      if (bv.size() != l.b.numel())
        throw FormatError("checkpoint: bias payload length mismatch");
      l.b.vec() = std::move(bv);
      l.prunable = r.u8() != 0;
    }
    t.ps_.s = r.vec_f64();
    t.ps_.y = r.vec_f64();
    t.ps_.z = r.f64();
    t.ps_.iterations = r.u64();
    t.ps_.first_iter_at_target = r.i64();
    t.opt_.set_step_count(r.u64());
    t.opt_.lr = r.f64();
    for (std::size_t n = 0; n < t.net_.layers.size(); ++n) {
      t.opt_.moments_m_w()[n].vec() = r.vec_f64();
      t.opt_.moments_v_w()[n].vec() = r.vec_f64();
      t.opt_.moments_m_b()[n].vec() = r.vec_f64();
      t.opt_.moments_v_b()[n].vec() = r.vec_f64();
    }
    if (r.u8()) {
      t.mask_ = GradMask::ones_like(t.net_);
      for (auto& m : t.mask_.w) m = r.vec_u8();
    } else {
      t.mask_ = GradMask{};
    }
    std::istringstream rs(r.str());
    rs >> t.rng_;
    t.last_test_acc_ = r.f64();
    t.build_views();
    return t;
  }

 private:
  void build_views() {
    const bool structured =
        cfg_.structure_kind() == PruneStructure::kStructured;
    view_ = structured ? FlatView::structured(net_)
                       : FlatView::unstructured(net_);
    rm_ = ResourceModel::build(net_, cfg_.resource_kind(), view_);
    if (cfg_.scope_kind() == SparsityScope::kPerLayer) {
      layer_views_.clear();
      layer_sizes_.clear();
      for (std::uint32_t n = 0; n < net_.layers.size(); ++n) {
        if (!net_.layers[n].prunable) continue;
        // Per-layer views are built by toggling prunability one layer at
        // a time; flags are restored afterwards.
        SpikingNetwork& nn = net_;
        std::vector<bool> saved;
        for (auto& l : nn.layers) saved.push_back(l.prunable);
        for (std::uint32_t m = 0; m < nn.layers.size(); ++m)
          nn.layers[m].prunable = (m == n);
        layer_views_.push_back(FlatView::unstructured(nn));
        for (std::uint32_t m = 0; m < nn.layers.size(); ++m)
          nn.layers[m].prunable = saved[m];
        layer_sizes_.push_back(layer_views_.back().size());
      }
      if (ps_.s.size() != layer_views_.size()) {
        ps_.s.assign(layer_views_.size(), 0.0);
        ps_.y.assign(layer_views_.size(), 0.0);
      }
    }
  }

  std::pair<Tensor, std::vector<int>> slice(const Dataset& ds,
                                            std::size_t start,
                                            std::size_t n) const {
    const std::size_t f = ds.inputs.dim(1);
    Tensor bx({n, f});
    std::copy(ds.inputs.data() + start * f, ds.inputs.data() + (start + n) * f,
              bx.data());
    std::vector<int> by(ds.labels.begin() + static_cast<std::ptrdiff_t>(start),
                        ds.labels.begin() +
                            static_cast<std::ptrdiff_t>(start + n));
    return {std::move(bx), std::move(by)};
  }

  std::pair<Tensor, std::vector<int>> gather(
      const std::vector<std::size_t>& order, std::size_t start,
      std::size_t n) const {
    const std::size_t f = train_.inputs.dim(1);
    Tensor bx({n, f});
    std::vector<int> by(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = order[start + i];
      std::copy(train_.inputs.data() + src * f,
                train_.inputs.data() + (src + 1) * f, bx.data() + i * f);
      by[i] = train_.labels[src];
    }
    return {std::move(bx), std::move(by)};
  }

  double train_minibatch(const Tensor& bx, const std::vector<int>& by) {
    ForwardResult fwd = forward_unroll(net_, bx);
    LossGrad lg;
    if (cfg_.loss_kind() == LossKind::kMse)
      lg = loss_mse(fwd.rates, one_hot(by, net_.num_classes()));
    else
      lg = loss_cross_entropy(fwd.rates, by);
    if (!std::isfinite(lg.loss))
      throw NumericError("non-finite training loss at iteration " +
                         std::to_string(ps_.iterations));
    Gradients grads = stbp_backward(net_, fwd.caches, lg.d_rates);

    const bool frozen =
        phase_ == Phase::kFinetune && !cfg_.regrow && !mask_.empty();
    opt_.step(net_, grads, frozen ? &mask_ : nullptr);

    if (phase_ == Phase::kPruning) prune_update();
    return lg.loss;
  }

  // One (W, s, y, z) update after the base optimizer step, following the
  // Prox-SGD / STE-descent / dual-ascent ordering.
  void prune_update() {
    const double head = budgets_remaining_.front();
    const double eta1 = cfg_.effective_eta1();
    const double n_scale = static_cast<double>(rm_.dim());

    if (cfg_.scope_kind() == SparsityScope::kGlobal) {
      view_.refresh(net_);
      double& s = ps_.s[0];
      double& y = ps_.y[0];

      // Proximal decay of the bottom-ceil(s) elements.
      const auto k = static_cast<std::size_t>(std::ceil(s));
      if (k > 0 && y > 0.0) {
        view_.apply_values(net_,
                           prox_sparsity(view_.values(), s, y, eta1));
        view_.refresh(net_);
      }

      std::vector<double> sq(view_.size());
      for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = view_.values()[i] * view_.values()[i];

      std::vector<double> prefix;
      const std::vector<double>* prefix_ptr = nullptr;
      if (rm_.needs_assignment()) {
        SortedSquares order(view_.values());
        prefix = rm_.prefix_cost(order);
        prefix_ptr = &prefix;
      }
      const double s_star = rm_.target_s(head, prefix_ptr);

      // STE descent on s, clamped to [0, s*]; pushing s past the point
      // where R(s) meets the budget only inflates the sparsity loss.
      const std::size_t j =
          std::min(sq.size(), static_cast<std::size_t>(std::floor(s)) + 1);
      const double s_grad = kth_smallest_square(sq, j) +
                            ps_.z * rm_.ste_grad(s, prefix_ptr);
      s = std::clamp(s - cfg_.eta2 * n_scale * s_grad, 0.0, s_star);

      // Dual ascent.
      y += cfg_.eta3 *
           sum_bottom_squares(sq, static_cast<std::size_t>(std::ceil(s)));
      const double r = rm_.value(s, prefix_ptr);
      ps_.z = std::max(0.0, ps_.z + cfg_.eta4 * (r - head));

      finish_iteration(r, head);
    } else {
      per_layer_update(head, eta1, n_scale);
    }
  }

  void per_layer_update(double head, double eta1, double n_scale) {
    const double s_star_total = rm_.target_s(head, nullptr);
    const double q =
        rm_.dim() > 0 ? s_star_total / static_cast<double>(rm_.dim()) : 0.0;
    for (std::size_t li = 0; li < layer_views_.size(); ++li) {
      FlatView& lv = layer_views_[li];
      lv.refresh(net_);
      double& s = ps_.s[li];
      double& y = ps_.y[li];
      const auto k = static_cast<std::size_t>(std::ceil(s));
      if (k > 0 && y > 0.0) {
        lv.apply_values(net_, prox_sparsity(lv.values(), s, y, eta1));
        lv.refresh(net_);
      }
      std::vector<double> sq(lv.size());
      for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = lv.values()[i] * lv.values()[i];
      const double cap =
          std::min(static_cast<double>(lv.size()),
                   std::ceil(q * static_cast<double>(lv.size())));
      const std::size_t j =
          std::min(sq.size(), static_cast<std::size_t>(std::floor(s)) + 1);
      // dR/ds_l is the same -1/denom for every layer in unstructured mode.
      const double s_grad =
          kth_smallest_square(sq, j) + ps_.z * rm_.ste_grad(ps_.s_total());
      s = std::clamp(s - cfg_.eta2 * n_scale * s_grad, 0.0, cap);
      y += cfg_.eta3 *
           sum_bottom_squares(sq, static_cast<std::size_t>(std::ceil(s)));
    }
    const double r = rm_.value(std::min(ps_.s_total(),
                                        static_cast<double>(rm_.dim())));
    ps_.z = std::max(0.0, ps_.z + cfg_.eta4 * (r - head));
    finish_iteration(r, head);
  }

  void finish_iteration(double r, double head) {
    if (!std::isfinite(ps_.z) || !std::isfinite(ps_.s_total()) ||
        !std::isfinite(ps_.y_mean()))
      throw NumericError("non-finite pruning state at iteration " +
                         std::to_string(ps_.iterations));
    ++ps_.iterations;
    if (ps_.first_iter_at_target < 0 && r <= head)
      ps_.first_iter_at_target = static_cast<std::int64_t>(ps_.iterations);
    if (iteration_hook) iteration_hook(ps_.s_total(), ps_.y_mean(), ps_.z, r);
  }

  double current_resource() {
    if (phase_ == Phase::kTrain) return 1.0;
    const std::vector<double>* prefix_ptr = nullptr;
    std::vector<double> prefix;
    if (rm_.needs_assignment()) {
      view_.refresh(net_);
      SortedSquares order(view_.values());
      prefix = rm_.prefix_cost(order);
      prefix_ptr = &prefix;
    }
    const double s = std::min(ps_.s_total(), static_cast<double>(rm_.dim()));
    return rm_.value(s, prefix_ptr);
  }

  void set_epoch_lr() {
    if (phase_ == Phase::kFinetune &&
        cfg_.ft_lr_policy_kind() == FtLrPolicy::kCosineRestart &&
        ft_total_ > 0) {
      const double progress =
          static_cast<double>(ft_total_ - ft_remaining_) /
          static_cast<double>(ft_total_);
      opt_.lr = cfg_.ft_lr * 0.5 *
                (1.0 + std::cos(std::numbers::pi * progress));
    }
  }

  void advance_phase() {
    if (phase_ == Phase::kPruning) {
      const double head = budgets_remaining_.front();
      // Slack of a few ulps: the clamped s makes R equal the budget only up
      // to rounding in the ratio.
      if (current_resource() <= head + 1e-9) {
        snap_to_budget();
        // The snap just changed the weights; re-measure so saved accuracy
        // always describes the saved parameters.
        last_test_acc_ = evaluate(test_);
        current_budget_ = head;
        phase_ = Phase::kFinetune;
        ft_total_ = ft_remaining_ = compute_ft_epochs();
        opt_.reset_moments();
        if (ft_remaining_ == 0) finish_finetune();
      }
    } else if (phase_ == Phase::kFinetune) {
      if (ft_remaining_ > 0) --ft_remaining_;
      if (ft_remaining_ == 0) finish_finetune();
    } else if (phase_ == Phase::kTrain && epoch_ >= cfg_.epochs) {
      phase_ = Phase::kDone;
    }
  }

  std::size_t compute_ft_epochs() const {
    std::size_t ft =
        cfg_.ft_policy_kind() == FtPolicy::kFixed
            ? cfg_.ft_fixed_epochs
            : finetune_epochs(0, budgets_remaining_, cfg_.epochs, epoch_);
    const std::size_t left = cfg_.epochs > epoch_ ? cfg_.epochs - epoch_ : 0;
    return std::min(ft, left);
  }

  // Hard-zeros the bottom-ceil(s) elements so counted sparsity matches s,
  // then freezes the zeroed slots for the fine-tune phase.
  void snap_to_budget() {
    if (cfg_.scope_kind() == SparsityScope::kGlobal) {
      view_.refresh(net_);
      view_.zero_bottom(net_, static_cast<std::size_t>(std::ceil(ps_.s[0])));
    } else {
      for (std::size_t li = 0; li < layer_views_.size(); ++li) {
        layer_views_[li].refresh(net_);
        layer_views_[li].zero_bottom(
            net_, static_cast<std::size_t>(std::ceil(ps_.s[li])));
      }
    }
    if (!cfg_.regrow) {
      mask_ = GradMask::ones_like(net_);
      for (std::size_t n = 0; n < net_.layers.size(); ++n) {
        if (!net_.layers[n].prunable) continue;
        for (std::size_t i = 0; i < net_.layers[n].w.numel(); ++i)
          if (net_.layers[n].w[i] == 0.0) mask_.w[n][i] = 0;
      }
    }
  }

  void finish_finetune() {
    achieved_tag_ = budget_tag(current_budget_);
    if (budget_hook) budget_hook(achieved_tag_);
    budgets_remaining_.erase(budgets_remaining_.begin());
    if (budgets_remaining_.empty()) {
      phase_ = Phase::kDone;
    } else {
      phase_ = Phase::kPruning;
      mask_ = GradMask{};
      opt_.lr = cfg_.lr;
      opt_.reset_moments();
    }
  }

  RunConfig cfg_;
  SpikingNetwork net_;
  Dataset train_, test_;
  Optimizer opt_;
  PruningState ps_;
  std::vector<double> budgets_remaining_;
  Phase phase_ = Phase::kTrain;
  std::size_t epoch_ = 0;
  std::size_t ft_remaining_ = 0, ft_total_ = 0;
  double current_budget_ = 1.0;
  std::string achieved_tag_;
  GradMask mask_;
  std::mt19937_64 rng_;
  FlatView view_;
  std::vector<FlatView> layer_views_;
  std::vector<std::size_t> layer_sizes_;
  ResourceModel rm_;
  double last_test_acc_ = 0.0;
};

}  // namespace snnprune

#endif  // SNNPRUNE_MINIMAX_HPP_
