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

#ifndef SNNPRUNE_CONFIG_HPP_
#define SNNPRUNE_CONFIG_HPP_

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snnprune/network.hpp"
#include "snnprune/optimizer.hpp"
#include "snnprune/resource.hpp"
#include "snnprune/sparsity.hpp"

namespace snnprune {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SparsityScope { kGlobal, kPerLayer };
enum class PruneStructure { kUnstructured, kStructured };
enum class LossKind { kMse, kCrossEntropy };
enum class FtPolicy { kFixed, kWeighted };
enum class FtLrPolicy { kConstant, kCosineRestart };

struct RunConfig {
  // model
  std::string model = "fc:784-400-10";
  std::size_t timesteps = 8;
  double tau_m = 2.0, v_rest = 0.0, v_th = 1.0;
  bool detached_reset = true;

  // dataset
  std::string dataset = "mnist";  // mnist | synthetic
  std::string data_dir;           // empty: $SNNPRUNE_DATA_DIR or data/mnist
  std::size_t synthetic_n = 2000, synthetic_classes = 4,
              synthetic_features = 32;
  double synthetic_spread = 0.25;

  // training
  std::string optimizer = "adam";  // adam | sgd
  double lr = 1e-4;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::string loss = "mse";  // mse | ce
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;

  // pruning
  std::vector<double> budgets;  // descending, each in (0,1); empty: no pruning
  double eta1 = 0.0;            // 0: use optimizer lr
  double eta2 = 1.0;
  double eta3 = 0.1;
  double eta4 = 1e5;
  std::string scope = "global";            // global | per_layer
  std::string structure = "unstructured";  // unstructured | structured
  std::string resource = "connectivity";   // connectivity | parameters | flops
  double snap_eps = 1e-8;
  std::size_t prunable_min = 10000;
  bool regrow = false;  // let pruned weights regrow during fine-tune
  std::string ft_policy = "weighted";  // weighted | fixed
  std::size_t ft_fixed_epochs = 5;
  std::string ft_lr_policy = "cosine";  // cosine | constant
  double ft_lr = 1e-3;

  // io
  std::string init = "scratch";  // scratch | pretrained:<path>
  std::string out_dir = "out";

  SparsityScope scope_kind() const {
    return scope == "per_layer" ? SparsityScope::kPerLayer
                                : SparsityScope::kGlobal;
  }
  PruneStructure structure_kind() const {
    return structure == "structured" ? PruneStructure::kStructured
                                     : PruneStructure::kUnstructured;
  }
  LossKind loss_kind() const {
    return loss == "ce" ? LossKind::kCrossEntropy : LossKind::kMse;
  }
  ResourceKind resource_kind() const {
    if (resource == "parameters") return ResourceKind::kParameters;
    if (resource == "flops") return ResourceKind::kFlops;
    return ResourceKind::kConnectivity;
  }
  OptimizerKind optimizer_kind() const {
    return optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
  }
  FtPolicy ft_policy_kind() const {
    return ft_policy == "fixed" ? FtPolicy::kFixed : FtPolicy::kWeighted;
  }
  FtLrPolicy ft_lr_policy_kind() const {
    return ft_lr_policy == "constant" ? FtLrPolicy::kConstant
                                      : FtLrPolicy::kCosineRestart;
  }
  double effective_eta1() const { return eta1 > 0.0 ? eta1 : lr; }

  std::string resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("SNNPRUNE_DATA_DIR")) return env;
    return "data/mnist";
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
      throw ConfigError("config field '" + field + "': " + msg);
    };
    if (timesteps < 1) fail("timesteps", "must be >= 1");
    if (tau_m <= 0) fail("tau_m", "must be > 0");
    if (v_th <= v_rest) fail("v_th", "must exceed v_rest");
    if (lr <= 0) fail("lr", "must be > 0");
    if (batch_size < 1) fail("batch_size", "must be >= 1");
    if (dataset != "mnist" && dataset != "synthetic")
      fail("dataset", "unknown value '" + dataset + "'");
    if (optimizer != "adam" && optimizer != "sgd")
      fail("optimizer", "unknown value '" + optimizer + "'");
    if (loss != "mse" && loss != "ce") fail("loss", "unknown value '" + loss + "'");
    if (scope != "global" && scope != "per_layer")
      fail("scope", "unknown value '" + scope + "'");
    if (structure != "unstructured" && structure != "structured")
      fail("structure", "unknown value '" + structure + "'");
    if (resource != "connectivity" && resource != "parameters" &&
        resource != "flops")
      fail("resource", "unknown value '" + resource + "'");
    if (ft_policy != "weighted" && ft_policy != "fixed")
      fail("ft_policy", "unknown value '" + ft_policy + "'");
    if (ft_lr_policy != "cosine" && ft_lr_policy != "constant")
      fail("ft_lr_policy", "unknown value '" + ft_lr_policy + "'");
    if (snap_eps < 0) fail("snap_eps", "must be >= 0");
    if (eta2 < 0 || eta3 < 0 || eta4 < 0)
      fail("eta2/eta3/eta4", "must be >= 0");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      if (!(budgets[i] > 0.0 && budgets[i] < 1.0))
        fail("budgets", "each ratio must lie in (0, 1)");
      if (i > 0 && budgets[i] >= budgets[i - 1])
        fail("budgets", "ratios must be strictly decreasing");
    }
    if (init != "scratch" && init.rfind("pretrained:", 0) != 0)
      fail("init", "expected 'scratch' or 'pretrained:<path>'");
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) { out.push_back(cur); cur.clear(); }
    else cur.push_back(c);
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline void apply_config_entry(RunConfig& c, const std::string& key,
                               const std::string& value) {
  auto as_u64 = [&](const std::string& v) -> std::uint64_t {
    try { return std::stoull(v); }
    catch (...) { throw ConfigError("config field '" + key + "': not an integer: " + v); }
  };
  auto as_f64 = [&](const std::string& v) -> double {
    try { return std::stod(v); }
    catch (...) { throw ConfigError("config field '" + key + "': not a number: " + v); }
  };
  auto as_bool = [&](const std::string& v) -> bool {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config field '" + key + "': not a boolean: " + v);
  };

  if (key == "model") c.model = value;
  else if (key == "timesteps") c.timesteps = as_u64(value);
  else if (key == "tau_m") c.tau_m = as_f64(value);
  else if (key == "v_rest") c.v_rest = as_f64(value);
  else if (key == "v_th") c.v_th = as_f64(value);
  else if (key == "detached_reset") c.detached_reset = as_bool(value);
  else if (key == "dataset") c.dataset = value;
  else if (key == "data_dir") c.data_dir = value;
  else if (key == "synthetic_n") c.synthetic_n = as_u64(value);
  else if (key == "synthetic_classes") c.synthetic_classes = as_u64(value);
  else if (key == "synthetic_features") c.synthetic_features = as_u64(value);
  else if (key == "synthetic_spread") c.synthetic_spread = as_f64(value);
  else if (key == "optimizer") c.optimizer = value;
  else if (key == "lr") c.lr = as_f64(value);
  else if (key == "momentum") c.momentum = as_f64(value);
  else if (key == "weight_decay") c.weight_decay = as_f64(value);
  else if (key == "loss") c.loss = value;
  else if (key == "epochs") c.epochs = as_u64(value);
  else if (key == "batch_size") c.batch_size = as_u64(value);
  else if (key == "seed") c.seed = as_u64(value);
  else if (key == "budgets") {
    c.budgets.clear();
    if (!detail::trim(value).empty())
      for (const auto& tok : detail::split(value, ','))
        c.budgets.push_back(as_f64(detail::trim(tok)));
  }
  else if (key == "eta1") c.eta1 = as_f64(value);
  else if (key == "eta2") c.eta2 = as_f64(value);
  else if (key == "eta3") c.eta3 = as_f64(value);
  else if (key == "eta4") c.eta4 = as_f64(value);
  else if (key == "scope") c.scope = value;
  else if (key == "structure") c.structure = value;
  else if (key == "resource") c.resource = value;
  else if (key == "snap_eps") c.snap_eps = as_f64(value);
  else if (key == "prunable_min") c.prunable_min = as_u64(value);
  else if (key == "regrow") c.regrow = as_bool(value);
  else if (key == "ft_policy") c.ft_policy = value;
  else if (key == "ft_fixed_epochs") c.ft_fixed_epochs = as_u64(value);
  else if (key == "ft_lr_policy") c.ft_lr_policy = value;
  else if (key == "ft_lr") c.ft_lr = as_f64(value);
  else if (key == "init") c.init = value;
  else if (key == "out_dir") c.out_dir = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

// Serializes a config as the same key=value text the file parser reads;
// checkpoints embed this so they are self-describing.
inline std::string config_to_string(const RunConfig& c) {
  std::ostringstream o;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  o << "model=" << c.model << "\n";
  o << "timesteps=" << c.timesteps << "\n";
  o << "tau_m=" << num(c.tau_m) << "\n";
  o << "v_rest=" << num(c.v_rest) << "\n";
  o << "v_th=" << num(c.v_th) << "\n";
  o << "detached_reset=" << (c.detached_reset ? "true" : "false") << "\n";
  o << "dataset=" << c.dataset << "\n";
  o << "data_dir=" << c.data_dir << "\n";
  o << "synthetic_n=" << c.synthetic_n << "\n";
  o << "synthetic_classes=" << c.synthetic_classes << "\n";
  o << "synthetic_features=" << c.synthetic_features << "\n";
  o << "synthetic_spread=" << num(c.synthetic_spread) << "\n";
  o << "optimizer=" << c.optimizer << "\n";
  o << "lr=" << num(c.lr) << "\n";
  o << "momentum=" << num(c.momentum) << "\n";
  o << "weight_decay=" << num(c.weight_decay) << "\n";
  o << "loss=" << c.loss << "\n";
  o << "epochs=" << c.epochs << "\n";
  o << "batch_size=" << c.batch_size << "\n";
  o << "seed=" << c.seed << "\n";
  o << "budgets=";
  for (std::size_t i = 0; i < c.budgets.size(); ++i)
    o << (i ? "," : "") << num(c.budgets[i]);
  o << "\n";
  o << "eta1=" << num(c.eta1) << "\n";
  o << "eta2=" << num(c.eta2) << "\n";
  o << "eta3=" << num(c.eta3) << "\n";
  o << "eta4=" << num(c.eta4) << "\n";
  o << "scope=" << c.scope << "\n";
  o << "structure=" << c.structure << "\n";
  o << "resource=" << c.resource << "\n";
  o << "snap_eps=" << num(c.snap_eps) << "\n";
  o << "prunable_min=" << c.prunable_min << "\n";
  o << "regrow=" << (c.regrow ? "true" : "false") << "\n";
  o << "ft_policy=" << c.ft_policy << "\n";
  o << "ft_fixed_epochs=" << c.ft_fixed_epochs << "\n";
  o << "ft_lr_policy=" << c.ft_lr_policy << "\n";
  o << "ft_lr=" << num(c.ft_lr) << "\n";
  o << "init=" << c.init << "\n";
  o << "out_dir=" << c.out_dir << "\n";
  return o.str();
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream f(text);
  std::string line;
  while (std::getline(f, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    apply_config_entry(c, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
  return c;
}

// Flat key=value file; '#' starts a comment.
inline RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    apply_config_entry(c, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
  return c;
}

// Architecture strings:
//   "fc:784-400-10"                          dense stack
//   "in:1x28x28;conv:8c3s1p1;fc:10"          conv grammar
//   "conv6fc2"                               named CIFAR-scale preset
inline SpikingNetwork build_network(const RunConfig& cfg) {
  std::string model = cfg.model;
  if (model == "conv6fc2")
    model =
        "in:3x32x32;conv:64c3s1p1;conv:64c3s2p1;conv:128c3s1p1;"
        "conv:128c3s2p1;conv:256c3s1p1;conv:256c3s2p1;fc:1024;fc:10";

  LifParams lif{cfg.tau_m, cfg.v_rest, cfg.v_th};
  SpikingNetwork net;
  net.timesteps = cfg.timesteps;
  net.detached_reset = cfg.detached_reset;

  std::size_t c = 0, h = 0, w = 0;  // running conv shape
  bool have_image = false;
  std::size_t features = 0;
  for (const auto& seg : detail::split(model, ';')) {
    if (seg.rfind("in:", 0) == 0) {
      const auto dims = detail::split(seg.substr(3), 'x');
      if (dims.size() != 3) throw ConfigError("model: want in:CxHxW");
      c = std::stoull(dims[0]); h = std::stoull(dims[1]); w = std::stoull(dims[2]);
      features = c * h * w;
      have_image = true;
    } else if (seg.rfind("conv:", 0) == 0) {
      if (!have_image) throw ConfigError("model: conv before in:CxHxW");
      std::size_t out = 0, k = 0, stride = 1, pad = 0;
      if (std::sscanf(seg.c_str(), "conv:%zuc%zus%zup%zu", &out, &k, &stride,
                      &pad) != 4)
        throw ConfigError("model: want conv:<out>c<k>s<stride>p<pad>");
      net.layers.push_back(Layer::conv(c, h, w, out, k, stride, pad, lif));
      const Layer& l = net.layers.back();
      c = out; h = l.out_h; w = l.out_w;
      features = c * h * w;
    } else if (seg.rfind("fc:", 0) == 0) {
      const auto sizes = detail::split(seg.substr(3), '-');
      std::size_t start = 0;
      if (features == 0) {
        if (sizes.size() < 2)
          throw ConfigError("model: fc stack needs at least in-out");
        features = std::stoull(sizes[0]);
        start = 1;
      }
      for (std::size_t i = start; i < sizes.size(); ++i) {
        const std::size_t out = std::stoull(sizes[i]);
        net.layers.push_back(Layer::linear(features, out, lif));
        features = out;
      }
      have_image = false;
    } else {
      throw ConfigError("model: unknown segment '" + seg + "'");
    }
  }
  if (net.layers.empty()) throw ConfigError("model: no layers");
  mark_prunable(net, cfg.prunable_min);
  return net;
}

// Kaiming-style uniform init, deterministic for a given generator state.
inline void init_weights(SpikingNetwork& net, std::mt19937_64& rng) {
  for (auto& l : net.layers) {
    const double fan_in =
        l.kind == Layer::Kind::kConv
            ? static_cast<double>(l.in_c * l.ksize * l.ksize)
            : static_cast<double>(l.in_features());
    const double bound = std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < l.w.numel(); ++i) l.w[i] = dist(rng);
    std::fill(l.b.vec().begin(), l.b.vec().end(), 0.0);
  }
}

}  // namespace snnprune

#endif  // SNNPRUNE_CONFIG_HPP_
