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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snnprune/config.hpp"
#include "snnprune/data_io.hpp"
#include "snnprune/minimax.hpp"

namespace {

using namespace snnprune;

// Exit codes: 0 success, 1 config error, 2 runtime/numeric error.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::string resume;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "key=value config file");
  cmd->add_option("--seed", args->seed, "RNG seed override");
  cmd->add_option("--out", args->out_dir, "output directory override");
  cmd->allow_extras();
}

// Leftover tokens of the form --key=value become config overrides; overrides
// win over the config file.
RunConfig resolve_config(const CLI::App* cmd, const CommonArgs& args,
                         RunConfig cfg = RunConfig{}) {
  if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
  for (const std::string& tok : cmd->remaining()) {
    if (tok.rfind("--", 0) != 0)
      throw ConfigError("unrecognized argument '" + tok + "'");
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + tok + "' must look like --key=value");
    apply_config_entry(cfg, tok.substr(2, eq - 2), tok.substr(eq + 1));
  }
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.validate();
  return cfg;
}

std::pair<Dataset, Dataset> load_datasets(const RunConfig& cfg) {
  if (cfg.dataset == "mnist") {
    const std::string dir = cfg.resolved_data_dir();
    Dataset train = load_mnist_idx(dir + "/train-images-idx3-ubyte",
                                   dir + "/train-labels-idx1-ubyte", "train");
    Dataset test = load_mnist_idx(dir + "/t10k-images-idx3-ubyte",
                                  dir + "/t10k-labels-idx1-ubyte", "test");
    return {std::move(train), std::move(test)};
  }
  Dataset train =
      synthetic_dataset(cfg.seed, cfg.synthetic_n, cfg.synthetic_classes,
                        cfg.synthetic_features, cfg.synthetic_spread);
  Dataset test =
      synthetic_dataset(cfg.seed, cfg.synthetic_n / 4 + 1,
                        cfg.synthetic_classes, cfg.synthetic_features,
                        cfg.synthetic_spread, 1);
  test.split = "test";
  return {std::move(train), std::move(test)};
}

Trainer make_trainer(const RunConfig& cfg, const CommonArgs& args) {
  auto [train, test] = load_datasets(cfg);
  if (!args.resume.empty())
    return Trainer::load_checkpoint(args.resume, std::move(train),
                                    std::move(test));
  SpikingNetwork net = build_network(cfg);
  std::mt19937_64 rng(cfg.seed);
  init_weights(net, rng);
  if (cfg.init.rfind("pretrained:", 0) == 0) {
    const std::string path = cfg.init.substr(std::string("pretrained:").size());
    if (!std::filesystem::exists(path) &&
        !std::filesystem::exists(path + ".gz"))
      throw IoError("pretrained baseline checkpoint not found: " + path);
    load_checkpoint_weights(path, net);
  }
  return Trainer(cfg, std::move(net), std::move(train), std::move(test));
}

int run_training(Trainer& trainer, const RunConfig& cfg,
                 const std::string& final_name) {
  std::filesystem::create_directories(cfg.out_dir);
  MetricsWriter metrics(cfg.out_dir + "/metrics.csv");
  trainer.row_hook = [&](const MetricsRow& r) {
    metrics.append(r);
    std::printf("epoch %llu [%s] loss %.6f acc %.4f R %.4f\n",
                static_cast<unsigned long long>(r.epoch), r.phase.c_str(),
                r.loss, r.acc, r.resource);
    std::fflush(stdout);
  };
  trainer.budget_hook = [&](const std::string& tag) {
    const std::string path = cfg.out_dir + "/budget_" + tag + ".ckpt";
    trainer.save_checkpoint(path);
    std::printf("budget %s done, checkpoint %s\n", tag.c_str(), path.c_str());
  };
  trainer.run();
  trainer.save_checkpoint(cfg.out_dir + "/" + final_name);
  std::printf("final accuracy %.4f, counted sparsity %.4f\n",
              trainer.last_test_acc(),
              trainer.counted_sparsity(cfg.snap_eps));
  return kOk;
}

int cmd_train(const CLI::App* cmd, const CommonArgs& args) {
  // A resumed run defaults to the configuration stored in its checkpoint.
  RunConfig cfg = args.resume.empty()
                      ? resolve_config(cmd, args)
                      : resolve_config(cmd, args,
                                       Trainer::peek_config(args.resume));
  cfg.budgets.clear();  // baseline training never prunes
  Trainer trainer = make_trainer(cfg, args);
  return run_training(trainer, cfg, "baseline.ckpt");
}

int cmd_compress(const CLI::App* cmd, const CommonArgs& args) {
  RunConfig cfg = args.resume.empty()
                      ? resolve_config(cmd, args)
                      : resolve_config(cmd, args,
                                       Trainer::peek_config(args.resume));
  Trainer trainer = make_trainer(cfg, args);
  return run_training(trainer, cfg, "final.ckpt");
}

int cmd_eval(const CLI::App* cmd, const CommonArgs& args) {
  CommonArgs a = args;
  if (a.checkpoint.empty()) throw ConfigError("eval needs --checkpoint PATH");
  // Datasets default to the run configuration embedded in the checkpoint;
  // command-line overrides still apply on top (e.g. --data_dir).
  RunConfig cfg = resolve_config(cmd, a, Trainer::peek_config(a.checkpoint));
  auto [train, test] = load_datasets(cfg);
  Trainer trainer =
      Trainer::load_checkpoint(a.checkpoint, std::move(train), std::move(test));
  const RunConfig& tc = trainer.config();

  const double acc = trainer.evaluate_test();
  std::printf("checkpoint: %s\n", a.checkpoint.c_str());
  std::printf("top1_accuracy: %.6f\n", acc);
  std::printf("accuracy_at_save: %.6f\n", trainer.last_test_acc());
  std::printf("counted_sparsity: %.6f\n",
              trainer.counted_sparsity(tc.snap_eps));

  std::size_t total = 0, total_kept = 0;
  std::printf("layer,weights,nonzero,connectivity\n");
  for (std::size_t n = 0; n < trainer.net().layers.size(); ++n) {
    const auto& l = trainer.net().layers[n];
    std::size_t kept = 0;
    for (std::size_t i = 0; i < l.w.numel(); ++i)
      if (std::fabs(l.w[i]) > tc.snap_eps) ++kept;
    total += l.weight_count();
    total_kept += kept;
    std::printf("%zu,%zu,%zu,%.6f\n", n, l.weight_count(), kept,
                static_cast<double>(kept) /
                    static_cast<double>(l.weight_count()));
  }
  std::printf("global,%zu,%zu,%.6f\n", total, total_kept,
              static_cast<double>(total_kept) / static_cast<double>(total));
  return kOk;
}

int cmd_export_metrics(const CLI::App* cmd, const CommonArgs& args) {
  RunConfig cfg = resolve_config(cmd, args);
  const std::string path = cfg.out_dir + "/metrics.csv";
  std::ifstream f(path);
  if (!f) throw IoError("no metrics file at " + path);
  std::cout << f.rdbuf();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking network training and budgeted compression"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* train = app.add_subcommand("train", "train a baseline model");
  CLI::App* compress =
      app.add_subcommand("compress", "compress to a budget list");
  CLI::App* eval = app.add_subcommand("eval", "report checkpoint quality");
  CLI::App* exportm =
      app.add_subcommand("export-metrics", "print the metrics CSV");
  for (CLI::App* c : {train, compress, eval, exportm}) add_common(c, &args);
  train->add_option("--resume", args.resume, "resume from checkpoint");
  compress->add_option("--resume", args.resume, "resume from checkpoint");
  eval->add_option("--checkpoint", args.checkpoint, "checkpoint to evaluate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(train, args);
    if (compress->parsed()) return cmd_compress(compress, args);
    if (eval->parsed()) return cmd_eval(eval, args);
    return cmd_export_metrics(exportm, args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
