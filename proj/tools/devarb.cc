// Copyright 2026 The Devarb Authors. All Rights Reserved.
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

// devarb: scenario generation, rendering, training and evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "devarb/error.h"
#include "devarb/pipeline.h"
#include "devarb/synthetic_corpus.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::vector<devarb::Split> ParseSplits(const std::string& list) {
  std::vector<devarb::Split> out;
  std::stringstream s(list);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.push_back(devarb::ParseSplit(item));
  }
  if (out.empty()) throw devarb::UsageError("--splits lists no split");
  return out;
}

struct Options {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> source_root;
  std::string splits = "train,val,test";
  std::vector<int64_t> counts;
  std::optional<int> epochs;
  std::optional<int> threads;
  bool noise_free = false;
  bool anechoic = false;
  std::string system = "both";
  bool resume = false;
  bool force = false;
  int utterances = devarb::kGscExpectedSevenCount;
};

// Starts from --config; otherwise stages after gen reuse the resolved config
// that gen stored in the output root.
devarb::RunConfig BuildConfig(const Options& o, bool is_gen) {
  devarb::RunConfig c;
  const std::string stored =
      (std::filesystem::path(o.out.value_or(c.out)) / "config.json").string();
  if (!o.config_path.empty()) {
    c = devarb::LoadRunConfig(o.config_path);
  } else if (!is_gen && std::filesystem::exists(stored)) {
    c = devarb::LoadRunConfig(stored);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.source_root) c.source_root = *o.source_root;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.threads) c.threads = *o.threads;
  if (!o.counts.empty()) {
    if (o.counts.size() != 3) throw devarb::UsageError("--counts needs train,val,test");
    c.counts = {o.counts[0], o.counts[1], o.counts[2]};
  }
  if (o.noise_free) c.gen.noise_free = true;
  if (o.anechoic) c.gen.anechoic = true;
  return c;
}

int Run(int argc, char** argv) {
  CLI::App app{"Device-arbitration simulation and evaluation toolkit"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "global seed");
    sub->add_option("--out", o.out, "output root");
    sub->add_option("--source-root", o.source_root, "GSCv2-layout corpus root");
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
    sub->add_flag("--force", o.force, "accept inputs stamped with another config hash");
  };

  CLI::App* gen = app.add_subcommand("gen", "sample scenarios per split");
  CLI::App* render = app.add_subcommand("render", "render device audio and LFBE features");
  CLI::App* train = app.add_subcommand("train", "train the neural arbitrator");
  CLI::App* eval = app.add_subcommand("eval", "evaluate baseline and/or DNN on the test split");
  CLI::App* report = app.add_subcommand("report", "summarize evaluation metrics");
  CLI::App* synth = app.add_subcommand(
      "synth-corpus", "write a synthetic corpus in the GSCv2 layout to --out");
  for (CLI::App* sub : {gen, render, train, eval, report}) add_common(sub);
  for (CLI::App* sub : {gen, render}) {
    sub->add_option("--splits", o.splits, "comma-separated splits");
    sub->add_flag("--noise-free", o.noise_free, "scenarios without noise sources");
    sub->add_flag("--anechoic", o.anechoic, "direct-path rendering only");
  }
  gen->add_option("--counts", o.counts, "scenario counts: train,val,test")->delimiter(',');
  train->add_option("--epochs", o.epochs, "epochs to run");
  train->add_flag("--resume", o.resume, "continue from the checkpoint in <out>/model");
  eval->add_option("--system", o.system, "baseline, dnn or both")
      ->check(CLI::IsMember({"baseline", "dnn", "both"}));
  for (CLI::App* sub : {train, eval, report}) {
    sub->add_flag("--noise-free", o.noise_free, "config override (affects the hash)");
    sub->add_flag("--anechoic", o.anechoic, "config override (affects the hash)");
  }
  synth->add_option("--out", o.out, "corpus root")->required();
  synth->add_option("--seed", o.seed, "corpus seed");
  synth->add_option("--utterances", o.utterances, "keyword utterances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (synth->parsed()) {
    devarb::SyntheticCorpusOptions so;
    so.num_utterances = o.utterances;
    if (o.seed) so.seed = *o.seed;
    const auto s = devarb::WriteSyntheticGscv2(*o.out, so);
    std::printf("wrote %d utterances and %zu background files to %s\n", s.utterances,
                s.background_files.size(), o.out->c_str());
    return kExitOk;
  }

  const devarb::RunConfig config = BuildConfig(o, gen->parsed());
  std::filesystem::create_directories(config.out);
  if (gen->parsed()) {
    devarb::SaveRunConfig(config, (std::filesystem::path(config.out) / "config.json").string());
    const auto s = devarb::CmdGen(config, ParseSplits(o.splits));
    std::printf("config %s: %lld/%lld/%lld scenarios\n", s.config_hash.c_str(),
                static_cast<long long>(s.counts[0]), static_cast<long long>(s.counts[1]),
                static_cast<long long>(s.counts[2]));
  } else if (render->parsed()) {
    const auto s = devarb::CmdRender(config, ParseSplits(o.splits));
    for (int i = 0; i < 3; ++i) {
      if (s.scenarios[i] == 0) continue;
      std::printf("%s: %lld scenarios, %lld device files\n",
                  devarb::SplitName(static_cast<devarb::Split>(i)),
                  static_cast<long long>(s.scenarios[i]),
                  static_cast<long long>(s.device_files[i]));
    }
  } else if (train->parsed()) {
    const auto s = devarb::CmdTrain(config, o.resume, o.force, [](const devarb::EpochLog& l) {
      std::printf("epoch %3d  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f  (%.1fs)\n",
                  l.epoch, l.train_loss, l.train_accuracy, l.val_loss, l.val_accuracy,
                  l.seconds);
      std::fflush(stdout);
    });
    std::printf("best epoch %d, val accuracy %.4f\n", s.best_epoch, s.best_val_accuracy);
  } else if (eval->parsed()) {
    const auto s = devarb::CmdEval(config, devarb::ParseSystem(o.system), o.force);
    if (s.baseline) std::printf("baseline accuracy %.4f\n", s.baseline->accuracy);
    if (s.dnn) std::printf("dnn accuracy %.4f\n", s.dnn->accuracy);
    if (s.relative_error) std::printf("relative error rate %.4f\n", *s.relative_error);
  } else if (report->parsed()) {
    std::cout << devarb::CmdReport(config);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const devarb::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const devarb::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
}
