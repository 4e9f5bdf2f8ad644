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

#include "devarb/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "devarb/error.h"
#include "devarb/rng.h"

namespace devarb {

namespace fs = std::filesystem;

nlohmann::json TrainConfigJson(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed},
          {"architecture", ArchitectureJson(c.arch)}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig d, c;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", d.adam_epsilon);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.seed = j.value("seed", d.seed);
  if (j.contains("architecture")) {
    c.arch = ArchitectureFromJson(j.at("architecture"));
  }
  return c;
}

Adam::Adam(size_t size, const TrainConfig& c)
    : lr_(c.learning_rate),
      beta1_(c.adam_beta1),
      beta2_(c.adam_beta2),
      eps_(c.adam_epsilon),
      decay_(c.weight_decay),
      m_(size, 0.0f),
      v_(size, 0.0f) {}

void Adam::Step(std::span<float> params, std::span<const float> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw UsageError("optimizer state does not match the parameters");
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const float b1 = static_cast<float>(beta1_);
  const float b2 = static_cast<float>(beta2_);
  const float step = static_cast<float>(lr_ / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float eps = static_cast<float>(eps_);
  const float decay = static_cast<float>(decay_);
  for (size_t i = 0; i < params.size(); ++i) {
    const float g = grad[i] + decay * params[i];
    m_[i] = b1 * m_[i] + (1.0f - b1) * g;
    v_[i] = b2 * v_[i] + (1.0f - b2) * g * g;
    params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
  }
}

void Adam::Restore(std::vector<float> m, std::vector<float> v, int64_t steps) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw DataError("optimizer state has the wrong size");
  }
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
}

namespace {

// Batches of example indices, each homogeneous in device count.
std::vector<std::vector<int>> MakeBatches(
    const std::vector<ArbitrationExample>& data, int batch_size, Rng* rng) {
  std::map<size_t, std::vector<int>> buckets;
  for (size_t i = 0; i < data.size(); ++i) {
    buckets[data[i].devices.size()].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> batches;
  for (auto& [count, indices] : buckets) {
    if (rng != nullptr) std::shuffle(indices.begin(), indices.end(), *rng);
    for (size_t start = 0; start < indices.size(); start += batch_size) {
      const size_t end = std::min(indices.size(), start + batch_size);
      batches.emplace_back(indices.begin() + start, indices.begin() + end);
    }
  }
  if (rng != nullptr) std::shuffle(batches.begin(), batches.end(), *rng);
  return batches;
}

int ArgMaxLogit(const ArbitratorModel::Vector& logits) {
  int best = 0;
  for (int j = 1; j < logits.size(); ++j) {
    if (logits(j) > logits(best)) best = j;
  }
  return best;
}

}  // namespace

Evaluation EvaluateModel(const ArbitratorModel& model,
                         const std::vector<ArbitrationExample>& data,
                         int batch_size) {
  if (data.empty()) throw UsageError("cannot evaluate on an empty dataset");
  Evaluation ev;
  ev.predictions.assign(data.size(), 0);
  double loss = 0.0;
  int correct = 0;
  std::vector<ArbitratorModel::Vector> logits;
  for (const auto& batch : MakeBatches(data, batch_size, nullptr)) {
    std::vector<const ArbitrationExample*> ptrs;
    for (int i : batch) ptrs.push_back(&data[i]);
    loss += static_cast<double>(model.LossAndGradient(ptrs, nullptr, &logits)) *
            static_cast<double>(batch.size());
    for (size_t b = 0; b < batch.size(); ++b) {
      const int pred = ArgMaxLogit(logits[b]);
      ev.predictions[batch[b]] = pred;
      if (pred == data[batch[b]].label) ++correct;
    }
  }
  ev.loss = loss / static_cast<double>(data.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

TrainState Train(const std::vector<ArbitrationExample>& train_set,
                 const std::vector<ArbitrationExample>& val_set,
                 const TrainConfig& config, std::optional<TrainState> resume,
                 const EpochCallback& on_epoch) {
  if (train_set.empty()) throw UsageError("empty training set");
  if (val_set.empty()) throw UsageError("empty validation set");
  if (config.epochs < 0 || config.batch_size < 1) {
    throw UsageError("epochs must be >= 0 and batch_size >= 1");
  }
  TrainState state;
  if (resume.has_value()) {
    state = std::move(*resume);
    if (!(state.model.arch() == config.arch)) {
      throw UsageError("resumed checkpoint has a different architecture");
    }
  } else {
    state.model = ArbitratorModel(config.arch);
    state.model.InitHeUniform(config.seed);
    state.optimizer = Adam(state.model.param_count(), config);
    state.best_model = state.model;
  }

  std::vector<float> grad;
  std::vector<ArbitratorModel::Vector> logits;
  for (int e = 0; e < config.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const int epoch = state.epochs_completed + 1;
    Rng rng = MakeRng(config.seed, "train.shuffle", static_cast<uint64_t>(epoch));
    double loss_sum = 0.0;
    int correct = 0;
    for (const auto& batch : MakeBatches(train_set, config.batch_size, &rng)) {
      std::vector<const ArbitrationExample*> ptrs;
      for (int i : batch) ptrs.push_back(&train_set[i]);
      const double loss = state.model.LossAndGradient(ptrs, &grad, &logits);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss in epoch " +
                           std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(batch.size());
      for (size_t b = 0; b < batch.size(); ++b) {
        if (ArgMaxLogit(logits[b]) == ptrs[b]->label) ++correct;
      }
      state.optimizer.Step(state.model.params(), grad);
    }
    const Evaluation val = EvaluateModel(state.model, val_set, config.batch_size);
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(train_set.size());
    log.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train_set.size());
    log.val_loss = val.loss;
    log.val_accuracy = val.accuracy;
    log.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    state.log.push_back(log);
    state.epochs_completed = epoch;
    if (val.accuracy > state.best_val_accuracy) {
      state.best_val_accuracy = val.accuracy;
      state.best_epoch = epoch;
      state.best_model = state.model;
    }
    if (on_epoch) on_epoch(log);
  }
  return state;
}

Architecture GradientCheckArchitecture() {
  Architecture a;
  a.conv_channels = {2, 3, 3, 4, 4};
  a.embedding_dim = 6;
  a.hidden_dim = 5;
  return a;
}

GradientCheckResult GradientCheck(const ArbitratorNet<double>& model,
                                  const ArbitrationExample& sample,
                                  double step) {
  ArbitratorNet<double> work = model;
  const ArbitrationExample* ptr = &sample;
  const std::span<const ArbitrationExample* const> batch(&ptr, 1);
  std::vector<double> analytic;
  work.LossAndGradient(batch, &analytic);
  auto params = work.params();
  GradientCheckResult result;
  auto central = [&](size_t i, double h) {
    const double saved = params[i];
    params[i] = saved + h;
    const double plus = work.LossAndGradient(batch, nullptr);
    params[i] = saved - h;
    const double minus = work.LossAndGradient(batch, nullptr);
    params[i] = saved;
    return (plus - minus) / (2.0 * h);
  };
  for (const ParamInfo& info : work.param_infos()) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (size_t i = info.offset; i < info.offset + info.size; ++i) {
      ++result.coordinates;
      // Shrink the step up to twice to get off a kink before giving up.
      double numeric = 0.0;
      bool smooth = false;
      for (double h = step; !smooth && h >= step * 1e-2; h /= 10.0) {
        numeric = central(i, h);
        const double half = central(i, h / 2.0);
        smooth = std::abs(numeric - half) <=
                 1e-6 * std::max({std::abs(numeric), std::abs(half), 1e-3});
      }
      if (!smooth) {
        ++result.kinks_skipped;
        continue;
      }
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(std::max(a2, n2)), 1e-6);
    const double err = std::sqrt(diff2) / denom;
    result.per_group.emplace_back(info.name, err);
    result.max_relative_error = std::max(result.max_relative_error, err);
  }
  return result;
}

namespace {

void WriteBlob(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw DataError("write failed: " + path.string());
}

void ReadBlob(const fs::path& path, std::span<float> values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing tensor blob " + path.string());
  in.seekg(0, std::ios::end);
  if (static_cast<size_t>(in.tellg()) != values.size() * sizeof(float)) {
    throw DataError(path.string() + ": tensor size mismatch");
  }
  in.seekg(0);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
}

nlohmann::json LogJson(const EpochLog& l) {
  return {{"epoch", l.epoch},
          {"train_loss", l.train_loss},
          {"train_accuracy", l.train_accuracy},
          {"val_loss", l.val_loss},
          {"val_accuracy", l.val_accuracy},
          {"seconds", l.seconds}};
}

nlohmann::json ReadManifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw DataError("missing checkpoint manifest " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void LoadTensors(const fs::path& dir, const std::string& prefix,
                 const std::vector<ParamInfo>& infos, std::span<float> dst) {
  for (const ParamInfo& p : infos) {
    ReadBlob(dir / (prefix + "." + p.name + ".bin"),
             dst.subspan(p.offset, p.size));
  }
}

}  // namespace

void SaveCheckpoint(const std::string& dir, const TrainState& state,
                    const TrainConfig& config, const std::string& config_hash,
                    const nlohmann::json& extra) {
  const fs::path root(dir);
  fs::create_directories(root);
  nlohmann::json tensors = nlohmann::json::array();
  const auto& infos = state.best_model.param_infos();
  const auto best = state.best_model.params();
  const auto last = state.model.params();
  const auto& m = state.optimizer.first_moment();
  const auto& v = state.optimizer.second_moment();
  const bool have_adam = m.size() == last.size();
  for (const ParamInfo& p : infos) {
    WriteBlob(root / ("params." + p.name + ".bin"), best.subspan(p.offset, p.size));
    WriteBlob(root / ("last." + p.name + ".bin"), last.subspan(p.offset, p.size));
    if (have_adam) {
      WriteBlob(root / ("adam_m." + p.name + ".bin"),
                std::span<const float>(m).subspan(p.offset, p.size));
      WriteBlob(root / ("adam_v." + p.name + ".bin"),
                std::span<const float>(v).subspan(p.offset, p.size));
    }
    tensors.push_back({{"name", p.name},
                       {"shape", p.shape},
                       {"dtype", "float32"},
                       {"byte_order", "little"},
                       {"file", "params." + p.name + ".bin"}});
  }
  nlohmann::json log = nlohmann::json::array();
  for (const EpochLog& l : state.log) log.push_back(LogJson(l));
  nlohmann::json manifest = {
      {"format", "devarb-checkpoint"},
      {"version", 1},
      {"architecture", ArchitectureJson(state.best_model.arch())},
      {"train_config", TrainConfigJson(config)},
      {"config_hash", config_hash},
      {"param_count", state.best_model.param_count()},
      {"extractor_param_count", state.best_model.extractor_param_count()},
      {"best_val_accuracy", state.best_val_accuracy},
      {"best_epoch", state.best_epoch},
      {"epochs_completed", state.epochs_completed},
      {"adam_steps", state.optimizer.steps()},
      {"has_optimizer_state", have_adam},
      {"tensors", tensors},
      {"train_log", log}};
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  std::ofstream out(root / "manifest.json");
  if (!out) throw DataError("cannot write checkpoint manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

ArbitratorModel LoadBestModel(const std::string& dir, nlohmann::json* manifest) {
  const nlohmann::json j = ReadManifest(dir);
  ArbitratorModel model(ArchitectureFromJson(j.at("architecture")));
  if (j.at("param_count").get<size_t>() != model.param_count()) {
    throw DataError("checkpoint parameter count does not match architecture");
  }
  LoadTensors(dir, "params", model.param_infos(), model.params());
  if (manifest != nullptr) *manifest = j;
  return model;
}

TrainState LoadCheckpoint(const std::string& dir, nlohmann::json* manifest) {
  nlohmann::json j;
  TrainState state;
  state.best_model = LoadBestModel(dir, &j);
  state.model = ArbitratorModel(state.best_model.arch());
  LoadTensors(dir, "last", state.model.param_infos(), state.model.params());
  const TrainConfig config = TrainConfigFromJson(j.at("train_config"));
  state.optimizer = Adam(state.model.param_count(), config);
  if (j.value("has_optimizer_state", false)) {
    std::vector<float> m(state.model.param_count()), v(state.model.param_count());
    LoadTensors(dir, "adam_m", state.model.param_infos(), m);
    LoadTensors(dir, "adam_v", state.model.param_infos(), v);
    state.optimizer.Restore(std::move(m), std::move(v),
                            j.at("adam_steps").get<int64_t>());
  }
  state.best_val_accuracy = j.at("best_val_accuracy").get<double>();
  state.best_epoch = j.at("best_epoch").get<int>();
  state.epochs_completed = j.at("epochs_completed").get<int>();
  for (const auto& l : j.at("train_log")) {
    EpochLog e;
    e.epoch = l.at("epoch").get<int>();
    e.train_loss = l.at("train_loss").get<double>();
    e.train_accuracy = l.at("train_accuracy").get<double>();
    e.val_loss = l.at("val_loss").get<double>();
    e.val_accuracy = l.at("val_accuracy").get<double>();
    e.seconds = l.at("seconds").get<double>();
    state.log.push_back(e);
  }
  if (manifest != nullptr) *manifest = j;
  return state;
}

void WriteTrainLogCsv(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_loss,train_accuracy,val_loss,val_accuracy,seconds\n";
  out.precision(9);
  for (const EpochLog& l : log) {
    out << l.epoch << ',' << l.train_loss << ',' << l.train_accuracy << ','
        << l.val_loss << ',' << l.val_accuracy << ',' << l.seconds << '\n';
  }
}

}  // namespace devarb
