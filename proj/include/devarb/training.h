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

#ifndef DEVARB_TRAINING_H_
#define DEVARB_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "devarb/arbitrator.h"
#include "json.hpp"

namespace devarb {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.0;
  uint64_t seed = 0;
  Architecture arch;
};

nlohmann::json TrainConfigJson(const TrainConfig& c);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

class Adam {
 public:
  Adam() = default;
  Adam(size_t size, const TrainConfig& config);

  void Step(std::span<float> params, std::span<const float> grad);

  int64_t steps() const { return steps_; }
  const std::vector<float>& first_moment() const { return m_; }
  const std::vector<float>& second_moment() const { return v_; }
  void Restore(std::vector<float> m, std::vector<float> v, int64_t steps);

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8, decay_ = 0.0;
  int64_t steps_ = 0;
  std::vector<float> m_, v_;
};

struct EpochLog {
  int epoch = 0;  // 1-based, continues across resumes
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainState {
  ArbitratorModel model;       // parameters after the last epoch
  Adam optimizer;
  ArbitratorModel best_model;  // highest validation accuracy so far
  double best_val_accuracy = -1.0;
  int best_epoch = 0;
  int epochs_completed = 0;
  std::vector<EpochLog> log;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> predictions;
};

// Batches are homogeneous in device count. Predictions use argmax with ties to
// the lowest index.
Evaluation EvaluateModel(const ArbitratorModel& model,
                         const std::vector<ArbitrationExample>& data,
                         int batch_size = 64);

using EpochCallback = std::function<void(const EpochLog&)>;

// Adam on mean cross-entropy; batches homogeneous in device count, shuffled
// per epoch from the seed. Runs config.epochs more epochs, starting from
// `resume` when given, keeping the best validation checkpoint.
TrainState Train(const std::vector<ArbitrationExample>& train_set,
                 const std::vector<ArbitrationExample>& val_set,
                 const TrainConfig& config,
                 std::optional<TrainState> resume = std::nullopt,
                 const EpochCallback& on_epoch = nullptr);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_group;
  // Coordinates whose +-step straddles a ReLU kink, left out of the norms.
  int64_t kinks_skipped = 0;
  int64_t coordinates = 0;
};

// Central differences on every parameter; the error of a parameter group is
// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-6). The floor
// covers groups whose true gradient vanishes, such as biases that shift all
// logits equally. A coordinate counts as a kink when the central difference
// at h and at h / 2 disagree by more than 1e-6 relative (1e-9 absolute for
// tiny derivatives) for h = step, step / 10 and step / 100; the loss is not
// differentiable there and finite differences say nothing about the
// analytic gradient.
GradientCheckResult GradientCheck(const ArbitratorNet<double>& model,
                                  const ArbitrationExample& sample,
                                  double step = 1e-4);

// Small-channel architecture for gradient checks.
Architecture GradientCheckArchitecture();

// Checkpoint directory: manifest.json plus one raw little-endian float32 blob
// per tensor (params.<name>.bin for the best model; last.<name>.bin and
// adam_m/adam_v.<name>.bin for resuming).
// `extra` keys are merged into the manifest.
void SaveCheckpoint(const std::string& dir, const TrainState& state,
                    const TrainConfig& config, const std::string& config_hash,
                    const nlohmann::json& extra = nlohmann::json::object());
TrainState LoadCheckpoint(const std::string& dir,
                          nlohmann::json* manifest = nullptr);
ArbitratorModel LoadBestModel(const std::string& dir,
                              nlohmann::json* manifest = nullptr);

void WriteTrainLogCsv(const std::string& path, const std::vector<EpochLog>& log);

}  // namespace devarb

#endif  // DEVARB_TRAINING_H_
