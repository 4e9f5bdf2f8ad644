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

#ifndef DEVARB_PIPELINE_H_
#define DEVARB_PIPELINE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "devarb/audio.h"
#include "devarb/eval.h"
#include "devarb/features.h"
#include "devarb/scenario.h"
#include "devarb/training.h"
#include "json.hpp"

namespace devarb {

// Everything a run depends on. The output root, worker count and source path
// are left out of the hash; the first two cannot change results and the
// corpus is identified by its content, not its location.
struct RunConfig {
  uint64_t seed = 0;
  std::array<int64_t, 3> counts = {2000, 500, 1000};  // train, val, test
  std::string source_root;
  std::string out = "run";
  GenConfig gen;
  RenderConfig render;
  bool write_wavs = true;
  TrainConfig train;
  std::vector<double> epsilons = {0.0, 0.25, 0.5, 1.0, 2.0, kInfiniteEpsilon};
  double delta_bin_width = 1.0;
  int threads = 0;  // 0: hardware concurrency

  int64_t count(Split split) const { return counts[static_cast<int>(split)]; }
  std::string Hash() const;
  // Covers only what determines scenarios and rendered data (seed, counts,
  // generation and rendering settings). Mixed-input checks compare this.
  std::string DataHash() const;
};

nlohmann::json RunConfigJson(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are a UsageError.
RunConfig RunConfigFromJson(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::string& path);
void SaveRunConfig(const RunConfig& config, const std::string& path);

// Output layout under RunConfig::out.
std::string ScenarioPath(const RunConfig& config, Split split);
std::string DataDir(const RunConfig& config, Split split);
std::string CheckpointDir(const RunConfig& config);
std::string EvalDir(const RunConfig& config);

// Runs fn(i) for i in [0, n) over `threads` workers. The first exception is
// rethrown after all workers stop.
void ParallelFor(int64_t n, int threads, const std::function<void(int64_t)>& fn);

// Per-scenario seed: stage "gen.<split>" and the scenario index.
uint64_t ScenarioSeed(uint64_t global_seed, Split split, int64_t index);

struct GenSummary {
  std::array<int64_t, 3> counts{};
  std::string config_hash;
};
GenSummary CmdGen(const RunConfig& config, const std::vector<Split>& splits);

// One rendered scenario as listed in data/<split>/manifest.jsonl.
struct RenderedScenario {
  int64_t id = 0;
  Split split = Split::kTrain;
  int label = 0;  // closest device
  std::vector<double> distances;
  std::string speech_segment;
  std::vector<std::string> noise_segments;
  std::vector<std::string> wav_files;   // relative to the data dir
  std::vector<std::string> lfbe_files;  // relative to the data dir
  std::string config_hash;
};
nlohmann::json RenderedScenarioJson(const RenderedScenario& r);
RenderedScenario RenderedScenarioFromJson(const nlohmann::json& j);
std::vector<RenderedScenario> ReadDataManifest(const std::string& data_dir);

struct RenderSummary {
  std::array<int64_t, 3> scenarios{};
  std::array<int64_t, 3> device_files{};
  int64_t split_violations = 0;
};
RenderSummary CmdRender(const RunConfig& config, const std::vector<Split>& splits);

// Renders one scenario in memory; no files are touched.
struct RenderedAudio {
  std::vector<DeviceWaveform> waveforms;
  std::string speech_segment;
  std::vector<std::string> noise_segments;
};
RenderedAudio RenderScenario(const Scenario& scenario, Split split,
                             const SourceCatalog& catalog,
                             const RenderConfig& render);

std::vector<ArbitrationExample> LoadExamples(const RunConfig& config,
                                             Split split);

struct TrainSummary {
  int epochs_completed = 0;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
};
TrainSummary CmdTrain(const RunConfig& config, bool resume, bool force = false,
                      const EpochCallback& on_epoch = nullptr);

enum class SystemChoice { kBaseline, kDnn, kBoth };
SystemChoice ParseSystem(const std::string& name);

struct EvalSummary {
  std::optional<EvalReport> baseline;
  std::optional<EvalReport> dnn;
  std::optional<double> relative_error;
  nlohmann::json metrics;
};
// Evaluates on the test split and writes eval/<system>/{report.json,
// delta_curve.csv, epsilon_curve.csv} plus eval/metrics.json. Refuses inputs
// stamped with another config hash unless `force`.
EvalSummary CmdEval(const RunConfig& config, SystemChoice system,
                    bool force = false);

// Human-readable summary of eval/metrics.json.
std::string CmdReport(const RunConfig& config);

}  // namespace devarb

#endif  // DEVARB_PIPELINE_H_
