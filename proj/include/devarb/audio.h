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

#ifndef DEVARB_AUDIO_H_
#define DEVARB_AUDIO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "devarb/acoustics.h"
#include "devarb/scenario.h"

namespace devarb {

enum class Split { kTrain, kVal, kTest };

const char* SplitName(Split split);
Split ParseSplit(const std::string& name);

struct AudioSegment {
  std::string id;
  Split split = Split::kTrain;
  std::string path;
  int64_t offset = 0;  // frames
  int64_t length = 0;  // frames
};

struct SourceCatalog {
  std::string root;
  std::vector<AudioSegment> speech;
  std::vector<AudioSegment> background;
  std::vector<std::string> warnings;

  std::vector<const AudioSegment*> SpeechIn(Split split) const;
  std::vector<const AudioSegment*> BackgroundIn(Split split) const;
};

inline constexpr int kGscExpectedSevenCount = 2377;
inline constexpr int64_t kBackgroundSubsegmentFrames = 10 * kSampleRate;

// SpeechCommands split rule: SHA-1 of the speaker id (file name up to
// "_nohash_") mapped to a percentage; < 10 -> val, < 20 -> test, else train.
Split GscSplitForFile(const std::string& file_name);

// Catalogs `seven/` utterances and cuts `_background_noise_/` recordings into
// non-overlapping 10 s subsegments, assigned train/val/test 8:1:1 by their
// position in the (sorted) subsegment list.
SourceCatalog IngestGscv2(const std::string& dataset_root,
                          const std::string& keyword = "seven");

std::vector<double> LoadSegment(const AudioSegment& segment);

// Digital RMS for a level under the 94 dB SPL <-> RMS 1.0 convention.
double LevelToRms(double level_db_spl);

struct ActiveRegionOptions {
  int frame = 160;               // 10 ms
  double threshold_db = -30.0;   // relative to the loudest frame
};

// RMS over frames whose mean square lies within threshold_db of the loudest.
double ActiveRms(std::span<const double> waveform,
                 const ActiveRegionOptions& options = {});

// Scales the waveform so that its active-region RMS equals LevelToRms(level).
std::vector<double> ApplyLevel(std::span<const double> waveform,
                               double level_db_spl,
                               const ActiveRegionOptions& options = {});

inline constexpr int kWindowSamples = 2 * kSampleRate;

struct DeviceWaveform {
  std::vector<double> samples;
  int device_index = 0;
  double applied_jitter = 0.0;  // s
};

struct RenderConfig {
  int window_samples = kWindowSamples;
  double jitter_sigma = 0.1;
  double jitter_limit = 0.3;
  // Microphone self-noise level in dB SPL; disabled when unset.
  std::optional<double> self_noise_db;
  ActiveRegionOptions active_region;
};

// rirs[source][device]; source 0 is the speaker, 1.. the noise sources.
using RirSet = std::vector<std::vector<Rir>>;

RirSet SimulateScenarioRirs(const Scenario& scenario,
                            bool include_noises = true);

// Per device: sum over sources of (level-calibrated source * RIR), a truncated
// Gaussian start-offset jitter, and a fixed-length window with the speech
// clip centred in the zero-jitter window. Noise waveforms are cropped (or
// looped) at random so that they cover the window in steady state. An empty
// or all-zero source contributes nothing.
std::vector<DeviceWaveform> RenderDeviceAudio(
    const Scenario& scenario, const RirSet& rirs,
    std::span<const double> speech,
    const std::vector<std::vector<double>>& noises, uint64_t rng_seed,
    const RenderConfig& config = {});

}  // namespace devarb

#endif  // DEVARB_AUDIO_H_
