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

#ifndef DEVARB_SCENARIO_H_
#define DEVARB_SCENARIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "devarb/error.h"
#include "json.hpp"

namespace devarb {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double Distance(const Point3& a, const Point3& b);

struct RoomSpec {
  double length = 0.0;  // x extent, m
  double width = 0.0;   // y extent, m
  double height = 0.0;  // z extent, m
  double rt60 = 0.0;    // s

  double Volume() const { return length * width * height; }
  double SurfaceArea() const {
    return 2.0 * (length * width + length * height + width * height);
  }
  bool Contains(const Point3& p) const;

  friend bool operator==(const RoomSpec&, const RoomSpec&) = default;
};

enum class SourceKind { kSpeech, kNoise };

struct SourceSpec {
  Point3 location;
  double level_db_spl = 0.0;
  SourceKind kind = SourceKind::kSpeech;

  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct Scenario {
  RoomSpec room;
  std::vector<Point3> devices;  // one microphone per device
  SourceSpec speaker;
  std::vector<SourceSpec> noises;
  uint64_t seed = 0;
  // Render with direct paths only (reflection coefficient forced to zero).
  bool anechoic = false;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct GroundTruth {
  std::vector<double> distances;  // speaker to each device, device order
  int closest_index = 0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Generative process parameters. Defaults reproduce the reference
// distributions; the geometry constants are house choices.
struct GenConfig {
  bool noise_free = false;
  bool anechoic = false;
  // Disables wall clearance and the minimum speaker distance, used for
  // checking raw distribution shapes.
  bool enforce_constraints = true;

  double room_length_min = 3.0, room_length_max = 10.0;
  double room_height_min = 2.5, room_height_max = 6.0;
  double rt60_alpha = 2.5, rt60_beta = 1.8;
  double min_rt60 = 0.05;
  std::vector<double> device_count_probs = {0.70, 0.25, 0.03, 0.02};
  int min_devices = 2;
  double device_loc_alpha = 0.2;
  double speaker_loc_alpha = 3.0;
  double noise_count_mean = 2.0;
  double noise_level_min = 25.0, noise_level_max = 80.0;
  double speech_level_min = 45.0, speech_level_max = 70.0;

  double device_height = 0.75;
  double speaker_height = 1.60;
  double noise_height_margin = 0.3;
  double wall_clearance = 0.10;
  double min_speaker_distance = 1.0;
  int max_attempts = 10000;
};

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

// Thrown when the rejection budget is exhausted.
class SamplingError : public DataError {
 public:
  explicit SamplingError(const std::string& what) : DataError(what) {}
};

// Deterministic in (seed, config). Room, device count and speech level come
// from one substream, the device/speaker layout from a second and noise
// sources from a third, so a noise-free scenario shares its room and layout
// with the noisy scenario drawn at the same seed.
Scenario SampleScenario(uint64_t seed, const GenConfig& config);

// Ties in distance resolve to the lowest device index.
GroundTruth ComputeGroundTruth(const Scenario& scenario);
GroundTruth GroundTruthFromDistances(std::vector<double> distances);

// Checks the structural invariants; returns an empty string when valid.
std::string ValidateScenario(const Scenario& scenario,
                             const GenConfig& config = {});

inline constexpr int kScenarioSchemaVersion = 1;

nlohmann::json ScenarioToJson(const Scenario& scenario, int64_t id = -1);
Scenario ScenarioFromJson(const nlohmann::json& j, int64_t* id = nullptr);

struct ScenarioRecord {
  int64_t id = 0;
  Scenario scenario;
};

void WriteScenariosJsonl(const std::string& path,
                         const std::vector<ScenarioRecord>& records);
std::vector<ScenarioRecord> ReadScenariosJsonl(const std::string& path);

}  // namespace devarb

#endif  // DEVARB_SCENARIO_H_
