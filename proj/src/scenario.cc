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

#include "devarb/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "devarb/rng.h"

namespace devarb {

double Distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool RoomSpec::Contains(const Point3& p) const {
  return p.x > 0.0 && p.x < length && p.y > 0.0 && p.y < width && p.z > 0.0 &&
         p.z < height;
}

namespace {

bool HasWallClearance(const RoomSpec& room, const Point3& p, double clearance) {
  return p.x >= clearance && p.x <= room.length - clearance &&
         p.y >= clearance && p.y <= room.width - clearance;
}

// Beta-distributed placement relative to the room; redrawn until the point
// clears the x/y walls (when enforced). Per-point redraws are exact rejection
// because wall clearance is independent across points.
Point3 SamplePlacement(Rng& rng, const RoomSpec& room, double alpha, double z,
                       const GenConfig& config, int64_t& attempts) {
  for (;;) {
    if (++attempts > config.max_attempts) {
      throw SamplingError("rejection budget exceeded while placing a point");
    }
    Point3 p{room.length * SampleBeta(rng, alpha, alpha),
             room.width * SampleBeta(rng, alpha, alpha), z};
    if (!config.enforce_constraints) return p;
    if (HasWallClearance(room, p, config.wall_clearance) && room.Contains(p)) {
      return p;
    }
  }
}

}  // namespace

Scenario SampleScenario(uint64_t seed, const GenConfig& config) {
  if (config.device_count_probs.empty()) {
    throw UsageError("device_count_probs must not be empty");
  }
  Scenario s;
  s.seed = seed;
  s.anechoic = config.anechoic;

  Rng room_rng = MakeRng(seed, "scenario.room");
  std::uniform_real_distribution<double> lw(config.room_length_min,
                                            config.room_length_max);
  std::uniform_real_distribution<double> h(config.room_height_min,
                                           config.room_height_max);
  s.room.length = lw(room_rng);
  s.room.width = lw(room_rng);
  s.room.height = h(room_rng);
  do {
    s.room.rt60 = SampleBeta(room_rng, config.rt60_alpha, config.rt60_beta);
  } while (s.room.rt60 < config.min_rt60);
  std::discrete_distribution<int> count(config.device_count_probs.begin(),
                                        config.device_count_probs.end());
  const int num_devices = config.min_devices + count(room_rng);
  std::uniform_real_distribution<double> speech_level(config.speech_level_min,
                                                      config.speech_level_max);
  s.speaker.kind = SourceKind::kSpeech;
  s.speaker.level_db_spl = speech_level(room_rng);

  Rng layout_rng = MakeRng(seed, "scenario.layout");
  int64_t attempts = 0;
  for (;;) {
    s.devices.clear();
    for (int i = 0; i < num_devices; ++i) {
      s.devices.push_back(SamplePlacement(layout_rng, s.room,
                                          config.device_loc_alpha,
                                          config.device_height, config,
                                          attempts));
    }
    s.speaker.location =
        SamplePlacement(layout_rng, s.room, config.speaker_loc_alpha,
                        config.speaker_height, config, attempts);
    if (!config.enforce_constraints) break;
    const bool far_enough = std::all_of(
        s.devices.begin(), s.devices.end(), [&](const Point3& d) {
          return Distance(d, s.speaker.location) >= config.min_speaker_distance;
        });
    if (far_enough) break;
  }

  if (!config.noise_free) {
    Rng noise_rng = MakeRng(seed, "scenario.noise");
    std::poisson_distribution<int> noise_count(config.noise_count_mean);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> noise_z(
        config.noise_height_margin, s.room.height - config.noise_height_margin);
    std::uniform_real_distribution<double> noise_level(config.noise_level_min,
                                                       config.noise_level_max);
    const int n = noise_count(noise_rng);
    for (int i = 0; i < n; ++i) {
      SourceSpec noise;
      noise.kind = SourceKind::kNoise;
      do {
        noise.location = {s.room.length * unit(noise_rng),
                          s.room.width * unit(noise_rng), noise_z(noise_rng)};
      } while (!s.room.Contains(noise.location));
      noise.level_db_spl = noise_level(noise_rng);
      s.noises.push_back(noise);
    }
  }
  return s;
}

GroundTruth GroundTruthFromDistances(std::vector<double> distances) {
  if (distances.empty()) throw UsageError("ground truth needs a device");
  GroundTruth gt;
  gt.distances = std::move(distances);
  const auto& d = gt.distances;
  // min_element returns the first minimum: lowest index wins ties.
  gt.closest_index =
      static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
  gt.d1 = d[gt.closest_index];
  gt.d2 = gt.d1;
  bool have_second = false;
  for (size_t i = 0; i < d.size(); ++i) {
    if (static_cast<int>(i) == gt.closest_index) continue;
    if (!have_second || d[i] < gt.d2) {
      gt.d2 = d[i];
      have_second = true;
    }
  }
  return gt;
}

GroundTruth ComputeGroundTruth(const Scenario& scenario) {
  std::vector<double> distances;
  distances.reserve(scenario.devices.size());
  for (const Point3& d : scenario.devices) {
    distances.push_back(Distance(d, scenario.speaker.location));
  }
  return GroundTruthFromDistances(std::move(distances));
}

std::string ValidateScenario(const Scenario& s, const GenConfig& config) {
  std::ostringstream err;
  const int n = static_cast<int>(s.devices.size());
  const int max_devices =
      config.min_devices + static_cast<int>(config.device_count_probs.size()) -
      1;
  if (n < config.min_devices || n > max_devices) {
    err << "device count " << n << " out of range; ";
  }
  auto check_point = [&](const Point3& p, const char* what, bool clearance) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !s.room.Contains(p)) {
      err << what << " outside the room; ";
    } else if (clearance &&
               !HasWallClearance(s.room, p, config.wall_clearance)) {
      err << what << " too close to a wall; ";
    }
  };
  for (const Point3& d : s.devices) check_point(d, "device", true);
  check_point(s.speaker.location, "speaker", true);
  for (const SourceSpec& noise : s.noises) {
    check_point(noise.location, "noise source", false);
  }
  for (const Point3& d : s.devices) {
    if (Distance(d, s.speaker.location) < config.min_speaker_distance) {
      err << "speaker closer than " << config.min_speaker_distance
          << " m to a device; ";
      break;
    }
  }
  if (!(s.room.rt60 > 0.0 && s.room.rt60 < 1.0)) err << "rt60 out of (0,1); ";
  return err.str();
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{{"noise_free", c.noise_free},
                     {"anechoic", c.anechoic},
                     {"enforce_constraints", c.enforce_constraints},
                     {"room_length_min", c.room_length_min},
                     {"room_length_max", c.room_length_max},
                     {"room_height_min", c.room_height_min},
                     {"room_height_max", c.room_height_max},
                     {"rt60_alpha", c.rt60_alpha},
                     {"rt60_beta", c.rt60_beta},
                     {"min_rt60", c.min_rt60},
                     {"device_count_probs", c.device_count_probs},
                     {"min_devices", c.min_devices},
                     {"device_loc_alpha", c.device_loc_alpha},
                     {"speaker_loc_alpha", c.speaker_loc_alpha},
                     {"noise_count_mean", c.noise_count_mean},
                     {"noise_level_min", c.noise_level_min},
                     {"noise_level_max", c.noise_level_max},
                     {"speech_level_min", c.speech_level_min},
                     {"speech_level_max", c.speech_level_max},
                     {"device_height", c.device_height},
                     {"speaker_height", c.speaker_height},
                     {"noise_height_margin", c.noise_height_margin},
                     {"wall_clearance", c.wall_clearance},
                     {"min_speaker_distance", c.min_speaker_distance},
                     {"max_attempts", c.max_attempts}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  GenConfig d;
  c.noise_free = j.value("noise_free", d.noise_free);
  c.anechoic = j.value("anechoic", d.anechoic);
  c.enforce_constraints = j.value("enforce_constraints", d.enforce_constraints);
  c.room_length_min = j.value("room_length_min", d.room_length_min);
  c.room_length_max = j.value("room_length_max", d.room_length_max);
  c.room_height_min = j.value("room_height_min", d.room_height_min);
  c.room_height_max = j.value("room_height_max", d.room_height_max);
  c.rt60_alpha = j.value("rt60_alpha", d.rt60_alpha);
  c.rt60_beta = j.value("rt60_beta", d.rt60_beta);
  c.min_rt60 = j.value("min_rt60", d.min_rt60);
  c.device_count_probs = j.value("device_count_probs", d.device_count_probs);
  c.min_devices = j.value("min_devices", d.min_devices);
  c.device_loc_alpha = j.value("device_loc_alpha", d.device_loc_alpha);
  c.speaker_loc_alpha = j.value("speaker_loc_alpha", d.speaker_loc_alpha);
  c.noise_count_mean = j.value("noise_count_mean", d.noise_count_mean);
  c.noise_level_min = j.value("noise_level_min", d.noise_level_min);
  c.noise_level_max = j.value("noise_level_max", d.noise_level_max);
  c.speech_level_min = j.value("speech_level_min", d.speech_level_min);
  c.speech_level_max = j.value("speech_level_max", d.speech_level_max);
  c.device_height = j.value("device_height", d.device_height);
  c.speaker_height = j.value("speaker_height", d.speaker_height);
  c.noise_height_margin = j.value("noise_height_margin", d.noise_height_margin);
  c.wall_clearance = j.value("wall_clearance", d.wall_clearance);
  c.min_speaker_distance =
      j.value("min_speaker_distance", d.min_speaker_distance);
  c.max_attempts = j.value("max_attempts", d.max_attempts);
}

namespace {

nlohmann::json PointJson(const Point3& p) { return {p.x, p.y, p.z}; }

Point3 PointFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("bad point in scenario");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json SourceJson(const SourceSpec& s) {
  return {{"location", PointJson(s.location)},
          {"level_db_spl", s.level_db_spl},
          {"kind", s.kind == SourceKind::kSpeech ? "speech" : "noise"}};
}

SourceSpec SourceFromJson(const nlohmann::json& j) {
  SourceSpec s;
  s.location = PointFromJson(j.at("location"));
  s.level_db_spl = j.at("level_db_spl").get<double>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "speech") {
    s.kind = SourceKind::kSpeech;
  } else if (kind == "noise") {
    s.kind = SourceKind::kNoise;
  } else {
    throw DataError("unknown source kind '" + kind + "'");
  }
  return s;
}

}  // namespace

nlohmann::json ScenarioToJson(const Scenario& s, int64_t id) {
  nlohmann::json j;
  j["schema_version"] = kScenarioSchemaVersion;
  if (id >= 0) j["id"] = id;
  j["seed"] = s.seed;
  j["anechoic"] = s.anechoic;
  j["room"] = {{"length", s.room.length},
               {"width", s.room.width},
               {"height", s.room.height},
               {"rt60", s.room.rt60}};
  nlohmann::json devices = nlohmann::json::array();
  for (const Point3& d : s.devices) devices.push_back(PointJson(d));
  j["devices"] = std::move(devices);
  j["speaker"] = SourceJson(s.speaker);
  nlohmann::json noises = nlohmann::json::array();
  for (const SourceSpec& n : s.noises) noises.push_back(SourceJson(n));
  j["noises"] = std::move(noises);
  return j;
}

Scenario ScenarioFromJson(const nlohmann::json& j, int64_t* id) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kScenarioSchemaVersion) {
      throw DataError("unsupported scenario schema version " +
                      std::to_string(version));
    }
    Scenario s;
    if (id != nullptr) *id = j.value("id", int64_t{-1});
    s.seed = j.at("seed").get<uint64_t>();
    s.anechoic = j.value("anechoic", false);
    const auto& room = j.at("room");
    s.room.length = room.at("length").get<double>();
    s.room.width = room.at("width").get<double>();
    s.room.height = room.at("height").get<double>();
    s.room.rt60 = room.at("rt60").get<double>();
    for (const auto& d : j.at("devices")) s.devices.push_back(PointFromJson(d));
    s.speaker = SourceFromJson(j.at("speaker"));
    for (const auto& n : j.at("noises")) s.noises.push_back(SourceFromJson(n));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scenario: ") + e.what());
  }
}

void WriteScenariosJsonl(const std::string& path,
                         const std::vector<ScenarioRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const ScenarioRecord& r : records) {
    out << ScenarioToJson(r.scenario, r.id).dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<ScenarioRecord> ReadScenariosJsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::vector<ScenarioRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    ScenarioRecord r;
    r.scenario = ScenarioFromJson(j, &r.id);
    if (r.id < 0) r.id = static_cast<int64_t>(records.size());
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace devarb
