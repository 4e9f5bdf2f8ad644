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

#include "devarb/audio.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "devarb/dsp.h"
#include "devarb/error.h"
#include "devarb/rng.h"
#include "devarb/wav.h"

namespace devarb {

namespace fs = std::filesystem;

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw UsageError("unknown split '" + name + "'");
}

namespace {

std::vector<const AudioSegment*> Filter(const std::vector<AudioSegment>& all,
                                        Split split) {
  std::vector<const AudioSegment*> out;
  for (const AudioSegment& s : all) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

std::vector<fs::path> SortedWavs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::vector<const AudioSegment*> SourceCatalog::SpeechIn(Split split) const {
  return Filter(speech, split);
}

std::vector<const AudioSegment*> SourceCatalog::BackgroundIn(
    Split split) const {
  return Filter(background, split);
}

Split GscSplitForFile(const std::string& file_name) {
  std::string base = fs::path(file_name).filename().string();
  const size_t cut = base.find("_nohash_");
  const std::string speaker = cut == std::string::npos ? base : base.substr(0, cut);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(speaker.data(), speaker.size(), digest, &len, EVP_sha1(),
                 nullptr) != 1 ||
      len != 20) {
    throw NumericError("SHA-1 failed");
  }
  // int(hexdigest, 16) % 2^27 keeps the low 27 bits of the digest.
  const uint32_t low = (uint32_t{digest[16]} << 24) |
                       (uint32_t{digest[17]} << 16) |
                       (uint32_t{digest[18]} << 8) | uint32_t{digest[19]};
  constexpr uint32_t kMaxWavsPerClass = (1u << 27) - 1;
  const double percentage =
      (low & ((1u << 27) - 1)) * (100.0 / kMaxWavsPerClass);
  if (percentage < 10.0) return Split::kVal;
  if (percentage < 20.0) return Split::kTest;
  return Split::kTrain;
}

SourceCatalog IngestGscv2(const std::string& dataset_root,
                          const std::string& keyword) {
  const fs::path root(dataset_root);
  const fs::path speech_dir = root / keyword;
  const fs::path noise_dir = root / "_background_noise_";
  if (!fs::is_directory(speech_dir)) {
    throw DataError("missing keyword folder " + speech_dir.string());
  }
  if (!fs::is_directory(noise_dir)) {
    throw DataError("missing background folder " + noise_dir.string());
  }
  SourceCatalog catalog;
  catalog.root = dataset_root;

  for (const fs::path& file : SortedWavs(speech_dir)) {
    const WavInfo info = ReadWavInfo(file.string());
    if (info.sample_rate != kSampleRate) {
      throw DataError(file.string() + ": expected 16 kHz audio");
    }
    AudioSegment seg;
    seg.id = keyword + "/" + file.filename().string();
    seg.split = GscSplitForFile(file.filename().string());
    seg.path = file.string();
    seg.length = info.frames;
    catalog.speech.push_back(std::move(seg));
  }
  if (static_cast<int>(catalog.speech.size()) != kGscExpectedSevenCount) {
    catalog.warnings.push_back(
        "found " + std::to_string(catalog.speech.size()) + " '" + keyword +
        "' utterances, expected " + std::to_string(kGscExpectedSevenCount));
  }
  if (catalog.speech.empty()) throw DataError("no speech utterances found");

  int64_t index = 0;
  for (const fs::path& file : SortedWavs(noise_dir)) {
    const WavInfo info = ReadWavInfo(file.string());
    if (info.sample_rate != kSampleRate) {
      throw DataError(file.string() + ": expected 16 kHz audio");
    }
    const int64_t pieces = info.frames / kBackgroundSubsegmentFrames;
    for (int64_t k = 0; k < pieces; ++k, ++index) {
      AudioSegment seg;
      seg.id = "_background_noise_/" + file.filename().string() + "#" +
               std::to_string(k);
      const int64_t slot = index % 10;
      seg.split = slot < 8 ? Split::kTrain : (slot == 8 ? Split::kVal
                                                        : Split::kTest);
      seg.path = file.string();
      seg.offset = k * kBackgroundSubsegmentFrames;
      seg.length = kBackgroundSubsegmentFrames;
      catalog.background.push_back(std::move(seg));
    }
  }
  if (catalog.background.empty()) {
    catalog.warnings.push_back("no background recording reaches 10 s");
  }
  return catalog;
}

std::vector<double> LoadSegment(const AudioSegment& segment) {
  return ReadWavRange(segment.path, segment.offset, segment.length);
}

double LevelToRms(double level_db_spl) {
  return std::pow(10.0, (level_db_spl - 94.0) / 20.0);
}

double ActiveRms(std::span<const double> waveform,
                 const ActiveRegionOptions& options) {
  if (options.frame <= 0) throw UsageError("active-region frame must be > 0");
  const size_t frame = static_cast<size_t>(options.frame);
  std::vector<double> energy;  // per-frame sum of squares
  std::vector<size_t> sizes;
  for (size_t start = 0; start < waveform.size(); start += frame) {
    const size_t len = std::min(frame, waveform.size() - start);
    double e = 0.0;
    for (size_t i = 0; i < len; ++i) e += waveform[start + i] * waveform[start + i];
    energy.push_back(e);
    sizes.push_back(len);
  }
  double loudest = 0.0;
  for (size_t i = 0; i < energy.size(); ++i) {
    loudest = std::max(loudest, energy[i] / sizes[i]);
  }
  if (!(loudest > 0.0)) throw DataError("waveform is silent");
  const double floor = loudest * std::pow(10.0, options.threshold_db / 10.0);
  double e = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < energy.size(); ++i) {
    if (energy[i] / sizes[i] >= floor) {
      e += energy[i];
      n += sizes[i];
    }
  }
  return std::sqrt(e / static_cast<double>(n));
}

std::vector<double> ApplyLevel(std::span<const double> waveform,
                               double level_db_spl,
                               const ActiveRegionOptions& options) {
  const double gain = LevelToRms(level_db_spl) / ActiveRms(waveform, options);
  std::vector<double> out(waveform.begin(), waveform.end());
  for (double& v : out) v *= gain;
  return out;
}

RirSet SimulateScenarioRirs(const Scenario& scenario, bool include_noises) {
  const bool anechoic = scenario.anechoic;
  const AbsorptionParams absorption =
      anechoic ? AbsorptionParams{0.0, 0.0}
               : CalibrateAbsorption(scenario.room);
  std::vector<Point3> sources{scenario.speaker.location};
  if (include_noises) {
    for (const SourceSpec& n : scenario.noises) sources.push_back(n.location);
  }
  RirSet rirs(sources.size());
  for (size_t s = 0; s < sources.size(); ++s) {
    for (const Point3& mic : scenario.devices) {
      rirs[s].push_back(
          SimulateRoomRir(scenario.room, sources[s], mic, absorption, anechoic));
    }
  }
  return rirs;
}

namespace {

bool IsSilent(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

// buffer[start + i] += conv[i], clipped to the buffer.
void AddAt(std::vector<double>& buffer, int64_t start,
           const std::vector<double>& conv) {
  const int64_t n = static_cast<int64_t>(buffer.size());
  const int64_t lo = std::max<int64_t>(0, -start);
  const int64_t hi = std::min<int64_t>(static_cast<int64_t>(conv.size()), n - start);
  for (int64_t i = lo; i < hi; ++i) buffer[start + i] += conv[i];
}

}  // namespace

std::vector<DeviceWaveform> RenderDeviceAudio(
    const Scenario& scenario, const RirSet& rirs,
    std::span<const double> speech,
    const std::vector<std::vector<double>>& noises, uint64_t rng_seed,
    const RenderConfig& config) {
  const size_t num_devices = scenario.devices.size();
  if (num_devices == 0) throw UsageError("scenario has no devices");
  if (noises.size() != scenario.noises.size()) {
    throw UsageError("one noise waveform per noise source is required");
  }
  if (rirs.size() < 1 + scenario.noises.size()) {
    throw DataError("RIR missing for a source");
  }
  for (size_t s = 0; s < 1 + scenario.noises.size(); ++s) {
    if (rirs[s].size() != num_devices) {
      throw DataError("RIR missing for a (source, device) pair");
    }
  }
  const int64_t window = config.window_samples;
  const int64_t margin =
      static_cast<int64_t>(std::ceil(config.jitter_limit * kSampleRate));
  if (static_cast<int64_t>(speech.size()) > window - 2 * margin) {
    throw DataError("speech clip longer than the window minus jitter margin");
  }
  // Global timeline: buffer index 0 is `margin` samples before the nominal
  // window start.
  const int64_t span = window + 2 * margin;
  std::vector<std::vector<double>> buffers(num_devices,
                                           std::vector<double>(span, 0.0));

  if (!speech.empty() && !IsSilent(speech)) {
    const std::vector<double> calibrated = ApplyLevel(
        speech, scenario.speaker.level_db_spl, config.active_region);
    const int64_t start =
        margin + (window - static_cast<int64_t>(speech.size())) / 2;
    for (size_t d = 0; d < num_devices; ++d) {
      AddAt(buffers[d], start, FftConvolve(calibrated, rirs[0][d].samples));
    }
  }

  for (size_t j = 0; j < noises.size(); ++j) {
    const std::vector<double>& source = noises[j];
    if (source.empty() || IsSilent(source)) continue;
    size_t rir_len = 0;
    for (const Rir& r : rirs[1 + j]) rir_len = std::max(rir_len, r.length());
    // Starts rir_len samples before the buffer so the buffer sees the
    // steady-state response.
    const size_t needed = static_cast<size_t>(span) + rir_len;
    Rng crop_rng(DeriveSeed(rng_seed, "render.noise_crop", j));
    std::vector<double> crop(needed);
    if (source.size() > needed) {
      std::uniform_int_distribution<size_t> pick(0, source.size() - needed);
      const size_t offset = pick(crop_rng);
      std::copy(source.begin() + offset, source.begin() + offset + needed,
                crop.begin());
    } else {
      std::uniform_int_distribution<size_t> pick(0, source.size() - 1);
      const size_t offset = pick(crop_rng);
      for (size_t i = 0; i < needed; ++i) {
        crop[i] = source[(offset + i) % source.size()];
      }
    }
    const std::vector<double> calibrated = ApplyLevel(
        crop, scenario.noises[j].level_db_spl, config.active_region);
    for (size_t d = 0; d < num_devices; ++d) {
      AddAt(buffers[d], -static_cast<int64_t>(rir_len),
            FftConvolve(calibrated, rirs[1 + j][d].samples));
    }
  }

  std::vector<DeviceWaveform> out(num_devices);
  for (size_t d = 0; d < num_devices; ++d) {
    Rng jitter_rng(DeriveSeed(rng_seed, "render.jitter", d));
    const double jitter = SampleTruncatedGaussian(
        jitter_rng, config.jitter_sigma, config.jitter_limit);
    const int64_t shift = std::clamp<int64_t>(
        static_cast<int64_t>(std::llround(jitter * kSampleRate)), -margin,
        margin);
    DeviceWaveform& w = out[d];
    w.device_index = static_cast<int>(d);
    w.applied_jitter = static_cast<double>(shift) / kSampleRate;
    const int64_t begin = margin + shift;
    w.samples.assign(buffers[d].begin() + begin,
                     buffers[d].begin() + begin + window);
    if (config.self_noise_db.has_value()) {
      Rng noise_rng(DeriveSeed(rng_seed, "render.self_noise", d));
      std::normal_distribution<double> normal(
          0.0, LevelToRms(*config.self_noise_db));
      for (double& v : w.samples) v += normal(noise_rng);
    }
  }
  return out;
}

}  // namespace devarb
