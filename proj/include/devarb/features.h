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

#ifndef DEVARB_FEATURES_H_
#define DEVARB_FEATURES_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace devarb {

struct LfbeConfig {
  int sample_rate = 16000;
  int input_samples = 32000;
  int frame_length = 400;  // 25 ms
  int frame_shift = 160;   // 10 ms
  int fft_size = 512;
  int num_bands = 64;
  double low_hz = 20.0;
  double high_hz = 8000.0;
  double log_floor = 1e-10;

  // floor(input / shift) + 1 after reflecting frame_length / 2 samples at
  // each end.
  int NumFrames() const { return input_samples / frame_shift + 1; }
  std::string Hash() const;
};

nlohmann::json LfbeConfigJson(const LfbeConfig& config);

// Row-major frames x bands, natural-log energies.
struct LfbeImage {
  int frames = 0;
  int bands = 0;
  std::vector<float> values;

  float at(int frame, int band) const { return values[frame * bands + band]; }
};

double HzToMel(double hz);  // HTK: 2595 log10(1 + f / 700)
double MelToHz(double mel);

// Triangular filters on HTK-mel-spaced edges, each scaled to unit area
// (2 / (upper - lower) in Hz), sampled at the FFT bin frequencies.
class MelFilterbank {
 public:
  explicit MelFilterbank(const LfbeConfig& config);

  int num_bands() const { return static_cast<int>(centers_.size()); }
  const std::vector<double>& centers_hz() const { return centers_; }
  // weights for band b over FFT bins [first_bin(b), first_bin(b) + size).
  const std::vector<double>& weights(int band) const { return weights_[band]; }
  int first_bin(int band) const { return first_bin_[band]; }

  void Apply(std::span<const double> power, std::span<double> bands) const;

 private:
  std::vector<double> centers_;
  std::vector<std::vector<double>> weights_;
  std::vector<int> first_bin_;
};

class LfbeExtractor {
 public:
  explicit LfbeExtractor(const LfbeConfig& config = {});

  const LfbeConfig& config() const { return config_; }
  const MelFilterbank& filterbank() const { return filterbank_; }

  LfbeImage Compute(std::span<const double> waveform) const;

 private:
  LfbeConfig config_;
  std::vector<double> window_;
  MelFilterbank filterbank_;
};

LfbeImage ComputeLfbe(std::span<const double> waveform,
                      const LfbeConfig& config = {});

// Little-endian float32, row-major, with a JSON sidecar at path + ".json".
void WriteLfbe(const std::string& path, const LfbeImage& image,
               const std::string& config_hash);
LfbeImage ReadLfbe(const std::string& path);

}  // namespace devarb

#endif  // DEVARB_FEATURES_H_
