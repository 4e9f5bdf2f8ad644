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

#include "devarb/features.h"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "devarb/dsp.h"
#include "devarb/error.h"
#include "devarb/hash.h"

namespace devarb {

nlohmann::json LfbeConfigJson(const LfbeConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"input_samples", c.input_samples},
          {"frame_length", c.frame_length}, {"frame_shift", c.frame_shift},
          {"fft_size", c.fft_size}, {"num_bands", c.num_bands},
          {"low_hz", c.low_hz}, {"high_hz", c.high_hz},
          {"log_floor", c.log_floor}, {"window", "hann"},
          {"mel", "htk"}, {"padding", "reflect"}};
}

std::string LfbeConfig::Hash() const {
  return HashHex(LfbeConfigJson(*this).dump());
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(const LfbeConfig& c) {
  const int bins = c.fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(c.sample_rate) / c.fft_size;
  const double mel_lo = HzToMel(c.low_hz);
  const double mel_hi = HzToMel(c.high_hz);
  std::vector<double> edges(c.num_bands + 2);
  for (int i = 0; i < c.num_bands + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (c.num_bands + 1));
  }
  for (int b = 0; b < c.num_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    const double area_norm = 2.0 / (hi - lo);
    centers_.push_back(mid);
    std::vector<double> w;
    int first = -1;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double v = 0.0;
      if (f > lo && f <= mid) {
        v = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        v = (hi - f) / (hi - mid);
      }
      if (v > 0.0) {
        if (first < 0) first = k;
        w.resize(k - first + 1, 0.0);
        w[k - first] = v * area_norm;
      }
    }
    if (first < 0) throw UsageError("mel band without FFT bins");
    first_bin_.push_back(first);
    weights_.push_back(std::move(w));
  }
}

void MelFilterbank::Apply(std::span<const double> power,
                          std::span<double> bands) const {
  for (int b = 0; b < num_bands(); ++b) {
    const auto& w = weights_[b];
    double e = 0.0;
    for (size_t i = 0; i < w.size(); ++i) e += w[i] * power[first_bin_[b] + i];
    bands[b] = e;
  }
}

LfbeExtractor::LfbeExtractor(const LfbeConfig& config)
    : config_(config), filterbank_(config) {
  if (config.frame_length > config.fft_size) {
    throw UsageError("frame length exceeds FFT size");
  }
  // Periodic Hann.
  window_.resize(config.frame_length);
  for (int n = 0; n < config.frame_length; ++n) {
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n /
                                      config.frame_length);
  }
}

LfbeImage LfbeExtractor::Compute(std::span<const double> waveform) const {
  const LfbeConfig& c = config_;
  if (static_cast<int>(waveform.size()) != c.input_samples) {
    throw UsageError("LFBE input must have " + std::to_string(c.input_samples) +
                     " samples, got " + std::to_string(waveform.size()));
  }
  const int pad = c.frame_length / 2;
  const int n = c.input_samples;
  // Reflect without repeating the edge sample: x[-k] = x[k].
  std::vector<double> padded(n + 2 * pad);
  for (int i = 0; i < n + 2 * pad; ++i) {
    int src = i - pad;
    if (src < 0) src = -src;
    if (src >= n) src = 2 * (n - 1) - src;
    padded[i] = waveform[src];
  }
  LfbeImage image;
  image.frames = c.NumFrames();
  image.bands = c.num_bands;
  image.values.resize(static_cast<size_t>(image.frames) * image.bands);
  const RealFft fft(c.fft_size);
  std::vector<double> frame(c.frame_length);
  std::vector<std::complex<double>> spectrum;
  std::vector<double> power(fft.bins());
  std::vector<double> bands(c.num_bands);
  for (int t = 0; t < image.frames; ++t) {
    const double* src = padded.data() + t * c.frame_shift;
    for (int i = 0; i < c.frame_length; ++i) frame[i] = src[i] * window_[i];
    fft.Forward(frame, spectrum);
    for (size_t k = 0; k < spectrum.size(); ++k) power[k] = std::norm(spectrum[k]);
    filterbank_.Apply(power, bands);
    for (int b = 0; b < c.num_bands; ++b) {
      image.values[t * c.num_bands + b] =
          static_cast<float>(std::log(bands[b] + c.log_floor));
    }
  }
  return image;
}

LfbeImage ComputeLfbe(std::span<const double> waveform,
                      const LfbeConfig& config) {
  return LfbeExtractor(config).Compute(waveform);
}

void WriteLfbe(const std::string& path, const LfbeImage& image,
               const std::string& config_hash) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(image.values.data()),
              static_cast<std::streamsize>(image.values.size() * sizeof(float)));
    if (!out) throw DataError("write failed: " + path);
  }
  std::ofstream sidecar(path + ".json", std::ios::binary);
  if (!sidecar) throw DataError("cannot write " + path + ".json");
  nlohmann::json j = {{"shape", {image.frames, image.bands}},
                      {"dtype", "float32"},
                      {"byte_order", "little"},
                      {"layout", "row-major frames x bands"},
                      {"config_hash", config_hash}};
  sidecar << j.dump(2) << '\n';
}

LfbeImage ReadLfbe(const std::string& path) {
  std::ifstream sidecar(path + ".json", std::ios::binary);
  if (!sidecar) throw DataError("missing sidecar " + path + ".json");
  nlohmann::json j;
  try {
    sidecar >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ".json: " + e.what());
  }
  if (j.value("dtype", "") != "float32") throw DataError(path + ": bad dtype");
  LfbeImage image;
  image.frames = j.at("shape").at(0).get<int>();
  image.bands = j.at("shape").at(1).get<int>();
  image.values.resize(static_cast<size_t>(image.frames) * image.bands);
  std::ifstream in(path, std::ios::binary);
  if (!in || !in.read(reinterpret_cast<char*>(image.values.data()),
                      static_cast<std::streamsize>(image.values.size() *
                                                   sizeof(float)))) {
    throw DataError("cannot read " + path);
  }
  return image;
}

}  // namespace devarb
