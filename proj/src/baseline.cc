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

#include "devarb/baseline.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "devarb/dsp.h"
#include "devarb/error.h"

namespace devarb {

namespace {

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

double BandpassFilter::Response(double hz) const {
  const double w = 2.0 * std::numbers::pi * hz / sample_rate;
  std::complex<double> acc = 0.0;
  for (size_t n = 0; n < taps.size(); ++n) {
    acc += taps[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(acc);
}

BandpassFilter DesignBandpass(double low_hz, double high_hz, int num_taps,
                              int sample_rate) {
  if (num_taps < 3 || num_taps % 2 == 0) {
    throw UsageError("bandpass needs an odd tap count >= 3");
  }
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate / 2.0)) {
    throw UsageError("bandpass edges must satisfy 0 < low < high < fs/2");
  }
  BandpassFilter f;
  f.low_hz = low_hz;
  f.high_hz = high_hz;
  f.sample_rate = sample_rate;
  f.taps.resize(num_taps);
  const double f1 = low_hz / sample_rate;
  const double f2 = high_hz / sample_rate;
  const int mid = num_taps / 2;
  // Computed on one half and mirrored so the phase is exactly linear.
  for (int n = 0; n <= mid; ++n) {
    const double m = n - mid;
    const double ideal = 2.0 * f2 * Sinc(2.0 * f2 * m) - 2.0 * f1 * Sinc(2.0 * f1 * m);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (num_taps - 1));
    f.taps[n] = ideal * hamming;
    f.taps[num_taps - 1 - n] = f.taps[n];
  }
  return f;
}

const BandpassFilter& DefaultBandpass() {
  static const BandpassFilter filter = DesignBandpass();
  return filter;
}

double FilteredEnergy(std::span<const double> waveform,
                      const BandpassFilter& filter) {
  const std::vector<double> y = FftConvolve(waveform, filter.taps);
  double e = 0.0;
  for (double v : y) e += v * v;
  return e;
}

int BaselineArbitrate(const std::vector<std::vector<double>>& waveforms,
                      const BandpassFilter& filter) {
  if (waveforms.empty()) throw UsageError("no device waveforms");
  const size_t len = waveforms[0].size();
  int best = 0;
  double best_energy = -1.0;
  for (size_t k = 0; k < waveforms.size(); ++k) {
    if (waveforms[k].size() != len) {
      throw UsageError("device waveforms differ in length");
    }
    const double e = FilteredEnergy(waveforms[k], filter);
    if (e > best_energy) {
      best_energy = e;
      best = static_cast<int>(k);
    }
  }
  return best;
}

int BaselineArbitrate(const std::vector<DeviceWaveform>& waveforms,
                      const BandpassFilter& filter) {
  std::vector<std::vector<double>> raw;
  raw.reserve(waveforms.size());
  for (const DeviceWaveform& w : waveforms) raw.push_back(w.samples);
  return BaselineArbitrate(raw, filter);
}

}  // namespace devarb
