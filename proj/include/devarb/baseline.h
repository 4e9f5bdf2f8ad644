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

#ifndef DEVARB_BASELINE_H_
#define DEVARB_BASELINE_H_

#include <span>
#include <vector>

#include "devarb/audio.h"

namespace devarb {

struct BandpassFilter {
  std::vector<double> taps;
  double low_hz = 0.0;
  double high_hz = 0.0;
  int sample_rate = 0;

  // Magnitude of the DTFT at `hz`.
  double Response(double hz) const;
};

// Linear-phase FIR: Hamming-windowed difference of two ideal low-passes.
BandpassFilter DesignBandpass(double low_hz = 1500.0, double high_hz = 6500.0,
                              int num_taps = 257, int sample_rate = 16000);

const BandpassFilter& DefaultBandpass();

double FilteredEnergy(std::span<const double> waveform,
                      const BandpassFilter& filter);

// Index of the device with the largest in-band energy; ties pick the lowest
// index.
int BaselineArbitrate(const std::vector<std::vector<double>>& waveforms,
                      const BandpassFilter& filter = DefaultBandpass());
int BaselineArbitrate(const std::vector<DeviceWaveform>& waveforms,
                      const BandpassFilter& filter = DefaultBandpass());

}  // namespace devarb

#endif  // DEVARB_BASELINE_H_
