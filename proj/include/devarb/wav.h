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

#ifndef DEVARB_WAV_H_
#define DEVARB_WAV_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace devarb {

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  int64_t frames = 0;
};

struct WavData {
  WavInfo info;
  std::vector<double> samples;  // first channel, scaled to [-1, 1)
};

// Reads 16-bit PCM or 32-bit float WAV.
WavData ReadWav(const std::string& path);
WavInfo ReadWavInfo(const std::string& path);

// Reads frames [offset, offset + count) of the first channel.
std::vector<double> ReadWavRange(const std::string& path, int64_t offset,
                                 int64_t count);

void WriteWavFloat32(const std::string& path, std::span<const double> samples,
                     int sample_rate);
void WriteWavPcm16(const std::string& path, std::span<const double> samples,
                   int sample_rate);

}  // namespace devarb

#endif  // DEVARB_WAV_H_
