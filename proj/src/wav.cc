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

#include "devarb/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "devarb/error.h"

namespace devarb {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

namespace {

struct Layout {
  WavInfo info;
  int64_t data_offset = 0;
  int64_t data_bytes = 0;
};

uint32_t U32(const char* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

uint16_t U16(const char* p) {
  uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

Layout ParseLayout(std::ifstream& in, const std::string& path) {
  char header[12];
  if (!in.read(header, 12) || std::memcmp(header, "RIFF", 4) != 0 ||
      std::memcmp(header + 8, "WAVE", 4) != 0) {
    throw DataError(path + ": not a RIFF/WAVE file");
  }
  Layout layout;
  bool have_fmt = false;
  for (;;) {
    char chunk[8];
    if (!in.read(chunk, 8)) throw DataError(path + ": no data chunk");
    const uint32_t size = U32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      std::vector<char> fmt(size);
      if (size < 16 || !in.read(fmt.data(), size)) {
        throw DataError(path + ": bad fmt chunk");
      }
      uint16_t format = U16(fmt.data());
      layout.info.channels = U16(fmt.data() + 2);
      layout.info.sample_rate = static_cast<int>(U32(fmt.data() + 4));
      layout.info.bits_per_sample = U16(fmt.data() + 14);
      if (format == 0xFFFE && size >= 26) format = U16(fmt.data() + 24);
      if (format == 3) {
        layout.info.is_float = true;
      } else if (format != 1) {
        throw DataError(path + ": unsupported WAV format " +
                        std::to_string(format));
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw DataError(path + ": data before fmt");
      layout.data_offset = static_cast<int64_t>(in.tellg());
      layout.data_bytes = size;
      break;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
  }
  const int bits = layout.info.bits_per_sample;
  const bool supported = (layout.info.is_float && bits == 32) ||
                         (!layout.info.is_float && bits == 16);
  if (!supported || layout.info.channels < 1) {
    throw DataError(path + ": only 16-bit PCM and 32-bit float are supported");
  }
  const int64_t frame_bytes = layout.info.channels * (bits / 8);
  layout.info.frames = layout.data_bytes / frame_bytes;
  return layout;
}

std::vector<double> DecodeFrames(std::ifstream& in, const Layout& layout,
                                 int64_t offset, int64_t count,
                                 const std::string& path) {
  const int bytes = layout.info.bits_per_sample / 8;
  const int64_t frame_bytes = layout.info.channels * bytes;
  in.seekg(layout.data_offset + offset * frame_bytes);
  std::vector<char> raw(static_cast<size_t>(count * frame_bytes));
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
    throw DataError(path + ": truncated data chunk");
  }
  std::vector<double> out(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    const char* p = raw.data() + i * frame_bytes;
    if (layout.info.is_float) {
      float f;
      std::memcpy(&f, p, 4);
      out[i] = f;
    } else {
      int16_t s;
      std::memcpy(&s, p, 2);
      out[i] = s / 32768.0;
    }
  }
  return out;
}

void WriteHeader(std::ofstream& out, int sample_rate, int bits, bool is_float,
                 uint32_t data_bytes) {
  auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
  out.write("RIFF", 4);
  u32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  u32(16);
  u16(is_float ? 3 : 1);
  u16(1);
  u32(static_cast<uint32_t>(sample_rate));
  u32(static_cast<uint32_t>(sample_rate * bits / 8));
  u16(static_cast<uint16_t>(bits / 8));
  u16(static_cast<uint16_t>(bits));
  out.write("data", 4);
  u32(data_bytes);
}

}  // namespace

WavInfo ReadWavInfo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ParseLayout(in, path).info;
}

WavData ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const Layout layout = ParseLayout(in, path);
  WavData data;
  data.info = layout.info;
  data.samples = DecodeFrames(in, layout, 0, layout.info.frames, path);
  return data;
}

std::vector<double> ReadWavRange(const std::string& path, int64_t offset,
                                 int64_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const Layout layout = ParseLayout(in, path);
  if (offset < 0 || count < 0 || offset + count > layout.info.frames) {
    throw DataError(path + ": requested range exceeds the recording");
  }
  return DecodeFrames(in, layout, offset, count, path);
}

void WriteWavFloat32(const std::string& path, std::span<const double> samples,
                     int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteHeader(out, sample_rate, 32, true,
              static_cast<uint32_t>(samples.size() * 4));
  std::vector<float> buf(samples.begin(), samples.end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 4));
  if (!out) throw DataError("write failed: " + path);
}

void WriteWavPcm16(const std::string& path, std::span<const double> samples,
                   int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteHeader(out, sample_rate, 16, false,
              static_cast<uint32_t>(samples.size() * 2));
  std::vector<int16_t> buf(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const double v = std::clamp(std::round(samples[i] * 32768.0), -32768.0,
                                32767.0);
    buf[i] = static_cast<int16_t>(v);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 2));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace devarb
