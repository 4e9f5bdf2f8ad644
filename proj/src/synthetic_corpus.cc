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

#include "devarb/synthetic_corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>

#include "devarb/acoustics.h"
#include "devarb/error.h"
#include "devarb/rng.h"
#include "devarb/wav.h"

namespace devarb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = kSampleRate;

// Two-pole resonator. Vocal-tract formants use unit gain at DC, as in a
// cascade formant synthesizer, so the cascade keeps the natural downward
// spectral tilt; the frication filter uses unit gain at its centre.
class Resonator {
 public:
  void Set(double hz, double bandwidth, bool unit_dc = false) {
    const double r = std::exp(-kPi * bandwidth / kFs);
    const double theta = 2.0 * kPi * hz / kFs;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    if (unit_dc) {
      gain_ = 1.0 - a1_ - a2_;
      return;
    }
    // |1 - a1 z^-1 - a2 z^-2| at z = e^{i theta}.
    const double re = 1.0 - a1_ * std::cos(theta) - a2_ * std::cos(2 * theta);
    const double im = a1_ * std::sin(theta) + a2_ * std::sin(2 * theta);
    gain_ = std::sqrt(re * re + im * im);
  }
  double Step(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, gain_ = 1, y1_ = 0, y2_ = 0;
};

struct Phone {
  double duration;              // s, before speaker scaling
  std::array<double, 3> formants;
  double voiced;                // amplitude of the voiced path
  double frication;             // amplitude of the noise path
  double frication_hz;          // centre of the noise resonance
};

// s - eh - v - schwa - n
constexpr std::array<Phone, 5> kSeven{{
    {0.15, {400, 1600, 2600}, 0.0, 0.55, 5600},
    {0.14, {580, 1800, 2550}, 1.0, 0.0, 0},
    {0.06, {320, 1450, 2400}, 0.35, 0.12, 3200},
    {0.09, {500, 1500, 2500}, 0.85, 0.0, 0},
    {0.13, {280, 1650, 2600}, 0.35, 0.0, 0},
}};

std::vector<double> Normalize(std::vector<double> x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
  return x;
}

double Smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

std::string SpeakerId(uint64_t seed, int index) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x",
                static_cast<unsigned>(DeriveSeed(seed, "corpus.speaker_id",
                                                 index) & 0xffffffffu));
  return buf;
}

// Kellet's economy pink filter over white noise.
std::vector<double> PinkNoise(Rng& rng, size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> out(n);
  double b0 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double w = normal(rng);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    out[i] = b0 + b1 + b2 + w * 0.1848;
  }
  return out;
}

std::vector<double> WhiteNoise(Rng& rng, size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

std::vector<double> RunningTap(Rng& rng, size_t n) {
  std::vector<double> white = WhiteNoise(rng, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Resonator body, hiss;
  body.Set(1100, 900);
  hiss.Set(3400, 2500);
  std::array<double, 3> rate{0.31 + 0.2 * u(rng), 1.7 + u(rng), 4.2 + u(rng)};
  std::vector<double> out(n);
  // Bubbles: short chirping resonances at random times.
  double bubble_phase = 0, bubble_hz = 0, bubble_amp = 0;
  for (size_t i = 0; i < n; ++i) {
    const double t = i / kFs;
    const double am = 1.0 + 0.25 * std::sin(2 * kPi * rate[0] * t) +
                      0.15 * std::sin(2 * kPi * rate[1] * t) +
                      0.1 * std::sin(2 * kPi * rate[2] * t);
    if (u(rng) < 25.0 / kFs) {
      bubble_hz = 600 + 1800 * u(rng);
      bubble_amp = 0.6 + 0.8 * u(rng);
    }
    bubble_hz *= 1.00004;
    bubble_amp *= 0.9985;
    bubble_phase += 2 * kPi * bubble_hz / kFs;
    out[i] = am * (body.Step(white[i]) + 0.6 * hiss.Step(white[i])) +
             bubble_amp * std::sin(bubble_phase);
  }
  return out;
}

std::vector<double> Dishes(Rng& rng, size_t n) {
  std::vector<double> out = PinkNoise(rng, n);
  for (double& v : out) v *= 0.05;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> gap(2.5);
  double t = gap(rng);
  while (t * kFs < n) {
    const size_t start = static_cast<size_t>(t * kFs);
    const double amp = 0.2 + u(rng);
    for (int p = 0; p < 3; ++p) {
      const double hz = 1800 + 5200 * u(rng);
      const double decay = 0.02 + 0.08 * u(rng);
      const size_t len = std::min(n - start, static_cast<size_t>(6 * decay * kFs));
      for (size_t k = 0; k < len; ++k) {
        const double tk = k / kFs;
        out[start + k] += amp / 3 * std::exp(-tk / decay) *
                          std::sin(2 * kPi * hz * tk);
      }
    }
    t += gap(rng);
  }
  return out;
}

std::vector<double> ExerciseBike(Rng& rng, size_t n) {
  std::vector<double> white = WhiteNoise(rng, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Resonator whoosh;
  whoosh.Set(700, 1200);
  const double cadence = 1.1 + 0.4 * u(rng);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = i / kFs;
    const double s = std::sin(kPi * cadence * t);
    const double env = 0.2 + s * s;
    out[i] = env * whoosh.Step(white[i]) +
             0.15 * std::sin(2 * kPi * 58 * t) +
             0.08 * std::sin(2 * kPi * 116 * t + 0.3);
    // A tick at the bottom of each stroke.
    const double frac = std::fmod(cadence * t, 1.0);
    if (frac < 0.004) out[i] += 0.5 * (u(rng) - 0.5);
  }
  return out;
}

std::vector<double> Miaowing(Rng& rng, size_t n) {
  std::vector<double> out = PinkNoise(rng, n);
  for (double& v : out) v *= 0.03;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t = 0.5 + u(rng);
  while (t * kFs < n) {
    const double dur = 0.5 + 0.6 * u(rng);
    const double f_lo = 450 + 200 * u(rng), f_hi = f_lo * (1.5 + 0.4 * u(rng));
    const size_t start = static_cast<size_t>(t * kFs);
    const size_t len = std::min(n - start, static_cast<size_t>(dur * kFs));
    Resonator formant;
    formant.Set(1500 + 800 * u(rng), 400);
    double phase = 0;
    for (size_t k = 0; k < len; ++k) {
      const double x = static_cast<double>(k) / len;
      const double f0 = f_lo + (f_hi - f_lo) * std::sin(kPi * x);
      phase += 2 * kPi * f0 / kFs;
      double src = 0;
      for (int h = 1; h <= 6; ++h) src += std::sin(h * phase) / h;
      const double env = std::sin(kPi * x);
      out[start + k] += 0.6 * env * (0.5 * src + formant.Step(src));
    }
    t += dur + 1.5 + 2.5 * u(rng);
  }
  return out;
}

}  // namespace

std::vector<double> SynthesizeKeyword(uint64_t speaker_seed,
                                      uint64_t take_seed) {
  Rng voice(DeriveSeed(speaker_seed, "corpus.voice", 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double f0_base = 90.0 + 170.0 * u(voice);
  const double tract = 0.85 + 0.35 * u(voice);  // formant scale
  const double tempo = 0.8 + 0.45 * u(voice);
  const double breath = 0.02 + 0.06 * u(voice);

  Rng take(DeriveSeed(take_seed, "corpus.take", 0));
  const double f0 = f0_base * (0.93 + 0.14 * u(take));
  const double stretch = tempo * (0.9 + 0.2 * u(take));
  std::vector<double> dur(kSeven.size());
  double total = 0;
  for (size_t p = 0; p < kSeven.size(); ++p) {
    dur[p] = kSeven[p].duration * stretch * (0.85 + 0.3 * u(take));
    total += dur[p];
  }
  const int n = kSampleRate;
  const double squeeze = std::min(1.0, 0.85 / total);
  total *= squeeze;
  const double onset = 0.05 + (0.95 - total - 0.05) * u(take);

  // Phone boundaries and centres in seconds.
  std::vector<double> starts(kSeven.size() + 1, onset);
  for (size_t p = 0; p < kSeven.size(); ++p) {
    starts[p + 1] = starts[p] + dur[p] * squeeze;
  }
  auto phone_at = [&](double t) {
    // Returns (index, position within phone in [0, 1]).
    for (size_t p = 0; p < kSeven.size(); ++p) {
      if (t < starts[p + 1]) {
        return std::pair<size_t, double>(
            p, (t - starts[p]) / (starts[p + 1] - starts[p]));
      }
    }
    return std::pair<size_t, double>(kSeven.size() - 1, 1.0);
  };

  std::normal_distribution<double> normal;
  std::array<Resonator, 3> tract_filters;
  Resonator fric;
  std::vector<double> out(n, 0.0);
  double phase = 0, glottal = 0;
  const double transition = 0.015;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double noise = normal(take);
    double sample = breath * 0.01 * noise;  // recording floor
    if (t >= onset && t < starts.back()) {
      auto [p, x] = phone_at(t);
      const size_t q = (x < 0.5) ? (p == 0 ? 0 : p - 1) : std::min(p + 1, kSeven.size() - 1);
      // Blend towards the neighbouring phone near the boundaries.
      const double edge = (x < 0.5 ? x : 1.0 - x) * (starts[p + 1] - starts[p]);
      const double w = 0.5 * (1.0 - Smoothstep(edge / transition));
      auto mix = [&](double a, double b) { return (1.0 - w) * a + w * b; };
      const Phone& a = kSeven[p];
      const Phone& b = kSeven[q];
      if (i % 80 == 0) {
        for (int k = 0; k < 3; ++k) {
          tract_filters[k].Set(tract * mix(a.formants[k], b.formants[k]),
                               60.0 + 40.0 * k, /*unit_dc=*/true);
        }
        const double fh = mix(a.frication_hz, b.frication_hz);
        fric.Set(std::max(fh, 1500.0) * std::sqrt(tract), 1800);
      }
      const double amp_env = Smoothstep((t - onset) / 0.02) *
                             Smoothstep((starts.back() - t) / 0.04);
      const double intonation = 1.0 + 0.08 * std::sin(kPi * (t - onset) / total);
      phase += f0 * intonation / kSampleRate;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      glottal = 0.92 * glottal + pulse + 0.02 * noise;
      double voiced = glottal;
      for (Resonator& r : tract_filters) voiced = r.Step(voiced);
      const double fricative = fric.Step(noise);
      // Mixed so that /s/ sits about 11 dB below the vowel and about 1% of
      // the energy lies above 6 kHz, close to long-term speech spectra.
      sample += amp_env * (mix(a.voiced, b.voiced) * voiced * 0.3 +
                           mix(a.frication, b.frication) * fricative * 0.12);
    } else {
      for (Resonator& r : tract_filters) r.Step(0.0);
      fric.Step(0.0);
    }
    out[i] = sample;
  }
  const double peak = 0.25 + 0.6 * u(take);
  return Normalize(std::move(out), peak);
}

SyntheticCorpusSummary WriteSyntheticGscv2(
    const std::string& root, const SyntheticCorpusOptions& options) {
  namespace fs = std::filesystem;
  if (options.num_utterances <= 0 || options.num_speakers <= 0) {
    throw UsageError("synthetic corpus needs utterances and speakers");
  }
  const fs::path base(root);
  fs::create_directories(base / "seven");
  fs::create_directories(base / "_background_noise_");

  SyntheticCorpusSummary summary;
  std::vector<int> takes(options.num_speakers, 0);
  Rng assign(DeriveSeed(options.seed, "corpus.assign", 0));
  std::uniform_int_distribution<int> pick(0, options.num_speakers - 1);
  for (int i = 0; i < options.num_utterances; ++i) {
    // Every speaker records at least once before repeats are drawn.
    const int speaker = i < options.num_speakers ? i : pick(assign);
    const int k = takes[speaker]++;
    const uint64_t speaker_seed =
        DeriveSeed(options.seed, "corpus.speaker", speaker);
    const std::vector<double> clip =
        SynthesizeKeyword(speaker_seed, DeriveSeed(speaker_seed, "take", k));
    const std::string name = SpeakerId(options.seed, speaker) + "_nohash_" +
                             std::to_string(k) + ".wav";
    WriteWavPcm16((base / "seven" / name).string(), clip, kSampleRate);
    ++summary.utterances;
  }

  struct Background {
    const char* name;
    std::function<std::vector<double>(Rng&, size_t)> make;
    double seconds;
  };
  const std::vector<Background> backgrounds{
      {"doing_the_dishes.wav", Dishes, options.dishes_seconds},
      {"dude_miaowing.wav", Miaowing, options.background_seconds},
      {"exercise_bike.wav", ExerciseBike, options.background_seconds},
      {"pink_noise.wav", PinkNoise, options.background_seconds},
      {"running_tap.wav", RunningTap, options.background_seconds},
      {"white_noise.wav", WhiteNoise, options.background_seconds},
  };
  for (size_t b = 0; b < backgrounds.size(); ++b) {
    Rng rng(DeriveSeed(options.seed, "corpus.background", b));
    const size_t n = static_cast<size_t>(backgrounds[b].seconds * kSampleRate);
    const std::vector<double> x =
        Normalize(backgrounds[b].make(rng, n), 0.7);
    const fs::path path = base / "_background_noise_" / backgrounds[b].name;
    WriteWavPcm16(path.string(), x, kSampleRate);
    summary.background_files.push_back(path.string());
  }
  return summary;
}

}  // namespace devarb
