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

#include "devarb/acoustics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "devarb/error.h"

namespace devarb {

namespace {

constexpr int kTaps = 2 * kSincHalfTaps + 1;
constexpr double kWindowHalfWidth = kTaps / 2.0;
constexpr double kPi = std::numbers::pi;

struct KernelTables {
  std::array<double, kTaps> window_cos{};
  std::array<double, kTaps> window_sin{};
  std::array<double, kTaps> sign{};
  std::array<double, kTaps> offset{};

  KernelTables() {
    for (int i = 0; i < kTaps; ++i) {
      const int m = i - kSincHalfTaps;
      window_cos[i] = std::cos(kPi * m / kWindowHalfWidth);
      window_sin[i] = std::sin(kPi * m / kWindowHalfWidth);
      sign[i] = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^(m+1)
      offset[i] = m;
    }
  }
};

const KernelTables& Tables() {
  static const KernelTables tables;
  return tables;
}

void CheckInside(const RoomSpec& room, const Point3& p, const char* what) {
  if (!room.Contains(p)) {
    throw UsageError(std::string(what) + " must be strictly inside the room");
  }
}

}  // namespace

double Rir::Energy() const {
  double e = 0.0;
  for (double v : samples) e += v * v;
  return e;
}

const DirectivityModel& DefaultDirectivity() {
  static const Omnidirectional omni;
  return omni;
}

AbsorptionParams AbsorptionFromRt60(const RoomSpec& room, double min_rt60) {
  if (!(room.rt60 >= min_rt60) || !std::isfinite(room.rt60)) {
    throw UsageError("rt60 " + std::to_string(room.rt60) +
                     " s is below the calibratable minimum");
  }
  const double v = room.Volume();
  const double s = room.SurfaceArea();
  if (!(v > 0.0 && s > 0.0)) throw UsageError("degenerate room");
  const double retained = std::exp(-0.161 * v / (s * room.rt60));  // 1 - alpha
  if (!(retained > 0.0)) {
    throw NumericError("rt60 too short: absorption coefficient reaches 1");
  }
  return {std::sqrt(retained), room.rt60};
}

RirCutoff RirCutoff::ForRoom(const RoomSpec& room, bool anechoic) {
  RirCutoff c;
  c.max_time = (anechoic ? 0.0 : room.rt60) + kRirTailMargin;
  if (anechoic) c.max_order = 0;
  return c;
}

void ForEachImageSource(
    const RoomSpec& room, const Point3& source, const Point3& mic,
    const RirCutoff& cutoff,
    const std::function<void(const ImageSource&, double)>& fn) {
  const double radius = cutoff.max_time * kSpeedOfSound;
  const double r2 = radius * radius;
  const double lx = room.length, ly = room.width, lz = room.height;
  const int max_order = cutoff.max_order;

  auto lattice_range = [](double mic_c, double src_c, double extent, double r,
                          int& lo, int& hi) {
    lo = static_cast<int>(std::ceil((mic_c - r - src_c) / (2.0 * extent)));
    hi = static_cast<int>(std::floor((mic_c + r - src_c) / (2.0 * extent)));
  };

  for (int qx = 0; qx <= 1; ++qx) {
    const double sx = (1 - 2 * qx) * source.x;
    int mx_lo, mx_hi;
    lattice_range(mic.x, sx, lx, radius, mx_lo, mx_hi);
    for (int mx = mx_lo; mx <= mx_hi; ++mx) {
      const int ox = std::abs(2 * mx - qx);
      if (max_order >= 0 && ox > max_order) continue;
      const double ix = sx + 2.0 * mx * lx;
      const double dx2 = (ix - mic.x) * (ix - mic.x);
      if (dx2 > r2) continue;
      const double ry = std::sqrt(r2 - dx2);
      for (int qy = 0; qy <= 1; ++qy) {
        const double sy = (1 - 2 * qy) * source.y;
        int my_lo, my_hi;
        lattice_range(mic.y, sy, ly, ry, my_lo, my_hi);
        for (int my = my_lo; my <= my_hi; ++my) {
          const int oy = std::abs(2 * my - qy);
          if (max_order >= 0 && ox + oy > max_order) continue;
          const double iy = sy + 2.0 * my * ly;
          const double dxy2 = dx2 + (iy - mic.y) * (iy - mic.y);
          if (dxy2 > r2) continue;
          const double rz = std::sqrt(r2 - dxy2);
          for (int qz = 0; qz <= 1; ++qz) {
            const double sz = (1 - 2 * qz) * source.z;
            int mz_lo, mz_hi;
            lattice_range(mic.z, sz, lz, rz, mz_lo, mz_hi);
            for (int mz = mz_lo; mz <= mz_hi; ++mz) {
              const int order = ox + oy + std::abs(2 * mz - qz);
              if (max_order >= 0 && order > max_order) continue;
              const double iz = sz + 2.0 * mz * lz;
              const double d2 = dxy2 + (iz - mic.z) * (iz - mic.z);
              if (d2 > r2) continue;
              fn(ImageSource{{ix, iy, iz}, order}, std::sqrt(d2));
            }
          }
        }
      }
    }
  }
}

std::vector<ImageSource> EnumerateImageSources(const RoomSpec& room,
                                               const Point3& source,
                                               const Point3& mic,
                                               const RirCutoff& cutoff) {
  std::vector<ImageSource> images;
  ForEachImageSource(room, source, mic, cutoff,
                     [&](const ImageSource& image, double) {
                       images.push_back(image);
                     });
  return images;
}

namespace {

// Exact windowed sinc at fractional offset frac in [-0.5, 0.5]:
// x = m - frac; sin(pi x) = (-1)^(m+1) sin(pi frac);
// cos(pi x / W) = cos(pi m / W) cos(pi frac / W) + sin(...) sin(...).
void ExactKernel(double frac, double* row) {
  const KernelTables& t = Tables();
  if (frac == 0.0) {
    std::fill_n(row, kTaps, 0.0);
    row[kSincHalfTaps] = 1.0;
    return;
  }
  const double sin_pf = std::sin(kPi * frac);
  const double wc = std::cos(kPi * frac / kWindowHalfWidth);
  const double ws = std::sin(kPi * frac / kWindowHalfWidth);
  for (int i = 0; i < kTaps; ++i) {
    const double x = t.offset[i] - frac;
    const double window =
        0.5 * (1.0 + t.window_cos[i] * wc + t.window_sin[i] * ws);
    row[i] = window * t.sign[i] * sin_pf / (kPi * x);
  }
}

// Kernel rows at kPhases + 1 evenly spaced fractional offsets; arrivals in
// between interpolate linearly, which stays within ~1e-7 of the exact kernel.
constexpr int kPhases = 2048;

const std::vector<double>& PhaseTable() {
  static const std::vector<double> table = [] {
    std::vector<double> t(static_cast<size_t>(kPhases + 1) * kTaps);
    for (int p = 0; p <= kPhases; ++p) {
      const double frac = static_cast<double>(p) / kPhases - 0.5;
      ExactKernel(p == kPhases / 2 ? 0.0 : frac, t.data() + p * kTaps);
    }
    return t;
  }();
  return table;
}

// Fixed trip count so the whole row vectorizes.
inline void AccumulateRow(double* __restrict dst, const double* __restrict row0,
                          const double* __restrict row1, double a0, double a1) {
  for (int i = 0; i < kTaps; ++i) dst[i] += a0 * row0[i] + a1 * row1[i];
}

}  // namespace

void AddFractionalImpulse(double delay_samples, double amplitude,
                          std::span<double> out) {
  // floor(x + 0.5) compiles to an inline rounding instruction, unlike round().
  const double center = std::floor(delay_samples + 0.5);
  const double frac = delay_samples - center;  // in [-0.5, 0.5)
  const int64_t k0 = static_cast<int64_t>(center);
  const int64_t n = static_cast<int64_t>(out.size());
  const int64_t first = k0 - kSincHalfTaps;
  const int i_lo = static_cast<int>(std::max<int64_t>(0, -first));
  const int i_hi = static_cast<int>(std::min<int64_t>(kTaps, n - first));
  if (i_lo >= i_hi) return;
  double* dst = out.data() + first;

  const double u = (frac + 0.5) * kPhases;
  int phase = static_cast<int>(u);
  if (phase >= kPhases) phase = kPhases - 1;
  const double t = u - phase;
  const double* row0 = PhaseTable().data() + phase * kTaps;
  const double* row1 = row0 + kTaps;
  const double a0 = amplitude * (1.0 - t);
  const double a1 = amplitude * t;
  if (i_lo == 0 && i_hi == kTaps) {
    AccumulateRow(dst, row0, row1, a0, a1);
  } else {
    for (int i = i_lo; i < i_hi; ++i) dst[i] += a0 * row0[i] + a1 * row1[i];
  }
}

Rir SimulateRir(const RoomSpec& room, const Point3& source, const Point3& mic,
                const AbsorptionParams& absorption,
                const DirectivityModel& directivity, const RirCutoff& cutoff) {
  CheckInside(room, source, "source");
  CheckInside(room, mic, "microphone");
  if (Distance(source, mic) < 1e-3) {
    throw UsageError("source and microphone coincide");
  }
  if (!(absorption.beta >= 0.0 && absorption.beta < 1.0)) {
    throw UsageError("reflection coefficient must lie in [0, 1)");
  }
  if (!(cutoff.max_time > 0.0)) throw UsageError("cutoff time must be > 0");

  Rir rir;
  rir.sample_rate = kSampleRate;
  rir.samples.assign(
      static_cast<size_t>(std::ceil(cutoff.max_time * kSampleRate)), 0.0);

  std::vector<double> beta_pow{1.0};
  const bool fixed_response = directivity.DirectionIndependent();
  const std::vector<double> shared_response =
      fixed_response ? directivity.Response({1.0, 0.0, 0.0})
                     : std::vector<double>{};
  const double samples_per_meter = kSampleRate / kSpeedOfSound;
  int64_t count = 0;

  ForEachImageSource(
      room, source, mic, cutoff, [&](const ImageSource& image, double dist) {
        ++count;
        while (static_cast<int>(beta_pow.size()) <= image.order) {
          beta_pow.push_back(beta_pow.back() * absorption.beta);
        }
        const double gain = beta_pow[image.order] / dist;
        if (gain == 0.0) return;
        const double delay = dist * samples_per_meter;
        std::vector<double> local;
        const std::vector<double>* response = &shared_response;
        if (!fixed_response) {
          const Point3 dir{(image.position.x - mic.x) / dist,
                           (image.position.y - mic.y) / dist,
                           (image.position.z - mic.z) / dist};
          local = directivity.Response(dir);
          response = &local;
        }
        for (size_t tap = 0; tap < response->size(); ++tap) {
          const double a = gain * (*response)[tap];
          if (a != 0.0) {
            AddFractionalImpulse(delay + static_cast<double>(tap), a,
                                 rir.samples);
          }
        }
      });
  if (count == 0) throw UsageError("cutoff admits no image sources");
  return rir;
}

std::vector<double> ImageEnergyHistogram(const RoomSpec& room,
                                         const Point3& source,
                                         const Point3& mic, double beta,
                                         const RirCutoff& cutoff) {
  std::vector<double> hist(
      static_cast<size_t>(std::ceil(cutoff.max_time * kSampleRate)), 0.0);
  std::vector<double> energy_pow{1.0};
  const double beta2 = beta * beta;
  const double samples_per_meter = kSampleRate / kSpeedOfSound;
  ForEachImageSource(
      room, source, mic, cutoff, [&](const ImageSource& image, double dist) {
        while (static_cast<int>(energy_pow.size()) <= image.order) {
          energy_pow.push_back(energy_pow.back() * beta2);
        }
        const size_t bin = static_cast<size_t>(dist * samples_per_meter);
        if (bin < hist.size()) {
          hist[bin] += energy_pow[image.order] / (dist * dist);
        }
      });
  return hist;
}

namespace {

// Fixed probe pairs, as fractions of the room extents.
constexpr std::array<std::array<double, 6>, 3> kProbePairs{{
    {0.31, 0.42, 0.55, 0.72, 0.63, 0.28},
    {0.18, 0.77, 0.35, 0.64, 0.22, 0.61},
    {0.83, 0.36, 0.47, 0.29, 0.58, 0.74},
}};

double ProbeRt60(const RoomSpec& room, double beta, double max_time) {
  RirCutoff cutoff{max_time, -1};
  std::vector<double> total;
  for (const auto& f : kProbePairs) {
    const Point3 src{f[0] * room.length, f[1] * room.width, f[2] * room.height};
    const Point3 mic{f[3] * room.length, f[4] * room.width, f[5] * room.height};
    std::vector<double> h = ImageEnergyHistogram(room, src, mic, beta, cutoff);
    if (total.empty()) total.assign(h.size(), 0.0);
    for (size_t i = 0; i < h.size(); ++i) total[i] += h[i];
  }
  for (double& v : total) v = std::sqrt(v);
  return MeasureRt60(total, kSampleRate);
}

}  // namespace

AbsorptionParams CalibrateAbsorption(const RoomSpec& room,
                                     const CalibrationOptions& options) {
  AbsorptionParams params = AbsorptionFromRt60(room, options.min_rt60);
  const double target = room.rt60;
  const double max_time = options.probe_time_factor * target + kRirTailMargin;
  // Decay rate scales with -ln(beta), so T30 scales with 1 / -ln(beta).
  double log_beta = std::log(params.beta);
  for (int it = 0; it < options.max_iterations; ++it) {
    double measured;
    try {
      measured = ProbeRt60(room, std::exp(log_beta), max_time);
    } catch (const DataError&) {
      break;  // decay too short to measure; keep the current estimate
    }
    const double ratio = measured / target;
    if (std::abs(ratio - 1.0) <= options.tolerance) break;
    log_beta *= ratio;
  }
  params.beta = std::exp(log_beta);
  return params;
}

void HighpassRir(Rir& rir, double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || 2.0 * cutoff_hz >= rir.sample_rate) {
    throw UsageError("high-pass cutoff must lie in (0, fs/2)");
  }
  // Second-order Butterworth via the bilinear transform.
  const double k = std::tan(kPi * cutoff_hz / rir.sample_rate);
  const double q = std::numbers::sqrt2 / 2.0;
  const double norm = 1.0 / (1.0 + k / q + k * k);
  const double b0 = norm, b1 = -2.0 * norm, b2 = norm;
  const double a1 = 2.0 * (k * k - 1.0) * norm;
  const double a2 = (1.0 - k / q + k * k) * norm;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : rir.samples) {
    const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

Rir SimulateRoomRir(const RoomSpec& room, const Point3& source,
                    const Point3& mic, const AbsorptionParams& absorption,
                    bool anechoic, const DirectivityModel& directivity) {
  Rir rir = SimulateRir(room, source, mic, absorption, directivity,
                        RirCutoff::ForRoom(room, anechoic));
  if (!anechoic) HighpassRir(rir, kRirHighpassHz);
  return rir;
}

Rir SimulateRir(const RoomSpec& room, const Point3& source, const Point3& mic,
                bool anechoic) {
  const AbsorptionParams absorption =
      anechoic ? AbsorptionParams{0.0, 0.0} : CalibrateAbsorption(room);
  return SimulateRoomRir(room, source, mic, absorption, anechoic,
                         DefaultDirectivity());
}

double MeasureRt60(const Rir& rir) {
  return MeasureRt60(rir.samples, rir.sample_rate);
}

double MeasureRt60(std::span<const double> samples, int sample_rate) {
  const size_t n = samples.size();
  std::vector<double> edc(n);
  double acc = 0.0;
  for (size_t i = n; i-- > 0;) {
    acc += samples[i] * samples[i];
    edc[i] = acc;
  }
  if (n == 0 || !(acc > 0.0)) throw DataError("RIR has no energy");
  const double total = acc;
  auto level_db = [&](size_t i) { return 10.0 * std::log10(edc[i] / total); };

  size_t start = n, stop = n;
  for (size_t i = 0; i < n; ++i) {
    if (edc[i] <= 0.0) break;
    const double db = level_db(i);
    if (start == n && db <= -5.0) start = i;
    if (db <= -35.0) {
      stop = i;
      break;
    }
  }
  const size_t min_span = static_cast<size_t>(0.005 * sample_rate);
  if (start == n || stop == n || stop - start < min_span) {
    throw DataError("RIR decay does not cover the -5 to -35 dB fit range");
  }
  // Least squares on (t, level) over [start, stop].
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double m = static_cast<double>(stop - start + 1);
  for (size_t i = start; i <= stop; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double l = level_db(i);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
  }
  const double slope = (m * stl - st * sl) / (m * stt - st * st);
  if (!(slope < 0.0)) throw DataError("energy decay curve is not decaying");
  return -60.0 / slope;
}

}  // namespace devarb
