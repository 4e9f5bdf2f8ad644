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

#ifndef DEVARB_ACOUSTICS_H_
#define DEVARB_ACOUSTICS_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "devarb/scenario.h"

namespace devarb {

inline constexpr double kSpeedOfSound = 343.0;  // m/s
inline constexpr int kSampleRate = 16000;       // Hz
inline constexpr double kRirTailMargin = 0.2;   // s beyond rt60
inline constexpr double kRirHighpassHz = 100.0;

// Half-width of the fractional-delay kernel: 2 * 40 + 1 = 81 taps.
inline constexpr int kSincHalfTaps = 40;

struct AbsorptionParams {
  double beta = 0.0;  // amplitude reflection coefficient shared by all walls
  double derived_from_rt60 = 0.0;
};

// Eyring: alpha = 1 - exp(-0.161 V / (S rt60)), beta = sqrt(1 - alpha).
AbsorptionParams AbsorptionFromRt60(const RoomSpec& room,
                                    double min_rt60 = 0.05);

struct CalibrationOptions {
  double min_rt60 = 0.05;
  double tolerance = 0.02;  // relative T30 error accepted
  int max_iterations = 6;
  // Probe histograms run to factor * rt60 + tail margin.
  double probe_time_factor = 1.5;
};

// Eyring gives the starting point. Rectangular rooms with uniform absorption
// decay more slowly than the diffuse-field estimate, since few reflections
// occur along the long axis. So beta is refined until the Schroeder T30 of a
// summed image-energy histogram over fixed probe pairs matches the target.
// The result depends on the room alone.
AbsorptionParams CalibrateAbsorption(const RoomSpec& room,
                                     const CalibrationOptions& options = {});

struct ImageSource {
  Point3 position;
  int order = 0;
};

struct Rir {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  size_t length() const { return samples.size(); }
  double Energy() const;
};

// Far-field response of a microphone to a plane wave from a direction.
class DirectivityModel {
 public:
  virtual ~DirectivityModel() = default;

  // Taps at the RIR sample rate, tap 0 aligned with the arrival time.
  // `direction` is the unit vector from the microphone toward the (image)
  // source.
  virtual std::vector<double> Response(const Point3& direction) const = 0;

  // When true, Response is evaluated once and reused for every arrival.
  virtual bool DirectionIndependent() const { return false; }
};

class Omnidirectional final : public DirectivityModel {
 public:
  std::vector<double> Response(const Point3&) const override { return {1.0}; }
  bool DirectionIndependent() const override { return true; }
};

const DirectivityModel& DefaultDirectivity();

struct RirCutoff {
  // Images whose travel time exceeds max_time are dropped; this also fixes
  // the RIR length at ceil(max_time * fs) samples.
  double max_time = 0.0;
  // Reflection-order limit; negative means unlimited.
  int max_order = -1;

  static RirCutoff ForRoom(const RoomSpec& room, bool anechoic = false);
};

// Calls fn(image, distance_to_mic) for every image within the cutoff, in a
// fixed lattice order.
void ForEachImageSource(
    const RoomSpec& room, const Point3& source, const Point3& mic,
    const RirCutoff& cutoff,
    const std::function<void(const ImageSource&, double)>& fn);

std::vector<ImageSource> EnumerateImageSources(const RoomSpec& room,
                                               const Point3& source,
                                               const Point3& mic,
                                               const RirCutoff& cutoff);

// Image-source RIR: every image adds beta^order / distance (distance in m, so a
// 1 m direct path has unit amplitude) at delay distance / c, placed with an
// 81-tap Hann-windowed sinc and shaped by the directivity response.
Rir SimulateRir(const RoomSpec& room, const Point3& source, const Point3& mic,
                const AbsorptionParams& absorption,
                const DirectivityModel& directivity, const RirCutoff& cutoff);

// Energy arrivals beta^(2 order) / d^2 binned per sample (floor of delay).
std::vector<double> ImageEnergyHistogram(const RoomSpec& room,
                                         const Point3& source,
                                         const Point3& mic, double beta,
                                         const RirCutoff& cutoff);

// In-place second-order Butterworth high-pass. Every image adds with the same
// sign, so the raw sum carries a slowly decaying DC and sub-100 Hz build-up
// that would dominate the measured decay.
void HighpassRir(Rir& rir, double cutoff_hz = kRirHighpassHz);

// The rendering path: image sum with the room's default cutoff, followed by
// the high-pass for reverberant rooms. Anechoic RIRs stay the bare direct
// path.
Rir SimulateRoomRir(const RoomSpec& room, const Point3& source,
                    const Point3& mic, const AbsorptionParams& absorption,
                    bool anechoic,
                    const DirectivityModel& directivity = DefaultDirectivity());

// Convenience overload: calibrated absorption and SimulateRoomRir, or the
// direct path only when `anechoic`.
Rir SimulateRir(const RoomSpec& room, const Point3& source, const Point3& mic,
                bool anechoic = false);

// Adds amplitude * windowed-sinc(n - delay) into `out`.
void AddFractionalImpulse(double delay_samples, double amplitude,
                          std::span<double> out);

// Schroeder backward integration, line fit from -5 dB to -35 dB, extrapolated
// to 60 dB. Requires at least 5 ms of decay inside the fit range.
double MeasureRt60(const Rir& rir);
double MeasureRt60(std::span<const double> samples, int sample_rate);

}  // namespace devarb

#endif  // DEVARB_ACOUSTICS_H_
