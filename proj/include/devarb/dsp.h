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

#ifndef DEVARB_DSP_H_
#define DEVARB_DSP_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace devarb {

// Real-input FFT of a fixed size backed by FFTW. Plans are created with
// FFTW_ESTIMATE so results do not depend on run-time timing measurements.
// Instances are cheap handles onto a shared, mutex-guarded plan cache and are
// safe to use from several threads at once.
class RealFft {
 public:
  explicit RealFft(size_t size);

  size_t size() const { return size_; }
  size_t bins() const { return size_ / 2 + 1; }

  // `input` may be shorter than size(); it is zero-padded.
  void Forward(std::span<const double> input,
               std::vector<std::complex<double>>& spectrum) const;
  // Unnormalized inverse: Inverse(Forward(x)) = size() * x.
  void Inverse(std::span<const std::complex<double>> spectrum,
               std::vector<double>& output) const;

 private:
  size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Full linear convolution (length n + m - 1) by FFT overlap-add.
std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> kernel);

// Direct-form full linear convolution.
std::vector<double> DirectConvolve(std::span<const double> signal,
                                   std::span<const double> kernel);

size_t NextPowerOfTwo(size_t n);

}  // namespace devarb

#endif  // DEVARB_DSP_H_
