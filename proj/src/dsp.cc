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

#include "devarb/dsp.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "devarb/error.h"

namespace devarb {

namespace {

struct FftwBuffer {
  explicit FftwBuffer(size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

// Plans live for the process lifetime.
PlanPair GetPlans(size_t n) {
  static std::map<size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftwBuffer real(n * sizeof(double));
  FftwBuffer complex((n / 2 + 1) * sizeof(fftw_complex));
  PlanPair plans;
  const int size = static_cast<int>(n);
  plans.forward = fftw_plan_dft_r2c_1d(
      size, static_cast<double*>(real.ptr),
      static_cast<fftw_complex*>(complex.ptr), FFTW_ESTIMATE);
  plans.inverse = fftw_plan_dft_c2r_1d(
      size, static_cast<fftw_complex*>(complex.ptr),
      static_cast<double*>(real.ptr), FFTW_ESTIMATE);
  if (plans.forward == nullptr || plans.inverse == nullptr) {
    throw NumericError("FFTW planning failed");
  }
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(size_t size) : size_(size) {
  if (size < 2) throw UsageError("FFT size must be at least 2");
  const PlanPair plans = GetPlans(size);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void RealFft::Forward(std::span<const double> input,
                      std::vector<std::complex<double>>& spectrum) const {
  if (input.size() > size_) throw UsageError("FFT input longer than size");
  FftwBuffer real(size_ * sizeof(double));
  FftwBuffer complex(bins() * sizeof(fftw_complex));
  auto* r = static_cast<double*>(real.ptr);
  std::copy(input.begin(), input.end(), r);
  std::fill(r + input.size(), r + size_, 0.0);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), r,
                       static_cast<fftw_complex*>(complex.ptr));
  spectrum.resize(bins());
  std::memcpy(spectrum.data(), complex.ptr, bins() * sizeof(fftw_complex));
}

void RealFft::Inverse(std::span<const std::complex<double>> spectrum,
                      std::vector<double>& output) const {
  if (spectrum.size() != bins()) throw UsageError("spectrum size mismatch");
  FftwBuffer real(size_ * sizeof(double));
  FftwBuffer complex(bins() * sizeof(fftw_complex));
  std::memcpy(complex.ptr, spectrum.data(), bins() * sizeof(fftw_complex));
  // c2r destroys its input; the buffer is a private copy.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       static_cast<fftw_complex*>(complex.ptr),
                       static_cast<double*>(real.ptr));
  const auto* r = static_cast<const double*>(real.ptr);
  output.assign(r, r + size_);
}

std::vector<double> DirectConvolve(std::span<const double> signal,
                                   std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) return {};
  std::vector<double> out(signal.size() + kernel.size() - 1, 0.0);
  for (size_t i = 0; i < signal.size(); ++i) {
    const double s = signal[i];
    if (s == 0.0) continue;
    for (size_t k = 0; k < kernel.size(); ++k) out[i + k] += s * kernel[k];
  }
  return out;
}

std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) return {};
  const size_t n = signal.size();
  const size_t m = kernel.size();
  if (std::min(n, m) <= 32) return DirectConvolve(signal, kernel);

  const size_t fft_size = std::max<size_t>(1024, NextPowerOfTwo(2 * m));
  const size_t block = fft_size - m + 1;
  const RealFft fft(fft_size);
  std::vector<std::complex<double>> kernel_spec, block_spec;
  fft.Forward(kernel, kernel_spec);

  std::vector<double> out(n + m - 1, 0.0);
  std::vector<double> piece;
  const double scale = 1.0 / static_cast<double>(fft_size);
  for (size_t start = 0; start < n; start += block) {
    const size_t len = std::min(block, n - start);
    fft.Forward(signal.subspan(start, len), block_spec);
    for (size_t k = 0; k < block_spec.size(); ++k) {
      block_spec[k] *= kernel_spec[k];
    }
    fft.Inverse(block_spec, piece);
    const size_t valid = std::min(len + m - 1, out.size() - start);
    for (size_t i = 0; i < valid; ++i) out[start + i] += piece[i] * scale;
  }
  return out;
}

}  // namespace devarb
