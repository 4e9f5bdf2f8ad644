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

#ifndef DEVARB_RNG_H_
#define DEVARB_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace devarb {

using Rng = std::mt19937_64;

uint64_t SplitMix64(uint64_t x);

// Seed of the substream identified by (global seed, stage name, index). Every
// random draw in the toolkit comes from one of these substreams so that stages
// can be re-run or parallelized independently.
uint64_t DeriveSeed(uint64_t global_seed, std::string_view stage,
                    uint64_t index = 0);

inline Rng MakeRng(uint64_t global_seed, std::string_view stage,
                   uint64_t index = 0) {
  return Rng(DeriveSeed(global_seed, stage, index));
}

double SampleBeta(Rng& rng, double a, double b);

// Gaussian(0, sigma) conditioned on |x| <= limit, by redrawing.
double SampleTruncatedGaussian(Rng& rng, double sigma, double limit);

}  // namespace devarb

#endif  // DEVARB_RNG_H_
