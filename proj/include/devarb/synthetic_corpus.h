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

#ifndef DEVARB_SYNTHETIC_CORPUS_H_
#define DEVARB_SYNTHETIC_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace devarb {

// Stand-in corpus laid out like GSCv2: `seven/<speaker>_nohash_<k>.wav`
// (1 s, 16-bit PCM, 16 kHz) and `_background_noise_/*.wav`. Utterances are
// formant-synthesized renditions of the keyword with per-speaker pitch,
// vocal-tract scale, timing and loudness; backgrounds imitate the six GSCv2
// recordings.
struct SyntheticCorpusOptions {
  int num_utterances = 2377;
  int num_speakers = 1000;
  uint64_t seed = 7;
  // Seconds per background recording (the dishes file is longer, as in
  // GSCv2).
  double background_seconds = 61.0;
  double dishes_seconds = 95.0;
};

struct SyntheticCorpusSummary {
  int utterances = 0;
  std::vector<std::string> background_files;
};

SyntheticCorpusSummary WriteSyntheticGscv2(
    const std::string& root, const SyntheticCorpusOptions& options = {});

// One utterance, exposed for tests. `speaker_seed` fixes the voice and
// `take_seed` the per-take variation.
std::vector<double> SynthesizeKeyword(uint64_t speaker_seed,
                                      uint64_t take_seed);

}  // namespace devarb

#endif  // DEVARB_SYNTHETIC_CORPUS_H_
