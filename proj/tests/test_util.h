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

#ifndef DEVARB_TESTS_TEST_UTIL_H_
#define DEVARB_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "devarb/rng.h"
#include "devarb/scenario.h"
#include "devarb/synthetic_corpus.h"

namespace devarb::testing {

// Fresh, empty directory under the test scratch root (./test_tmp).
std::string ScratchDir(const std::string& name);

// A small synthetic corpus shared by the tests in one build tree. Created on
// first use and published with an atomic rename, so concurrent test
// processes are safe.
std::string SmallCorpusRoot();

// Content stamp of the synthesizer output and the options.
std::string CorpusFingerprint(const SyntheticCorpusOptions& options);

// Writes a corpus with the given options under the scratch root, keyed by
// `name`; reused if already complete.
std::string CachedCorpus(const std::string& name,
                         const SyntheticCorpusOptions& options);

// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double KsStatistic(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

// Asymptotic critical value of sqrt(n) * D at significance `alpha`.
double KsCriticalValue(double alpha);

// Scenario with a hand-placed layout; rt60 0.4 s unless given.
Scenario MakeScenario(const RoomSpec& room, const std::vector<Point3>& devices,
                      const Point3& speaker, double speech_db = 60.0);

// Independent enumeration: every (q, n) in {0,1}^3 x [-3,3]^3, image
// coordinate (1 - 2q) s + 2 n L with |2n - q| reflections per axis. Each
// arrival is an 81-tap Hann-windowed sinc centred on the nearest sample,
// evaluated with a direct sin() per tap.
std::vector<double> BruteForceRir(const RoomSpec& room, const Point3& src,
                                  const Point3& mic, double beta,
                                  int max_order, double max_time);

// Room with sides in [3, 10] x [3, 10] x [2.5, 6] m and rt60 in [0.2, 0.9] s.
RoomSpec RandomRoom(Rng& rng);
// Uniform over the inner 80% of each axis.
Point3 RandomInside(Rng& rng, const RoomSpec& room);

double RelativeL2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace devarb::testing

#endif  // DEVARB_TESTS_TEST_UTIL_H_
