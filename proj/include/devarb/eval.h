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

#ifndef DEVARB_EVAL_H_
#define DEVARB_EVAL_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace devarb {

struct EvalRecord {
  int64_t scenario_id = 0;
  std::vector<double> distances;
  int chosen_index = 0;
  int closest_index = 0;
  double d_chosen = 0.0;

  double d1() const;
  double d2() const;
  // Choosing any device at the minimum distance is correct.
  bool Correct() const;
};

// Fills closest_index and d_chosen from the distances.
EvalRecord MakeRecord(int64_t scenario_id, std::vector<double> distances,
                      int chosen_index);

struct DeltaBin {
  double lower = 0.0;  // bin is [lower, lower + width)
  int64_t count = 0;
  int64_t correct = 0;
  std::optional<double> accuracy;  // unset for empty bins
};

struct EpsilonPoint {
  double epsilon = 0.0;
  double accuracy = 0.0;
};

inline constexpr double kInfiniteEpsilon = std::numeric_limits<double>::infinity();

double Accuracy(const std::vector<EvalRecord>& records);

// Bins floor((d2 - d1) / width), from 0 through the largest occupied bin.
std::vector<DeltaBin> DeltaAccuracy(const std::vector<EvalRecord>& records,
                                    double bin_width = 1.0);

// P(d_chosen - d1 < eps), where a correct choice satisfies every eps >= 0
// (so eps = 0 reproduces Accuracy).
std::vector<EpsilonPoint> EpsilonAccuracy(const std::vector<EvalRecord>& records,
                                          const std::vector<double>& epsilons);

// (1 - acc_dnn) / (1 - acc_bl).
double RelativeError(double acc_baseline, double acc_dnn);

struct EvalReport {
  std::string system;
  std::vector<EvalRecord> records;
  double accuracy = 0.0;
  std::vector<DeltaBin> delta_curve;
  std::vector<EpsilonPoint> epsilon_curve;
};

EvalReport BuildReport(std::string system, std::vector<EvalRecord> records,
                       const std::vector<double>& epsilons,
                       double bin_width = 1.0);

nlohmann::json ReportJson(const EvalReport& report, bool include_records = true);
void WriteDeltaCsv(const std::string& path, const std::vector<DeltaBin>& curve);
void WriteEpsilonCsv(const std::string& path,
                     const std::vector<EpsilonPoint>& curve);

struct DeltaComparison {
  double lower = 0.0;
  int64_t count = 0;
  std::optional<double> baseline_accuracy;
  std::optional<double> dnn_accuracy;
  std::optional<double> relative_error;
};

// Per-bin and per-epsilon relative error of the DNN over the baseline; bins
// with a perfect or missing baseline have no relative error.
std::vector<DeltaComparison> CompareDelta(const EvalReport& baseline,
                                          const EvalReport& dnn);
nlohmann::json ComparisonJson(const EvalReport& baseline, const EvalReport& dnn);

}  // namespace devarb

#endif  // DEVARB_EVAL_H_
