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

#include "devarb/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "devarb/error.h"
#include "devarb/scenario.h"

namespace devarb {

double EvalRecord::d1() const {
  return *std::min_element(distances.begin(), distances.end());
}

double EvalRecord::d2() const {
  return GroundTruthFromDistances(distances).d2;
}

bool EvalRecord::Correct() const {
  return chosen_index == closest_index || d_chosen == d1();
}

EvalRecord MakeRecord(int64_t scenario_id, std::vector<double> distances,
                      int chosen_index) {
  if (distances.empty()) throw UsageError("record needs distances");
  if (chosen_index < 0 || chosen_index >= static_cast<int>(distances.size())) {
    throw UsageError("chosen index out of range");
  }
  EvalRecord r;
  r.scenario_id = scenario_id;
  r.closest_index = GroundTruthFromDistances(distances).closest_index;
  r.chosen_index = chosen_index;
  r.d_chosen = distances[chosen_index];
  r.distances = std::move(distances);
  return r;
}

double Accuracy(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw UsageError("accuracy of an empty record set");
  int64_t correct = 0;
  for (const EvalRecord& r : records) correct += r.Correct() ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::vector<DeltaBin> DeltaAccuracy(const std::vector<EvalRecord>& records,
                                    double bin_width) {
  if (!(bin_width > 0.0)) throw UsageError("delta bin width must be > 0");
  std::vector<DeltaBin> bins;
  for (const EvalRecord& r : records) {
    const double gap = std::max(0.0, r.d2() - r.d1());
    const size_t bin = static_cast<size_t>(std::floor(gap / bin_width));
    if (bin >= bins.size()) bins.resize(bin + 1);
    bins[bin].count += 1;
    bins[bin].correct += r.Correct() ? 1 : 0;
  }
  for (size_t i = 0; i < bins.size(); ++i) {
    bins[i].lower = static_cast<double>(i) * bin_width;
    if (bins[i].count > 0) {
      bins[i].accuracy = static_cast<double>(bins[i].correct) /
                         static_cast<double>(bins[i].count);
    }
  }
  return bins;
}

std::vector<EpsilonPoint> EpsilonAccuracy(const std::vector<EvalRecord>& records,
                                          const std::vector<double>& epsilons) {
  if (records.empty()) throw UsageError("epsilon accuracy of no records");
  std::vector<EpsilonPoint> curve;
  for (double eps : epsilons) {
    if (!(eps >= 0.0)) throw UsageError("epsilon must be >= 0");
    int64_t hits = 0;
    for (const EvalRecord& r : records) {
      if (r.Correct() || r.d_chosen - r.d1() < eps) ++hits;
    }
    curve.push_back(
        {eps, static_cast<double>(hits) / static_cast<double>(records.size())});
  }
  return curve;
}

double RelativeError(double acc_baseline, double acc_dnn) {
  if (!(acc_baseline < 1.0)) {
    throw UsageError("relative error is undefined for a perfect baseline");
  }
  return (1.0 - acc_dnn) / (1.0 - acc_baseline);
}

EvalReport BuildReport(std::string system, std::vector<EvalRecord> records,
                       const std::vector<double>& epsilons, double bin_width) {
  EvalReport report;
  report.system = std::move(system);
  report.accuracy = Accuracy(records);
  report.delta_curve = DeltaAccuracy(records, bin_width);
  report.epsilon_curve = EpsilonAccuracy(records, epsilons);
  report.records = std::move(records);
  return report;
}

namespace {

nlohmann::json Optional(const std::optional<double>& v) {
  return v.has_value() ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json EpsilonJson(double eps) {
  return std::isinf(eps) ? nlohmann::json("inf") : nlohmann::json(eps);
}

}  // namespace

nlohmann::json ReportJson(const EvalReport& report, bool include_records) {
  nlohmann::json j;
  j["system"] = report.system;
  j["num_records"] = report.records.size();
  j["accuracy"] = report.accuracy;
  nlohmann::json delta = nlohmann::json::array();
  for (const DeltaBin& b : report.delta_curve) {
    delta.push_back({{"lower", b.lower},
                     {"count", b.count},
                     {"accuracy", Optional(b.accuracy)}});
  }
  j["delta_curve"] = std::move(delta);
  nlohmann::json eps = nlohmann::json::array();
  for (const EpsilonPoint& p : report.epsilon_curve) {
    eps.push_back({{"epsilon", EpsilonJson(p.epsilon)}, {"accuracy", p.accuracy}});
  }
  j["epsilon_curve"] = std::move(eps);
  if (include_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const EvalRecord& r : report.records) {
      recs.push_back({{"scenario_id", r.scenario_id},
                      {"distances", r.distances},
                      {"chosen_index", r.chosen_index},
                      {"closest_index", r.closest_index},
                      {"d_chosen", r.d_chosen}});
    }
    j["records"] = std::move(recs);
  }
  return j;
}

void WriteDeltaCsv(const std::string& path, const std::vector<DeltaBin>& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(9);
  out << "bin_lower,count,accuracy\n";
  for (const DeltaBin& b : curve) {
    out << b.lower << ',' << b.count << ',';
    if (b.accuracy) out << *b.accuracy;
    out << '\n';
  }
}

void WriteEpsilonCsv(const std::string& path,
                     const std::vector<EpsilonPoint>& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(9);
  out << "epsilon,accuracy\n";
  for (const EpsilonPoint& p : curve) {
    if (std::isinf(p.epsilon)) {
      out << "inf";
    } else {
      out << p.epsilon;
    }
    out << ',' << p.accuracy << '\n';
  }
}

std::vector<DeltaComparison> CompareDelta(const EvalReport& baseline,
                                          const EvalReport& dnn) {
  std::vector<DeltaComparison> out;
  const size_t n = std::max(baseline.delta_curve.size(), dnn.delta_curve.size());
  for (size_t i = 0; i < n; ++i) {
    DeltaComparison c;
    if (i < baseline.delta_curve.size()) {
      c.lower = baseline.delta_curve[i].lower;
      c.count = baseline.delta_curve[i].count;
      c.baseline_accuracy = baseline.delta_curve[i].accuracy;
    }
    if (i < dnn.delta_curve.size()) {
      c.lower = dnn.delta_curve[i].lower;
      c.dnn_accuracy = dnn.delta_curve[i].accuracy;
    }
    if (c.baseline_accuracy && c.dnn_accuracy && *c.baseline_accuracy < 1.0) {
      c.relative_error = RelativeError(*c.baseline_accuracy, *c.dnn_accuracy);
    }
    out.push_back(c);
  }
  return out;
}

nlohmann::json ComparisonJson(const EvalReport& baseline, const EvalReport& dnn) {
  nlohmann::json j;
  j["baseline_accuracy"] = baseline.accuracy;
  j["dnn_accuracy"] = dnn.accuracy;
  j["relative_error"] = baseline.accuracy < 1.0
                            ? nlohmann::json(RelativeError(baseline.accuracy,
                                                           dnn.accuracy))
                            : nlohmann::json(nullptr);
  nlohmann::json delta = nlohmann::json::array();
  for (const DeltaComparison& c : CompareDelta(baseline, dnn)) {
    delta.push_back({{"lower", c.lower},
                     {"count", c.count},
                     {"baseline_accuracy", Optional(c.baseline_accuracy)},
                     {"dnn_accuracy", Optional(c.dnn_accuracy)},
                     {"relative_error", Optional(c.relative_error)}});
  }
  j["delta_relative_error"] = std::move(delta);
  nlohmann::json eps = nlohmann::json::array();
  const size_t n = std::min(baseline.epsilon_curve.size(), dnn.epsilon_curve.size());
  for (size_t i = 0; i < n; ++i) {
    const double bl = baseline.epsilon_curve[i].accuracy;
    const double dn = dnn.epsilon_curve[i].accuracy;
    eps.push_back({{"epsilon", EpsilonJson(baseline.epsilon_curve[i].epsilon)},
                   {"baseline_accuracy", bl},
                   {"dnn_accuracy", dn},
                   {"relative_error", bl < 1.0 ? nlohmann::json(RelativeError(bl, dn))
                                               : nlohmann::json(nullptr)}});
  }
  j["epsilon_relative_error"] = std::move(eps);
  return j;
}

}  // namespace devarb
