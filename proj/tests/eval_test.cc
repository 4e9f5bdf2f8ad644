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

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include "devarb/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace devarb {
namespace {

std::vector<EvalRecord> RandomRecords(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(1.0, 8.0);
  std::uniform_int_distribution<int> count(2, 5);
  std::vector<EvalRecord> records;
  for (int i = 0; i < n; ++i) {
    std::vector<double> d(count(rng));
    for (double& v : d) v = dist(rng);
    const int chosen = std::uniform_int_distribution<int>(0, d.size() - 1)(rng);
    records.push_back(MakeRecord(i, d, chosen));
  }
  return records;
}

TEST(AccuracyTest, Examples) {
  std::vector<EvalRecord> all = {MakeRecord(0, {1, 2}, 0), MakeRecord(1, {3, 2}, 1)};
  EXPECT_DOUBLE_EQ(Accuracy(all), 1.0);
  all.push_back(MakeRecord(2, {1, 2, 3}, 0));
  all.push_back(MakeRecord(3, {1, 2, 3}, 2));
  EXPECT_DOUBLE_EQ(Accuracy(all), 0.75);
  EXPECT_THROW(Accuracy({}), UsageError);
}

TEST(AccuracyTest, TiedClosestDevicesAreBothCorrect) {
  EXPECT_TRUE(MakeRecord(0, {2.0, 2.0, 3.0}, 1).Correct());
  EXPECT_TRUE(MakeRecord(0, {2.0, 2.0, 3.0}, 0).Correct());
  EXPECT_FALSE(MakeRecord(0, {2.0, 2.0, 3.0}, 2).Correct());
}

TEST(RecordTest, Fields) {
  const EvalRecord r = MakeRecord(7, {3.1, 1.4, 2.0}, 2);
  EXPECT_EQ(r.closest_index, 1);
  EXPECT_DOUBLE_EQ(r.d_chosen, 2.0);
  EXPECT_DOUBLE_EQ(r.d1(), 1.4);
  EXPECT_DOUBLE_EQ(r.d2(), 2.0);
  EXPECT_THROW(MakeRecord(0, {1.0}, 1), UsageError);
  EXPECT_THROW(MakeRecord(0, {}, 0), UsageError);
}

TEST(DeltaAccuracyTest, SingleRecord) {
  const auto bins = DeltaAccuracy({MakeRecord(0, {1.0, 2.4}, 0)});
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].count, 0);
  EXPECT_FALSE(bins[0].accuracy.has_value());
  EXPECT_DOUBLE_EQ(bins[1].lower, 1.0);
  EXPECT_EQ(bins[1].count, 1);
  EXPECT_DOUBLE_EQ(*bins[1].accuracy, 1.0);
}

TEST(DeltaAccuracyTest, HalfCorrectInFirstBin) {
  const auto bins = DeltaAccuracy({MakeRecord(0, {1.0, 1.5}, 0),
                                   MakeRecord(1, {1.0, 1.5}, 1)});
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_DOUBLE_EQ(*bins[0].accuracy, 0.5);
  const auto wide = DeltaAccuracy({MakeRecord(0, {1.0, 1.5}, 0),
                                   MakeRecord(1, {1.0, 1.5}, 1),
                                   MakeRecord(2, {1.0, 4.5}, 0)});
  ASSERT_EQ(wide.size(), 4u);
  EXPECT_FALSE(wide[1].accuracy.has_value());
  EXPECT_FALSE(wide[2].accuracy.has_value());
  EXPECT_DOUBLE_EQ(*wide[3].accuracy, 1.0);
}

TEST(DeltaAccuracyTest, PooledIsCountWeightedMean) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto records = RandomRecords(seed, 200);
    for (double width : {0.5, 1.0, 2.0}) {
      const auto bins = DeltaAccuracy(records, width);
      double weighted = 0.0;
      int64_t total = 0;
      for (const DeltaBin& b : bins) {
        EXPECT_DOUBLE_EQ(b.lower, width * (&b - bins.data()));
        if (b.accuracy) weighted += *b.accuracy * b.count;
        total += b.count;
      }
      EXPECT_EQ(total, 200);
      EXPECT_NEAR(weighted / total, Accuracy(records), 1e-12);
    }
  }
  EXPECT_THROW(DeltaAccuracy({}, 0.0), UsageError);
}

TEST(EpsilonAccuracyTest, WorkedExample) {
  const std::vector<EvalRecord> r = {MakeRecord(0, {2.0, 2.2, 6.0}, 1)};
  const auto curve = EpsilonAccuracy(r, {0.0, 0.1, 0.2, 0.2000001, 0.5, kInfiniteEpsilon});
  EXPECT_DOUBLE_EQ(curve[0].accuracy, 0.0);
  EXPECT_DOUBLE_EQ(curve[1].accuracy, 0.0);
  EXPECT_DOUBLE_EQ(curve[2].accuracy, 0.0);
  EXPECT_DOUBLE_EQ(curve[3].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(curve[4].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(curve[5].accuracy, 1.0);
}

TEST(EpsilonAccuracyTest, ZeroEqualsAccuracyAndCurveIsMonotone) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto records = RandomRecords(seed, 50 + seed);
    const auto curve = EpsilonAccuracy(
        records, {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, kInfiniteEpsilon});
    EXPECT_EQ(curve[0].accuracy, Accuracy(records));
    for (size_t i = 1; i < curve.size(); ++i) {
      EXPECT_GE(curve[i].accuracy, curve[i - 1].accuracy);
    }
    EXPECT_EQ(curve.back().accuracy, 1.0);
    for (const EvalRecord& r : records) EXPECT_GE(r.d_chosen, r.d1());
  }
}

TEST(EpsilonAccuracyTest, Errors) {
  EXPECT_THROW(EpsilonAccuracy(RandomRecords(1, 3), {-0.1}), UsageError);
  EXPECT_THROW(EpsilonAccuracy({}, {0.0}), UsageError);
}

TEST(RelativeErrorTest, Examples) {
  EXPECT_DOUBLE_EQ(RelativeError(0.5, 0.75), 0.5);
  EXPECT_DOUBLE_EQ(RelativeError(0.6, 0.6), 1.0);
  EXPECT_DOUBLE_EQ(RelativeError(0.6, 1.0), 0.0);
  EXPECT_THROW(RelativeError(1.0, 0.9), UsageError);
}

TEST(ReportTest, PureAndSerializable) {
  const auto records = RandomRecords(5, 80);
  const std::vector<double> eps = {0.0, 0.5, kInfiniteEpsilon};
  const EvalReport a = BuildReport("baseline", records, eps);
  const EvalReport b = BuildReport("baseline", records, eps);
  EXPECT_EQ(ReportJson(a).dump(), ReportJson(b).dump());
  const nlohmann::json j = ReportJson(a, false);
  EXPECT_FALSE(j.contains("records"));
  EXPECT_EQ(j.at("epsilon_curve").size(), 3u);
  EXPECT_DOUBLE_EQ(j.at("accuracy").get<double>(), Accuracy(records));

  const std::string dir = testing::ScratchDir("report");
  WriteDeltaCsv(dir + "/delta.csv", a.delta_curve);
  WriteEpsilonCsv(dir + "/eps.csv", a.epsilon_curve);
  std::ifstream in(dir + "/eps.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST(CompareTest, PerBinRelativeError) {
  const std::vector<EvalRecord> bl = {MakeRecord(0, {1.0, 1.5}, 1),
                                      MakeRecord(1, {1.0, 1.5}, 0),
                                      MakeRecord(2, {1.0, 3.5}, 0)};
  const std::vector<EvalRecord> dnn = {MakeRecord(0, {1.0, 1.5}, 0),
                                       MakeRecord(1, {1.0, 1.5}, 0),
                                       MakeRecord(2, {1.0, 3.5}, 0)};
  const std::vector<double> eps = {0.0};
  const auto cmp = CompareDelta(BuildReport("baseline", bl, eps),
                                BuildReport("dnn", dnn, eps));
  ASSERT_EQ(cmp.size(), 3u);
  EXPECT_DOUBLE_EQ(*cmp[0].relative_error, 0.0);
  EXPECT_FALSE(cmp[1].baseline_accuracy.has_value());
  EXPECT_FALSE(cmp[1].relative_error.has_value());
  EXPECT_FALSE(cmp[2].relative_error.has_value());  // perfect baseline
  const nlohmann::json j =
      ComparisonJson(BuildReport("baseline", bl, eps), BuildReport("dnn", dnn, eps));
  EXPECT_TRUE(j.is_object());
}

}  // namespace
}  // namespace devarb
