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

#include "devarb/pipeline.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "devarb/error.h"
#include "devarb/hash.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace devarb {
namespace {

namespace fs = std::filesystem;

int64_t LineCount(const std::string& path) {
  std::ifstream in(path);
  int64_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

RunConfig SmallConfig(const std::string& name) {
  RunConfig c;
  c.seed = 5;
  c.counts = {10, 4, 8};
  c.out = testing::ScratchDir(name);
  c.source_root = testing::SmallCorpusRoot();
  c.train.epochs = 2;
  c.train.batch_size = 8;
  return c;
}

// One rendered run shared by the tests that only read it.
const RunConfig& RenderedRun() {
  static const RunConfig* config = [] {
    auto* c = new RunConfig(SmallConfig("rendered"));
    CmdGen(*c, {Split::kTrain, Split::kVal, Split::kTest});
    CmdRender(*c, {Split::kTrain, Split::kVal, Split::kTest});
    return c;
  }();
  return *config;
}

TEST(GenTest, CountsDeterminismAndNoiseFree) {
  RunConfig c = SmallConfig("gen_a");
  c.counts = {100, 10, 50};
  const GenSummary s = CmdGen(c, {Split::kTrain, Split::kVal, Split::kTest});
  EXPECT_EQ(s.counts, (std::array<int64_t, 3>{100, 10, 50}));
  EXPECT_EQ(LineCount(ScenarioPath(c, Split::kTrain)), 100);
  EXPECT_EQ(LineCount(ScenarioPath(c, Split::kVal)), 10);
  EXPECT_EQ(LineCount(ScenarioPath(c, Split::kTest)), 50);

  RunConfig again = c;
  again.out = testing::ScratchDir("gen_b");
  CmdGen(again, {Split::kTrain, Split::kVal, Split::kTest});
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    EXPECT_EQ(ReadAll(ScenarioPath(c, split)), ReadAll(ScenarioPath(again, split)));
  }

  RunConfig quiet = c;
  quiet.out = testing::ScratchDir("gen_quiet");
  quiet.gen.noise_free = true;
  CmdGen(quiet, {Split::kTrain});
  for (const auto& rec : ReadScenariosJsonl(ScenarioPath(quiet, Split::kTrain))) {
    EXPECT_TRUE(rec.scenario.noises.empty());
  }
  EXPECT_NE(quiet.Hash(), c.Hash());
  EXPECT_NE(quiet.DataHash(), c.DataHash());
}

TEST(GenTest, SplitsUseDisjointSeeds) {
  RunConfig c = SmallConfig("gen_seeds");
  EXPECT_NE(ScenarioSeed(c.seed, Split::kTrain, 0), ScenarioSeed(c.seed, Split::kTest, 0));
  EXPECT_NE(ScenarioSeed(c.seed, Split::kTrain, 0), ScenarioSeed(c.seed, Split::kTrain, 1));
}

TEST(ConfigTest, JsonRoundTripAndStrictKeys) {
  RunConfig c = SmallConfig("cfg");
  c.gen.anechoic = true;
  c.epsilons = {0.0, 1.0, kInfiniteEpsilon};
  c.render.self_noise_db = 20.0;
  const std::string path = c.out + "/config.json";
  SaveRunConfig(c, path);
  const RunConfig back = LoadRunConfig(path);
  EXPECT_EQ(back.Hash(), c.Hash());
  EXPECT_EQ(RunConfigJson(back).dump(), RunConfigJson(c).dump());
  EXPECT_TRUE(std::isinf(back.epsilons.back()));

  nlohmann::json j = RunConfigJson(c);
  j["gen"]["no_such_key"] = 1;
  EXPECT_THROW(RunConfigFromJson(j), UsageError);
  // Output location and worker count do not change the hash.
  RunConfig moved = c;
  moved.out = "/elsewhere";
  moved.threads = 3;
  EXPECT_EQ(moved.Hash(), c.Hash());
}

TEST(RenderTest, ManifestBookkeeping) {
  const RunConfig& c = RenderedRun();
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto scenarios = ReadScenariosJsonl(ScenarioPath(c, split));
    const auto rows = ReadDataManifest(DataDir(c, split));
    ASSERT_EQ(rows.size(), scenarios.size());
    int64_t devices = 0, files = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
      devices += static_cast<int64_t>(scenarios[i].scenario.devices.size());
      files += static_cast<int64_t>(rows[i].lfbe_files.size());
      EXPECT_EQ(rows[i].wav_files.size(), scenarios[i].scenario.devices.size());
      EXPECT_EQ(rows[i].label, ComputeGroundTruth(scenarios[i].scenario).closest_index);
      EXPECT_EQ(rows[i].config_hash, c.DataHash());
      for (const auto& f : rows[i].lfbe_files) {
        const LfbeImage image = ReadLfbe(DataDir(c, split) + "/" + f);
        EXPECT_EQ(image.frames, 201);
        EXPECT_EQ(image.bands, 64);
      }
    }
    EXPECT_EQ(files, devices);
    const auto summary = nlohmann::json::parse(ReadAll(DataDir(c, split) + "/summary.json"));
    EXPECT_EQ(summary.at("device_files").get<int64_t>(), devices);
    EXPECT_EQ(summary.at("split_audit").at("violations").get<int64_t>(), 0);
  }
}

TEST(RenderTest, FiveDeviceScenariosWriteFiveWavs) {
  RunConfig c = SmallConfig("five");
  c.counts = {0, 0, 2};
  c.gen.device_count_probs = {0.0, 0.0, 0.0, 1.0};
  CmdGen(c, {Split::kTest});
  CmdRender(c, {Split::kTest});
  for (const auto& row : ReadDataManifest(DataDir(c, Split::kTest))) {
    EXPECT_EQ(row.wav_files.size(), 5u);
    int wavs = 0;
    for (const auto& e : fs::directory_iterator(
             fs::path(DataDir(c, Split::kTest)) / fs::path(row.wav_files[0]).parent_path())) {
      wavs += e.path().extension() == ".wav";
    }
    EXPECT_EQ(wavs, 5);
  }
}

TEST(RenderTest, RerenderGivesIdenticalFiles) {
  const RunConfig& first = RenderedRun();
  RunConfig second = first;
  second.out = testing::ScratchDir("rerender");
  second.counts = first.counts;
  CmdGen(second, {Split::kTest});
  CmdRender(second, {Split::kTest});
  for (const auto& row : ReadDataManifest(DataDir(first, Split::kTest))) {
    for (const auto& f : row.wav_files) {
      EXPECT_EQ(HashFile(DataDir(first, Split::kTest) + "/" + f),
                HashFile(DataDir(second, Split::kTest) + "/" + f));
    }
    for (const auto& f : row.lfbe_files) {
      EXPECT_EQ(HashFile(DataDir(first, Split::kTest) + "/" + f),
                HashFile(DataDir(second, Split::kTest) + "/" + f));
    }
  }
}

TEST(RenderTest, RefusesScenariosFromAnotherConfig) {
  RunConfig c = SmallConfig("mixed_render");
  c.counts = {0, 0, 2};
  CmdGen(c, {Split::kTest});
  RunConfig other = c;
  other.seed = c.seed + 1;
  EXPECT_THROW(CmdRender(other, {Split::kTest}), DataError);
  RunConfig no_root = c;
  no_root.source_root.clear();
  EXPECT_THROW(CmdRender(no_root, {Split::kTest}), UsageError);
}

TEST(TrainEvalTest, ContractsAndResume) {
  RunConfig c = RenderedRun();
  c.train.epochs = 30;
  const TrainSummary s = CmdTrain(c, false);
  EXPECT_EQ(s.epochs_completed, 30);
  EXPECT_EQ(LineCount(CheckpointDir(c) + "/train_log.csv"), 31);
  const auto manifest = nlohmann::json::parse(ReadAll(CheckpointDir(c) + "/manifest.json"));
  EXPECT_DOUBLE_EQ(manifest.at("best_val_accuracy").get<double>(), s.best_val_accuracy);
  EXPECT_EQ(manifest.at("best_epoch").get<int>(), s.best_epoch);

  RunConfig more = c;
  more.train.epochs = 2;
  const TrainSummary r = CmdTrain(more, true);
  EXPECT_EQ(r.epochs_completed, 32);
  EXPECT_EQ(LineCount(CheckpointDir(c) + "/train_log.csv"), 33);

  RunConfig grid = c;
  grid.epsilons = {0.0, 0.25, 0.5, 1.0};
  const EvalSummary bl = CmdEval(grid, SystemChoice::kBaseline);
  EXPECT_TRUE(bl.baseline.has_value());
  EXPECT_FALSE(bl.dnn.has_value());
  EXPECT_FALSE(bl.relative_error.has_value());
  EXPECT_FALSE(bl.metrics.contains("relative_error"));
  ASSERT_EQ(bl.baseline->epsilon_curve.size(), 4u);
  for (size_t i = 1; i < 4; ++i) {
    EXPECT_GE(bl.baseline->epsilon_curve[i].accuracy,
              bl.baseline->epsilon_curve[i - 1].accuracy);
  }
  EXPECT_EQ(LineCount(EvalDir(grid) + "/baseline/epsilon_curve.csv"), 5);

  const EvalSummary both = CmdEval(grid, SystemChoice::kBoth);
  ASSERT_TRUE(both.baseline && both.dnn);
  if (both.baseline->accuracy < 1.0) {
    ASSERT_TRUE(both.relative_error.has_value());
    EXPECT_DOUBLE_EQ(*both.relative_error,
                     (1.0 - both.dnn->accuracy) / (1.0 - both.baseline->accuracy));
  } else {
    EXPECT_TRUE(both.metrics.at("relative_error").is_null());
  }
  EXPECT_EQ(both.baseline->accuracy, bl.baseline->accuracy);
  const std::string text = CmdReport(grid);
  EXPECT_NE(text.find("baseline"), std::string::npos);
  EXPECT_TRUE(fs::exists(EvalDir(grid) + "/report.txt"));
}

TEST(TrainEvalTest, RefusesMixedHashesUnlessForced) {
  RunConfig other = RenderedRun();
  other.seed += 100;
  EXPECT_THROW(CmdEval(other, SystemChoice::kBaseline), DataError);
  EXPECT_THROW(CmdTrain(other, false), DataError);
  EXPECT_NO_THROW(CmdEval(other, SystemChoice::kBaseline, /*force=*/true));
}

TEST(TrainEvalTest, DnnEvalNeedsCheckpoint) {
  RunConfig c = SmallConfig("no_ckpt");
  c.counts = {0, 0, 2};
  CmdGen(c, {Split::kTest});
  CmdRender(c, {Split::kTest});
  EXPECT_THROW(CmdEval(c, SystemChoice::kDnn), DataError);
  EXPECT_NO_THROW(CmdEval(c, SystemChoice::kBaseline));
  EXPECT_THROW(ParseSystem("oracle"), UsageError);
}

#ifdef DEVARB_CLI_PATH
int RunCli(const std::string& args) {
  const std::string cmd = std::string(DEVARB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodes) {
  const std::string out = testing::ScratchDir("cli");
  EXPECT_EQ(RunCli(""), 1);
  EXPECT_EQ(RunCli("frobnicate"), 1);
  EXPECT_EQ(RunCli("gen --no-such-flag"), 1);
  EXPECT_EQ(RunCli("eval --system oracle --out " + out), 1);
  EXPECT_EQ(RunCli("gen --counts 1,2 --out " + out), 1);
  EXPECT_EQ(RunCli("--help"), 0);
  // Rendering before gen: the scenario manifest is missing.
  EXPECT_EQ(RunCli("render --out " + out + " --source-root " + testing::SmallCorpusRoot()), 2);

  const std::string root = testing::SmallCorpusRoot();
  ASSERT_EQ(RunCli("gen --out " + out + " --seed 3 --counts 3,2,2"), 0);
  ASSERT_EQ(RunCli("render --out " + out + " --source-root " + root), 0);
  EXPECT_EQ(RunCli("eval --system dnn --out " + out), 2);
  EXPECT_EQ(RunCli("eval --system baseline --out " + out), 0);
  EXPECT_EQ(RunCli("report --out " + out), 0);

  // Corrupt one training feature file with a NaN.
  RunConfig c = LoadRunConfig(out + "/config.json");
  const auto rows = ReadDataManifest(DataDir(c, Split::kTrain));
  const std::string lfbe = DataDir(c, Split::kTrain) + "/" + rows[0].lfbe_files[0];
  {
    std::fstream f(lfbe, std::ios::in | std::ios::out | std::ios::binary);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    f.seekp(4 * 1000);
    f.write(reinterpret_cast<const char*>(&nan), sizeof(nan));
  }
  EXPECT_EQ(RunCli("train --epochs 1 --out " + out), 3);
}
#endif

}  // namespace
}  // namespace devarb
