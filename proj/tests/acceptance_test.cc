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

// Acceptance harness. Prints one PASS/FAIL line per criterion followed by the
// measured numbers. Exits non-zero only when the harness itself breaks, or
// with --strict when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "devarb/acoustics.h"
#include "devarb/arbitrator.h"
#include "devarb/audio.h"
#include "devarb/baseline.h"
#include "devarb/error.h"
#include "devarb/eval.h"
#include "devarb/features.h"
#include "devarb/hash.h"
#include "devarb/pipeline.h"
#include "devarb/rng.h"
#include "devarb/scenario.h"
#include "devarb/synthetic_corpus.h"
#include "devarb/training.h"
#include "test_util.h"

namespace devarb {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Harness {
  std::string work_dir;
  std::string corpus_root;
  SourceCatalog catalog;
  uint64_t seed = 11;
  int threads = 0;
  int headline_epochs = 30;
  std::array<int64_t, 3> headline_counts = {2000, 500, 1000};
  RunConfig headline;  // filled by criterion 10, reused by 5 and 6
  bool headline_ready = false;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

Outcome ImageSourceOracle(Harness&) {
  const auto start = Clock::now();
  Rng rng(DeriveSeed(20, "acceptance.image_source", 0));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RoomSpec room = testing::RandomRoom(rng);
    const Point3 src = testing::RandomInside(rng, room);
    Point3 mic = testing::RandomInside(rng, room);
    while (Distance(src, mic) < 0.5) mic = testing::RandomInside(rng, room);
    const double beta = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
    // Long enough for every second-order image of the largest room.
    const RirCutoff cutoff{0.25, 2};
    const Rir rir = SimulateRir(room, src, mic, {beta, room.rt60},
                                DefaultDirectivity(), cutoff);
    const std::vector<double> want =
        testing::BruteForceRir(room, src, mic, beta, 2, cutoff.max_time);
    if (rir.samples.size() != want.size()) return {false, "length mismatch"};
    worst = std::max(worst, testing::RelativeL2(rir.samples, want));
  }
  const double t = Seconds(start);
  return {worst < 1e-6 && t < 60.0,
          Fmt("max rel L2 %.2e over 20 rooms, %.1f s", worst, t)};
}

Outcome Rt60Calibration(Harness& h) {
  GenConfig gen;
  gen.noise_free = true;
  int within = 0, rooms = 0;
  double worst = 0.0;
  for (int64_t i = 0; rooms < 50; ++i) {
    const Scenario s = SampleScenario(DeriveSeed(h.seed, "acceptance.rt60", i), gen);
    if (s.room.rt60 < 0.2 || s.room.rt60 > 0.9) continue;
    ++rooms;
    const Rir rir = SimulateRir(s.room, s.speaker.location, s.devices[0]);
    const double ratio = MeasureRt60(rir) / s.room.rt60;
    worst = std::max(worst, std::abs(ratio - 1.0));
    within += std::abs(ratio - 1.0) <= 0.2;
  }
  return {within >= 45,
          Fmt("%.0f/50 rooms within 20%% (worst deviation %.1f%%)", within,
              100.0 * worst)};
}

double Energy(const std::vector<double>& x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

Outcome FreeField(Harness& h) {
  GenConfig gen;
  gen.noise_free = true;
  gen.anechoic = true;
  const int n = 500;
  std::vector<double> law_error(n, 0.0);
  std::vector<int> correct(n, 0);
  ParallelFor(n, h.threads, [&](int64_t i) {
    const Scenario s = SampleScenario(DeriveSeed(h.seed, "acceptance.anechoic", i), gen);
    const RenderedAudio audio = RenderScenario(s, Split::kTest, h.catalog, {});
    const GroundTruth gt = ComputeGroundTruth(s);
    const double ref = Energy(audio.waveforms[0].samples) * gt.distances[0] * gt.distances[0];
    double worst = 0.0;
    for (size_t d = 1; d < s.devices.size(); ++d) {
      const double e = Energy(audio.waveforms[d].samples) * gt.distances[d] * gt.distances[d];
      worst = std::max(worst, std::abs(e / ref - 1.0));
    }
    law_error[i] = worst;
    correct[i] = BaselineArbitrate(audio.waveforms) == gt.closest_index;
  });
  const double worst = *std::max_element(law_error.begin(), law_error.end());
  const double acc = std::accumulate(correct.begin(), correct.end(), 0) / double(n);
  return {worst < 0.01 && acc == 1.0,
          Fmt("max |E R^2 / E0 R0^2 - 1| = %.2e, baseline accuracy %.4f on 500", worst,
              acc)};
}

Outcome NoiseFreeReverberant(Harness& h) {
  GenConfig noisy, quiet;
  quiet.noise_free = true;
  const int n = 1000;
  std::vector<int> ok_noisy(n, 0), ok_quiet(n, 0);
  ParallelFor(n, h.threads, [&](int64_t i) {
    const uint64_t seed = DeriveSeed(h.seed, "acceptance.reverberant", i);
    const Scenario a = SampleScenario(seed, noisy);
    const Scenario b = SampleScenario(seed, quiet);
    const int label = ComputeGroundTruth(a).closest_index;
    ok_noisy[i] = BaselineArbitrate(RenderScenario(a, Split::kTest, h.catalog, {}).waveforms) == label;
    ok_quiet[i] = BaselineArbitrate(RenderScenario(b, Split::kTest, h.catalog, {}).waveforms) == label;
  });
  const double acc_noisy = std::accumulate(ok_noisy.begin(), ok_noisy.end(), 0) / double(n);
  const double acc_quiet = std::accumulate(ok_quiet.begin(), ok_quiet.end(), 0) / double(n);
  const double gap = std::abs(acc_quiet - acc_noisy);
  return {gap < 0.05, Fmt("noise-free %.4f vs noisy %.4f, gap %.1f pp", acc_quiet,
                          acc_noisy, 100.0 * gap)};
}

Outcome FeatureShape(Harness& h) {
  if (!h.headline_ready) return {false, "headline run unavailable"};
  int64_t files = 0, bad = 0;
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    const std::string dir = DataDir(h.headline, split);
    for (const RenderedScenario& r : ReadDataManifest(dir)) {
      if (r.lfbe_files.size() != r.distances.size()) ++bad;
      for (const std::string& f : r.lfbe_files) {
        const LfbeImage image = ReadLfbe(dir + "/" + f);
        ++files;
        bad += image.frames != 201 || image.bands != 64 ||
               image.values.size() != 201u * 64u;
      }
    }
  }
  return {bad == 0 && files > 0,
          Fmt("%.0f LFBE images checked, %.0f not 201x64", double(files), double(bad))};
}

Outcome GradientCheckCriterion(Harness& h) {
  if (!h.headline_ready) return {false, "headline run unavailable"};
  // Real rendered features through the full-size input path.
  const std::vector<ArbitrationExample> test = LoadExamples(h.headline, Split::kTest);
  double worst = 0.0;
  int checked = 0;
  for (const ArbitrationExample& ex : test) {
    if (ex.devices.size() < 3) continue;
    ArbitratorNet<double> model(GradientCheckArchitecture());
    model.InitHeUniform(100 + checked);
    Rng rng(200 + checked);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (const ParamInfo& info : model.param_infos()) {
      if (info.shape.size() != 1) continue;
      for (size_t i = 0; i < info.size; ++i) model.params()[info.offset + i] = u(rng);
    }
    worst = std::max(worst, GradientCheck(model, ex).max_relative_error);
    if (++checked == 2) break;
  }
  return {checked == 2 && worst < 1e-4,
          Fmt("max relative error %.2e over %.0f examples", worst, checked)};
}

Outcome PermutationEquivariance(Harness&) {
  ArbitratorModel model;
  model.InitHeUniform(77);
  Rng rng(78);
  std::uniform_real_distribution<float> u(-0.05f, 0.05f);
  for (const ParamInfo& info : model.param_infos()) {
    if (info.shape.size() != 1) continue;
    for (size_t i = 0; i < info.size; ++i) model.params()[info.offset + i] = u(rng);
  }
  std::normal_distribution<float> g(0.0f, 1.0f);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 5;
    std::vector<Embedding> z(n, Embedding(128));
    for (auto& e : z) for (float& v : e) v = g(rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Embedding> zp;
    for (int p : perm) zp.push_back(z[p]);
    const ArbitrationOutput out = Classify(z, model);
    const ArbitrationOutput outp = Classify(zp, model);
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
      err = std::max(err, std::abs(outp.logits[j] - out.logits[perm[j]]));
      err = std::max(err, std::abs(outp.probabilities[j] - out.probabilities[perm[j]]));
    }
    worst = std::max(worst, err);
    failures += err >= 1e-6;
  }
  return {failures == 0, Fmt("%.0f/1000 trials over tolerance, worst %.2e",
                             failures, worst)};
}

Outcome MetricIdentities(Harness&) {
  Rng rng(99);
  bool eps0 = true, monotone = true;
  std::uniform_int_distribution<int> devices(2, 5), size(1, 60);
  std::uniform_real_distribution<double> dist(1.0, 8.0);
  const std::vector<double> grid = {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, kInfiniteEpsilon};
  for (int set = 0; set < 100; ++set) {
    std::vector<EvalRecord> records;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<double> d(devices(rng));
      for (double& v : d) v = dist(rng);
      const int chosen = std::uniform_int_distribution<int>(0, int(d.size()) - 1)(rng);
      records.push_back(MakeRecord(i, d, chosen));
    }
    const auto curve = EpsilonAccuracy(records, grid);
    eps0 &= curve[0].accuracy == Accuracy(records);
    for (size_t k = 1; k < curve.size(); ++k) monotone &= curve[k].accuracy >= curve[k - 1].accuracy;
    monotone &= curve.back().accuracy == 1.0;
  }
  const double rel = RelativeError(0.5, 0.75);
  return {eps0 && monotone && rel == 0.5,
          std::string("eps(0)==accuracy: ") + (eps0 ? "yes" : "no") +
              ", monotone: " + (monotone ? "yes" : "no") +
              Fmt(", relative_error(0.5, 0.75) = %.17g", rel)};
}

RunConfig BaseRun(const Harness& h, const std::string& name) {
  RunConfig c;
  c.seed = h.seed;
  c.out = (fs::path(h.work_dir) / name).string();
  c.source_root = h.corpus_root;
  c.threads = h.threads;
  return c;
}

Outcome Overfit(Harness& h) {
  RunConfig c = BaseRun(h, "overfit");
  c.counts = {32, 8, 0};
  CmdGen(c, {Split::kTrain, Split::kVal});
  CmdRender(c, {Split::kTrain, Split::kVal});
  const auto train = LoadExamples(c, Split::kTrain);
  const auto val = LoadExamples(c, Split::kVal);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.seed = 3;
  tc.epochs = 10;
  const auto start = Clock::now();
  std::optional<TrainState> state;
  double acc = 0.0;
  while (!state || state->epochs_completed < 200) {
    state = Train(train, val, tc, std::move(state));
    acc = EvaluateModel(state->model, train).accuracy;
    if (acc >= 0.95) break;
  }
  const double t = Seconds(start);
  return {acc >= 0.95 && t < 900.0,
          Fmt("train accuracy %.4f after %.0f epochs, %.0f s", acc,
              state->epochs_completed, t)};
}

Outcome Headline(Harness& h) {
  RunConfig c = BaseRun(h, "headline");
  c.counts = h.headline_counts;
  c.train.epochs = h.headline_epochs;
  const auto start = Clock::now();
  const std::vector<Split> all = {Split::kTrain, Split::kVal, Split::kTest};
  CmdGen(c, all);
  const auto t_gen = Clock::now();
  CmdRender(c, all);
  const double t_render = Seconds(t_gen);
  h.headline = c;
  h.headline_ready = true;
  const auto t_train = Clock::now();
  CmdTrain(c, false, false, [](const EpochLog& e) {
    std::fprintf(stderr, "  epoch %d: train loss %.4f acc %.4f, val acc %.4f (%.0f s)\n",
                 e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy, e.seconds);
  });
  const double train_s = Seconds(t_train);
  const EvalSummary eval = CmdEval(c, SystemChoice::kBoth);
  const double total = Seconds(start);
  if (!eval.relative_error) {
    return {false, Fmt("baseline accuracy %.4f, relative error undefined",
                       eval.baseline->accuracy)};
  }
  std::ostringstream s;
  s << Fmt("relative error %.3f (baseline %.4f, dnn %.4f); ", *eval.relative_error,
           eval.baseline->accuracy, eval.dnn->accuracy)
    << Fmt("render %.0f s, train %.0f s, total %.0f s", t_render, train_s, total);
  return {*eval.relative_error < 0.9, s.str()};
}

Outcome Determinism(Harness& h) {
  std::string metrics[2];
  for (int run = 0; run < 2; ++run) {
    RunConfig c = BaseRun(h, "determinism_" + std::to_string(run));
    c.counts = {120, 30, 60};
    c.train.epochs = 3;
    c.train.batch_size = 16;
    const std::vector<Split> all = {Split::kTrain, Split::kVal, Split::kTest};
    CmdGen(c, all);
    CmdRender(c, all);
    CmdTrain(c, false);
    CmdEval(c, SystemChoice::kBoth);
    metrics[run] = HashFile(EvalDir(c) + "/metrics.json");
  }
  return {metrics[0] == metrics[1], "metrics.json sha1 " + metrics[0] + " vs " + metrics[1]};
}

std::string PrepareCorpus(const std::string& work_dir) {
  if (const char* env = std::getenv("DEVARB_GSC_ROOT"); env && *env) return env;
  const fs::path root =
      fs::path(work_dir) / ("synthetic_gscv2_" + testing::CorpusFingerprint({}));
  if (!fs::exists(root / "COMPLETE")) {
    fs::remove_all(root);
    WriteSyntheticGscv2(root.string());
    std::ofstream(root / "COMPLETE") << "ok\n";
  }
  return root.string();
}

}  // namespace
}  // namespace devarb

int main(int argc, char** argv) {
  using namespace devarb;
  CLI::App app{"devarb acceptance criteria"};
  Harness h;
  h.work_dir = "acceptance_work";
  bool strict = false;
  std::vector<int> only;
  app.add_option("--work-dir", h.work_dir, "Scratch directory for runs");
  app.add_option("--seed", h.seed, "Global seed");
  app.add_option("--threads", h.threads, "Worker threads (0: all cores)");
  app.add_option("--epochs", h.headline_epochs, "Epochs for the headline run");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--strict", strict, "Exit non-zero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(h.work_dir);
    h.corpus_root = PrepareCorpus(h.work_dir);
    h.catalog = IngestGscv2(h.corpus_root);
  } catch (const std::exception& e) {
    std::cerr << "harness setup failed: " << e.what() << "\n";
    return 2;
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(Harness&)> run;
  };
  // The headline run goes first among the data-dependent checks because
  // criteria 5 and 6 read its rendered features.
  const std::vector<Criterion> order = {
      {1, "image-source oracle", ImageSourceOracle},
      {2, "rt60 calibration", Rt60Calibration},
      {3, "free-field law", FreeField},
      {4, "noise-free reverberant baseline", NoiseFreeReverberant},
      {10, "desk-scale relative error", Headline},
      {5, "feature shape", FeatureShape},
      {6, "gradient check", GradientCheckCriterion},
      {7, "permutation equivariance", PermutationEquivariance},
      {8, "metric identities", MetricIdentities},
      {9, "overfit sanity", Overfit},
      {11, "end-to-end determinism", Determinism},
  };
  std::map<int, std::string> lines;
  bool all_pass = true;
  for (const Criterion& c : order) {
    const bool selected =
        only.empty() || std::find(only.begin(), only.end(), c.id) != only.end() ||
        (c.id == 10 && std::any_of(only.begin(), only.end(),
                                   [](int k) { return k == 5 || k == 6; }));
    if (!selected) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(h);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
         << "): " << o.detail << " [" << static_cast<int>(t) << " s]";
    std::cerr << line.str() << "\n";
    lines[c.id] = line.str();
    all_pass &= o.pass;
  }
  std::cout << "\n";
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout.flush();
  return strict && !all_pass ? 1 : 0;
}
