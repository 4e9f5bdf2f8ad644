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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "devarb/acoustics.h"
#include "devarb/baseline.h"
#include "devarb/error.h"
#include "devarb/hash.h"
#include "devarb/rng.h"
#include "devarb/wav.h"

namespace devarb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json EpsilonJson(double e) {
  if (std::isinf(e)) return "inf";
  return e;
}

double EpsilonFromJson(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteEpsilon;
    throw UsageError("epsilon must be a number or \"inf\"");
  }
  return j.get<double>();
}

// Copies `patch` over `base`, rejecting keys that `base` does not have.
void MergeStrict(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw UsageError(where + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown config key " + path);
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      MergeStrict(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::string ScenarioDirName(int64_t id) {
  std::ostringstream s;
  s << std::setw(6) << std::setfill('0') << id;
  return s.str();
}

void CheckHash(const std::string& what, const std::string& found,
               const std::string& expected, bool force) {
  if (found != expected && !force) {
    throw DataError(what + " was produced with data hash " + found +
                    ", current config has " + expected +
                    " (pass --force to accept)");
  }
}

std::vector<RenderedScenario> CheckedManifest(const RunConfig& config,
                                              Split split, bool force) {
  const std::string dir = DataDir(config, split);
  const json summary = ReadJsonFile((fs::path(dir) / "summary.json").string());
  CheckHash(std::string(SplitName(split)) + " dataset",
            summary.at("data_hash").get<std::string>(), config.DataHash(), force);
  return ReadDataManifest(dir);
}

}  // namespace

json RunConfigJson(const RunConfig& c) {
  json gen;
  to_json(gen, c.gen);
  json train = TrainConfigJson(c.train);
  train.erase("seed");  // derived from the global seed
  json eps = json::array();
  for (double e : c.epsilons) eps.push_back(EpsilonJson(e));
  return {
      {"seed", c.seed},
      {"counts", {{"train", c.counts[0]}, {"val", c.counts[1]}, {"test", c.counts[2]}}},
      {"source_root", c.source_root},
      {"out", c.out},
      {"gen", gen},
      {"render",
       {{"window_samples", c.render.window_samples},
        {"jitter_sigma", c.render.jitter_sigma},
        {"jitter_limit", c.render.jitter_limit},
        {"self_noise_db", c.render.self_noise_db.has_value()
                              ? json(*c.render.self_noise_db)
                              : json(nullptr)},
        {"active_frame", c.render.active_region.frame},
        {"active_threshold_db", c.render.active_region.threshold_db},
        {"write_wavs", c.write_wavs}}},
      {"train", train},
      {"eval", {{"epsilons", eps}, {"delta_bin_width", c.delta_bin_width}}},
      {"threads", c.threads},
  };
}

RunConfig RunConfigFromJson(const json& patch) {
  json j = RunConfigJson(RunConfig{});
  MergeStrict(j, patch, "");
  RunConfig c;
  try {
    c.seed = j.at("seed").get<uint64_t>();
    c.counts = {j["counts"]["train"].get<int64_t>(),
                j["counts"]["val"].get<int64_t>(),
                j["counts"]["test"].get<int64_t>()};
    c.source_root = j.at("source_root").get<std::string>();
    c.out = j.at("out").get<std::string>();
    c.gen = j.at("gen").get<GenConfig>();
    const json& r = j.at("render");
    c.render.window_samples = r.at("window_samples").get<int>();
    c.render.jitter_sigma = r.at("jitter_sigma").get<double>();
    c.render.jitter_limit = r.at("jitter_limit").get<double>();
    if (!r.at("self_noise_db").is_null()) {
      c.render.self_noise_db = r.at("self_noise_db").get<double>();
    }
    c.render.active_region.frame = r.at("active_frame").get<int>();
    c.render.active_region.threshold_db = r.at("active_threshold_db").get<double>();
    c.write_wavs = r.at("write_wavs").get<bool>();
    c.train = TrainConfigFromJson(j.at("train"));
    c.epsilons.clear();
    for (const json& e : j.at("eval").at("epsilons")) {
      c.epsilons.push_back(EpsilonFromJson(e));
    }
    c.delta_bin_width = j.at("eval").at("delta_bin_width").get<double>();
    c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  for (int64_t n : c.counts) {
    if (n < 0) throw UsageError("scenario counts must be >= 0");
  }
  if (!(c.delta_bin_width > 0.0)) throw UsageError("delta_bin_width must be > 0");
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

void SaveRunConfig(const RunConfig& config, const std::string& path) {
  WriteJsonFile(path, RunConfigJson(config));
}

std::string RunConfig::Hash() const {
  json j = RunConfigJson(*this);
  j.erase("out");
  j.erase("threads");
  j.erase("source_root");
  return HashHex(j.dump());
}

std::string RunConfig::DataHash() const {
  const json j = RunConfigJson(*this);
  const json data = {{"seed", j.at("seed")},
                     {"counts", j.at("counts")},
                     {"gen", j.at("gen")},
                     {"render", j.at("render")}};
  return HashHex(data.dump());
}

std::string ScenarioPath(const RunConfig& c, Split split) {
  return (fs::path(c.out) / "scenarios" / (std::string(SplitName(split)) + ".jsonl"))
      .string();
}
std::string DataDir(const RunConfig& c, Split split) {
  return (fs::path(c.out) / "data" / SplitName(split)).string();
}
std::string CheckpointDir(const RunConfig& c) {
  return (fs::path(c.out) / "model").string();
}
std::string EvalDir(const RunConfig& c) {
  return (fs::path(c.out) / "eval").string();
}

void ParallelFor(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::clamp<int64_t>(threads, 1, std::max<int64_t>(n, 1)));
  if (threads == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int64_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

uint64_t ScenarioSeed(uint64_t global_seed, Split split, int64_t index) {
  return DeriveSeed(global_seed, std::string("gen.") + SplitName(split),
                    static_cast<uint64_t>(index));
}

GenSummary CmdGen(const RunConfig& config, const std::vector<Split>& splits) {
  GenSummary summary;
  summary.config_hash = config.Hash();
  fs::create_directories(fs::path(config.out) / "scenarios");
  json files = json::object();
  for (Split split : splits) {
    const int64_t n = config.count(split);
    std::vector<ScenarioRecord> records(n);
    ParallelFor(n, config.threads, [&](int64_t i) {
      try {
        records[i] = {i, SampleScenario(ScenarioSeed(config.seed, split, i),
                                        config.gen)};
      } catch (const SamplingError& e) {
        throw SamplingError(std::string(SplitName(split)) + " scenario " +
                            std::to_string(i) + ": " + e.what());
      }
    });
    const std::string path = ScenarioPath(config, split);
    WriteScenariosJsonl(path, records);
    summary.counts[static_cast<int>(split)] = n;
    files[SplitName(split)] = {{"file", fs::path(path).filename().string()},
                               {"count", n},
                               {"fnv1a64", HashFile(path)}};
  }
  const fs::path manifest = fs::path(config.out) / "scenarios" / "manifest.json";
  json j = fs::exists(manifest) ? ReadJsonFile(manifest.string()) : json::object();
  if (j.value("data_hash", "") != config.DataHash()) j = json::object();
  j["config_hash"] = summary.config_hash;
  j["data_hash"] = config.DataHash();
  j["config"] = RunConfigJson(config);
  if (!j.contains("splits")) j["splits"] = json::object();
  for (auto it = files.begin(); it != files.end(); ++it) j["splits"][it.key()] = it.value();
  WriteJsonFile(manifest.string(), j);
  return summary;
}

json RenderedScenarioJson(const RenderedScenario& r) {
  return {{"id", r.id},
          {"split", SplitName(r.split)},
          {"label", r.label},
          {"num_devices", r.distances.size()},
          {"distances", r.distances},
          {"speech_segment", r.speech_segment},
          {"noise_segments", r.noise_segments},
          {"wav_files", r.wav_files},
          {"lfbe_files", r.lfbe_files},
          {"config_hash", r.config_hash}};
}

RenderedScenario RenderedScenarioFromJson(const json& j) {
  RenderedScenario r;
  r.id = j.at("id").get<int64_t>();
  r.split = ParseSplit(j.at("split").get<std::string>());
  r.label = j.at("label").get<int>();
  r.distances = j.at("distances").get<std::vector<double>>();
  r.speech_segment = j.at("speech_segment").get<std::string>();
  r.noise_segments = j.at("noise_segments").get<std::vector<std::string>>();
  r.wav_files = j.at("wav_files").get<std::vector<std::string>>();
  r.lfbe_files = j.at("lfbe_files").get<std::vector<std::string>>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

std::vector<RenderedScenario> ReadDataManifest(const std::string& data_dir) {
  const std::string path = (fs::path(data_dir) / "manifest.jsonl").string();
  std::ifstream in(path);
  if (!in) throw DataError("missing dataset manifest " + path);
  std::vector<RenderedScenario> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(RenderedScenarioFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

RenderedAudio RenderScenario(const Scenario& scenario, Split split,
                             const SourceCatalog& catalog,
                             const RenderConfig& render) {
  const std::vector<const AudioSegment*> speech_pool = catalog.SpeechIn(split);
  if (speech_pool.empty()) {
    throw DataError(std::string("no speech segments in split ") + SplitName(split));
  }
  RenderedAudio out;
  Rng speech_rng(DeriveSeed(scenario.seed, "render.speech", 0));
  std::uniform_int_distribution<size_t> pick_speech(0, speech_pool.size() - 1);
  const AudioSegment& speech = *speech_pool[pick_speech(speech_rng)];
  out.speech_segment = speech.id;

  std::vector<std::vector<double>> noises;
  if (!scenario.noises.empty()) {
    const std::vector<const AudioSegment*> noise_pool = catalog.BackgroundIn(split);
    if (noise_pool.empty()) {
      throw DataError(std::string("no background segments in split ") +
                      SplitName(split));
    }
    std::uniform_int_distribution<size_t> pick(0, noise_pool.size() - 1);
    for (size_t j = 0; j < scenario.noises.size(); ++j) {
      Rng rng(DeriveSeed(scenario.seed, "render.background", j));
      const AudioSegment& seg = *noise_pool[pick(rng)];
      out.noise_segments.push_back(seg.id);
      noises.push_back(LoadSegment(seg));
    }
  }
  const RirSet rirs = SimulateScenarioRirs(scenario, !scenario.noises.empty());
  out.waveforms =
      RenderDeviceAudio(scenario, rirs, LoadSegment(speech), noises,
                        DeriveSeed(scenario.seed, "render", 0), render);
  return out;
}

RenderSummary CmdRender(const RunConfig& config, const std::vector<Split>& splits) {
  if (config.source_root.empty()) {
    throw UsageError("source_root is required for rendering");
  }
  const std::string hash = config.Hash();
  const std::string data_hash = config.DataHash();
  const json scen_manifest = ReadJsonFile(
      (fs::path(config.out) / "scenarios" / "manifest.json").string());
  CheckHash("scenario set", scen_manifest.at("data_hash").get<std::string>(),
            data_hash, false);
  const SourceCatalog catalog = IngestGscv2(config.source_root);
  std::map<std::string, Split> segment_split;
  for (const AudioSegment& s : catalog.speech) segment_split[s.id] = s.split;
  for (const AudioSegment& s : catalog.background) segment_split[s.id] = s.split;
  const LfbeExtractor extractor;
  const std::string feature_hash = extractor.config().Hash();

  RenderSummary summary;
  for (Split split : splits) {
    const std::vector<ScenarioRecord> records =
        ReadScenariosJsonl(ScenarioPath(config, split));
    const fs::path dir(DataDir(config, split));
    fs::create_directories(dir);
    std::vector<RenderedScenario> rendered(records.size());
    ParallelFor(static_cast<int64_t>(records.size()), config.threads, [&](int64_t i) {
      const ScenarioRecord& rec = records[i];
      RenderedAudio audio = RenderScenario(rec.scenario, split, catalog, config.render);
      const GroundTruth truth = ComputeGroundTruth(rec.scenario);
      RenderedScenario& r = rendered[i];
      r.id = rec.id;
      r.split = split;
      r.label = truth.closest_index;
      r.distances = truth.distances;
      r.speech_segment = audio.speech_segment;
      r.noise_segments = audio.noise_segments;
      r.config_hash = data_hash;
      const std::string sub = ScenarioDirName(rec.id);
      fs::create_directories(dir / sub);
      for (const DeviceWaveform& w : audio.waveforms) {
        const std::string stem = sub + "/device" + std::to_string(w.device_index);
        if (config.write_wavs) {
          WriteWavFloat32((dir / (stem + ".wav")).string(), w.samples, kSampleRate);
          r.wav_files.push_back(stem + ".wav");
        }
        const LfbeImage image = extractor.Compute(w.samples);
        if (image.frames != extractor.config().NumFrames() ||
            image.bands != extractor.config().num_bands) {
          throw NumericError("unexpected LFBE shape");
        }
        for (float v : image.values) {
          if (!std::isfinite(v)) throw NumericError("non-finite LFBE value in " + stem);
        }
        WriteLfbe((dir / (stem + ".lfbe.bin")).string(), image, feature_hash);
        r.lfbe_files.push_back(stem + ".lfbe.bin");
      }
    });

    // Split hygiene: every referenced source segment must come from this split.
    int64_t violations = 0, checked = 0;
    for (const RenderedScenario& r : rendered) {
      std::vector<std::string> ids = r.noise_segments;
      ids.push_back(r.speech_segment);
      for (const std::string& id : ids) {
        ++checked;
        auto it = segment_split.find(id);
        if (it == segment_split.end() || it->second != split) ++violations;
      }
    }
    summary.split_violations += violations;
    if (violations > 0) {
      throw DataError(std::to_string(violations) + " split violations in " +
                      SplitName(split));
    }

    std::ofstream manifest(dir / "manifest.jsonl");
    if (!manifest) throw DataError("cannot write manifest in " + dir.string());
    int64_t files = 0;
    for (const RenderedScenario& r : rendered) {
      manifest << RenderedScenarioJson(r).dump() << '\n';
      files += static_cast<int64_t>(r.lfbe_files.size());
    }
    summary.scenarios[static_cast<int>(split)] = static_cast<int64_t>(rendered.size());
    summary.device_files[static_cast<int>(split)] = files;
    WriteJsonFile((dir / "summary.json").string(),
                  {{"config_hash", hash},
                   {"data_hash", data_hash},
                   {"feature_config_hash", feature_hash},
                   {"feature_config", LfbeConfigJson(extractor.config())},
                   {"split", SplitName(split)},
                   {"scenarios", rendered.size()},
                   {"device_files", files},
                   {"split_audit", {{"checked", checked}, {"violations", violations}}}});
  }
  return summary;
}

std::vector<ArbitrationExample> LoadExamples(const RunConfig& config, Split split) {
  const std::vector<RenderedScenario> rows = ReadDataManifest(DataDir(config, split));
  const fs::path dir(DataDir(config, split));
  std::vector<ArbitrationExample> out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    out[i].label = rows[i].label;
    for (const std::string& f : rows[i].lfbe_files) {
      out[i].devices.push_back(ReadLfbe((dir / f).string()));
    }
    if (out[i].devices.size() != rows[i].distances.size()) {
      throw DataError("scenario " + std::to_string(rows[i].id) +
                      ": feature count does not match device count");
    }
  }
  return out;
}

TrainSummary CmdTrain(const RunConfig& config, bool resume, bool force,
                      const EpochCallback& on_epoch) {
  const std::string hash = config.Hash();
  CheckedManifest(config, Split::kTrain, force);
  CheckedManifest(config, Split::kVal, force);
  const std::vector<ArbitrationExample> train = LoadExamples(config, Split::kTrain);
  const std::vector<ArbitrationExample> val = LoadExamples(config, Split::kVal);
  if (train.empty() || val.empty()) {
    throw DataError("training needs non-empty train and val datasets");
  }
  TrainConfig tc = config.train;
  tc.seed = DeriveSeed(config.seed, "train", 0);
  std::optional<TrainState> start;
  const std::string dir = CheckpointDir(config);
  if (resume) {
    json manifest;
    start = LoadCheckpoint(dir, &manifest);
    CheckHash("checkpoint", manifest.at("data_hash").get<std::string>(),
              config.DataHash(), force);
  }
  TrainState state = Train(train, val, tc, std::move(start), on_epoch);
  SaveCheckpoint(dir, state, tc, hash, {{"data_hash", config.DataHash()}});
  WriteTrainLogCsv((fs::path(dir) / "train_log.csv").string(), state.log);
  return {state.epochs_completed, state.best_epoch, state.best_val_accuracy};
}

SystemChoice ParseSystem(const std::string& name) {
  if (name == "baseline") return SystemChoice::kBaseline;
  if (name == "dnn") return SystemChoice::kDnn;
  if (name == "both") return SystemChoice::kBoth;
  throw UsageError("system must be baseline, dnn or both");
}

EvalSummary CmdEval(const RunConfig& config, SystemChoice system, bool force) {
  const std::string hash = config.Hash();
  const std::vector<RenderedScenario> rows =
      CheckedManifest(config, Split::kTest, force);
  const fs::path data(DataDir(config, Split::kTest));
  const fs::path out_dir(EvalDir(config));
  fs::create_directories(out_dir);
  EvalSummary summary;
  summary.metrics = {{"config_hash", hash},
                     {"data_hash", config.DataHash()},
                     {"test_scenarios", rows.size()}};

  auto emit = [&](const EvalReport& report) {
    const fs::path d = out_dir / report.system;
    fs::create_directories(d);
    WriteJsonFile((d / "report.json").string(), ReportJson(report));
    WriteDeltaCsv((d / "delta_curve.csv").string(), report.delta_curve);
    WriteEpsilonCsv((d / "epsilon_curve.csv").string(), report.epsilon_curve);
    summary.metrics[report.system] = ReportJson(report, false);
  };

  const bool want_baseline = system != SystemChoice::kDnn;
  const bool want_dnn = system != SystemChoice::kBaseline;
  // Checkpoint problems surface before any work is done.
  std::optional<ArbitratorModel> model;
  if (want_dnn) {
    const std::string dir = CheckpointDir(config);
    if (!fs::exists(fs::path(dir) / "manifest.json")) {
      throw DataError("dnn evaluation needs a checkpoint in " + dir);
    }
    json manifest;
    model = LoadBestModel(dir, &manifest);
    CheckHash("checkpoint", manifest.at("data_hash").get<std::string>(),
              config.DataHash(), force);
  }

  if (want_baseline) {
    std::vector<EvalRecord> records(rows.size());
    ParallelFor(static_cast<int64_t>(rows.size()), config.threads, [&](int64_t i) {
      const RenderedScenario& r = rows[i];
      if (r.wav_files.size() != r.distances.size()) {
        throw DataError("baseline evaluation needs device WAVs (write_wavs)");
      }
      std::vector<std::vector<double>> waves;
      for (const std::string& f : r.wav_files) {
        waves.push_back(ReadWav((data / f).string()).samples);
      }
      records[i] = MakeRecord(r.id, r.distances, BaselineArbitrate(waves));
    });
    summary.baseline = BuildReport("baseline", std::move(records), config.epsilons,
                                   config.delta_bin_width);
    emit(*summary.baseline);
  }
  if (want_dnn) {
    const std::vector<ArbitrationExample> examples = LoadExamples(config, Split::kTest);
    const Evaluation ev = EvaluateModel(*model, examples, config.train.batch_size);
    std::vector<EvalRecord> records;
    for (size_t i = 0; i < rows.size(); ++i) {
      records.push_back(MakeRecord(rows[i].id, rows[i].distances, ev.predictions[i]));
    }
    summary.dnn = BuildReport("dnn", std::move(records), config.epsilons,
                              config.delta_bin_width);
    emit(*summary.dnn);
  }
  if (summary.baseline && summary.dnn) {
    // Undefined for a perfect baseline; reported as null.
    if (summary.baseline->accuracy < 1.0) {
      summary.relative_error =
          RelativeError(summary.baseline->accuracy, summary.dnn->accuracy);
      summary.metrics["relative_error"] = *summary.relative_error;
    } else {
      summary.metrics["relative_error"] = nullptr;
    }
    summary.metrics["comparison"] = ComparisonJson(*summary.baseline, *summary.dnn);
  }
  WriteJsonFile((out_dir / "metrics.json").string(), summary.metrics);
  return summary;
}

std::string CmdReport(const RunConfig& config) {
  const json m = ReadJsonFile((fs::path(EvalDir(config)) / "metrics.json").string());
  std::ostringstream s;
  s << std::fixed << std::setprecision(4);
  s << "config " << m.value("config_hash", "?") << ", "
    << m.value("test_scenarios", 0) << " test scenarios\n";
  for (const char* sys : {"baseline", "dnn"}) {
    if (!m.contains(sys)) continue;
    const json& r = m.at(sys);
    s << "\n" << sys << "\n  accuracy " << r.at("accuracy").get<double>() << "\n";
    s << "  epsilon-accuracy";
    for (const json& p : r.at("epsilon_curve")) {
      const json& e = p.at("epsilon");
      s << "  " << (e.is_string() ? e.get<std::string>() : e.dump()) << ":"
        << p.at("accuracy").get<double>();
    }
    s << "\n  delta-accuracy";
    for (const json& b : r.at("delta_curve")) {
      s << "  [" << b.at("lower").get<double>() << "):";
      if (b.at("accuracy").is_null()) {
        s << "-";
      } else {
        s << b.at("accuracy").get<double>();
      }
      s << "/" << b.at("count").get<int64_t>();
    }
    s << "\n";
  }
  if (m.contains("relative_error")) {
    const json& re = m.at("relative_error");
    s << "\nrelative error rate (dnn over baseline) ";
    if (re.is_number()) {
      s << re.get<double>();
    } else {
      s << re.dump();
    }
    s << "\n";
  }
  const std::string text = s.str();
  std::ofstream out(fs::path(EvalDir(config)) / "report.txt");
  out << text;
  return text;
}

}  // namespace devarb
