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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "devarb/acoustics.h"
#include "devarb/baseline.h"
#include "devarb/error.h"
#include "devarb/eval.h"
#include "devarb/features.h"
#include "devarb/pipeline.h"
#include "devarb/scenario.h"
#include "devarb/synthetic_corpus.h"

namespace py = pybind11;

namespace devarb {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> ToVector(const Array& a) {
  if (a.ndim() != 1) throw UsageError("expected a 1-D array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array ToArray(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Point3 ToPoint(const std::vector<double>& p) {
  if (p.size() != 3) throw UsageError("a point needs three coordinates");
  return {p[0], p[1], p[2]};
}

RunConfig ConfigFromJson(const std::string& text) {
  return RunConfigFromJson(nlohmann::json::parse(text));
}

std::vector<Split> ParseSplits(const std::vector<std::string>& names) {
  std::vector<Split> out;
  for (const auto& n : names) out.push_back(ParseSplit(n));
  return out;
}

}  // namespace
}  // namespace devarb

PYBIND11_MODULE(_devarb, m) {
  using namespace devarb;
  m.doc() = "Device arbitration simulation, baseline and evaluation.";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def(
      "sample_scenario",
      [](uint64_t seed, bool noise_free, bool anechoic) {
        GenConfig config;
        config.noise_free = noise_free;
        config.anechoic = anechoic;
        return ScenarioToJson(SampleScenario(seed, config)).dump();
      },
      py::arg("seed"), py::arg("noise_free") = false, py::arg("anechoic") = false,
      "Draws one scenario and returns it as a JSON string.");

  m.def(
      "ground_truth",
      [](const std::string& scenario_json) {
        const GroundTruth gt = ComputeGroundTruth(
            ScenarioFromJson(nlohmann::json::parse(scenario_json)));
        return py::make_tuple(gt.distances, gt.closest_index, gt.d1, gt.d2);
      },
      py::arg("scenario_json"));

  m.def(
      "simulate_rir",
      [](std::vector<double> room, std::vector<double> source,
         std::vector<double> mic, bool anechoic) {
        if (room.size() != 4) throw UsageError("room is (length, width, height, rt60)");
        const RoomSpec spec{room[0], room[1], room[2], room[3]};
        return ToArray(SimulateRir(spec, ToPoint(source), ToPoint(mic), anechoic).samples);
      },
      py::arg("room"), py::arg("source"), py::arg("mic"), py::arg("anechoic") = false);

  m.def(
      "measure_rt60",
      [](const Array& rir, int sample_rate) {
        const std::vector<double> v = ToVector(rir);
        return MeasureRt60(v, sample_rate);
      },
      py::arg("rir"), py::arg("sample_rate") = kSampleRate);

  m.def(
      "lfbe",
      [](const Array& waveform) {
        const std::vector<double> v = ToVector(waveform);
        const LfbeImage image = ComputeLfbe(v);
        py::array_t<float> out({image.frames, image.bands});
        std::copy(image.values.begin(), image.values.end(), out.mutable_data());
        return out;
      },
      py::arg("waveform"), "Log mel filterbank energies, frames x bands.");

  m.def(
      "baseline_arbitrate",
      [](const std::vector<Array>& waveforms) {
        std::vector<std::vector<double>> v;
        for (const auto& w : waveforms) v.push_back(ToVector(w));
        return BaselineArbitrate(v);
      },
      py::arg("waveforms"));

  m.def(
      "accuracy",
      [](const std::vector<std::vector<double>>& distances, const std::vector<int>& chosen) {
        if (distances.size() != chosen.size()) throw UsageError("length mismatch");
        std::vector<EvalRecord> records;
        for (size_t i = 0; i < chosen.size(); ++i) {
          records.push_back(MakeRecord(static_cast<int64_t>(i), distances[i], chosen[i]));
        }
        return Accuracy(records);
      },
      py::arg("distances"), py::arg("chosen"));

  m.def(
      "epsilon_accuracy",
      [](const std::vector<std::vector<double>>& distances, const std::vector<int>& chosen,
         const std::vector<double>& epsilons) {
        if (distances.size() != chosen.size()) throw UsageError("length mismatch");
        std::vector<EvalRecord> records;
        for (size_t i = 0; i < chosen.size(); ++i) {
          records.push_back(MakeRecord(static_cast<int64_t>(i), distances[i], chosen[i]));
        }
        std::vector<double> out;
        for (const EpsilonPoint& p : EpsilonAccuracy(records, epsilons)) out.push_back(p.accuracy);
        return out;
      },
      py::arg("distances"), py::arg("chosen"), py::arg("epsilons"));

  m.def("relative_error", &RelativeError, py::arg("acc_baseline"), py::arg("acc_dnn"));

  m.def(
      "write_synthetic_corpus",
      [](const std::string& root, int utterances, int speakers, double background_seconds,
         uint64_t seed) {
        SyntheticCorpusOptions options;
        options.num_utterances = utterances;
        options.num_speakers = speakers;
        options.background_seconds = background_seconds;
        options.dishes_seconds = background_seconds * 95.0 / 61.0;
        options.seed = seed;
        py::gil_scoped_release release;
        return WriteSyntheticGscv2(root, options).utterances;
      },
      py::arg("root"), py::arg("utterances") = 2377, py::arg("speakers") = 1000,
      py::arg("background_seconds") = 61.0, py::arg("seed") = 7,
      "Writes a GSCv2-shaped stand-in corpus and returns the utterance count.");

  m.def(
      "default_config",
      []() { return RunConfigJson(RunConfig{}).dump(); },
      "Default run configuration as a JSON string.");

  m.def(
      "gen",
      [](const std::string& config_json, const std::vector<std::string>& splits) {
        const GenSummary s = CmdGen(ConfigFromJson(config_json), ParseSplits(splits));
        return s.config_hash;
      },
      py::arg("config_json"),
      py::arg("splits") = std::vector<std::string>{"train", "val", "test"});

  m.def(
      "render",
      [](const std::string& config_json, const std::vector<std::string>& splits) {
        py::gil_scoped_release release;
        const RenderSummary s = CmdRender(ConfigFromJson(config_json), ParseSplits(splits));
        return std::vector<int64_t>(s.device_files.begin(), s.device_files.end());
      },
      py::arg("config_json"),
      py::arg("splits") = std::vector<std::string>{"train", "val", "test"});

  m.def(
      "train",
      [](const std::string& config_json, bool resume) {
        py::gil_scoped_release release;
        const TrainSummary s = CmdTrain(ConfigFromJson(config_json), resume);
        return py::make_tuple(s.epochs_completed, s.best_epoch, s.best_val_accuracy);
      },
      py::arg("config_json"), py::arg("resume") = false);

  m.def(
      "evaluate",
      [](const std::string& config_json, const std::string& system) {
        const RunConfig config = ConfigFromJson(config_json);
        const SystemChoice choice = ParseSystem(system);
        py::gil_scoped_release release;
        return CmdEval(config, choice).metrics.dump();
      },
      py::arg("config_json"), py::arg("system") = "both",
      "Runs evaluation and returns metrics.json as a string.");
}
