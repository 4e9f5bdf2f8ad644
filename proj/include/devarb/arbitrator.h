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

#ifndef DEVARB_ARBITRATOR_H_
#define DEVARB_ARBITRATOR_H_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "devarb/features.h"
#include "json.hpp"

namespace devarb {

// Per-device conv feature extractor followed by the set classifier
// logit_j = g([z_j; sum_i z_i]).
struct Architecture {
  int input_frames = 201;
  int input_bands = 64;
  std::vector<int> conv_channels = {16, 32, 48, 64, 64};
  int kernel = 3;
  int stride = 2;
  int padding = 1;
  int embedding_dim = 128;
  int hidden_dim = 128;
  // Fixed input affine: x' = (lfbe - input_offset) * input_scale. Raw LFBE
  // values span roughly [-23, 2]; this maps them near [-2, 3].
  double input_offset = -12.0;
  double input_scale = 0.2;
  // Replaces every ReLU by the identity (used for exact gradient checks).
  bool linear = false;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

nlohmann::json ArchitectureJson(const Architecture& arch);
Architecture ArchitectureFromJson(const nlohmann::json& j);

struct ParamInfo {
  std::string name;
  std::vector<int> shape;  // row-major order of the stored values
  size_t offset = 0;
  size_t size = 0;
};

struct ConvGeometry {
  int cin, cout, hin, win, hout, wout;
  int in_positions() const { return hin * win; }
  int out_positions() const { return hout * wout; }
};

// A set of device feature images with the index of the closest device.
struct ArbitrationExample {
  std::vector<LfbeImage> devices;
  int label = 0;
};

template <typename T>
class ArbitratorNet {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  explicit ArbitratorNet(const Architecture& arch = {});

  const Architecture& arch() const { return arch_; }
  size_t param_count() const { return params_.size(); }
  size_t extractor_param_count() const;
  const std::vector<ParamInfo>& param_infos() const { return infos_; }
  const std::vector<ConvGeometry>& conv_geometry() const { return geometry_; }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }

  // He-uniform weights, zero biases.
  void InitHeUniform(uint64_t seed);

  // Embeddings as columns, one per image.
  Matrix Embed(std::span<const LfbeImage* const> images) const;
  Eigen::VectorXd Logits(const Matrix& embeddings) const;

  // Mean cross-entropy over the examples; when `grad` is non-null it receives
  // d(loss)/d(params). `logits` (optional) receives one vector per example.
  T LossAndGradient(std::span<const ArbitrationExample* const> batch,
                    std::vector<T>* grad,
                    std::vector<Vector>* logits = nullptr) const;

  template <typename U>
  ArbitratorNet<U> Cast() const {
    ArbitratorNet<U> out(arch_);
    auto dst = out.params();
    for (size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  std::string Summary() const;

 private:
  struct Forward;
  using MapMatrix = Eigen::Map<Matrix>;
  using ConstMapMatrix = Eigen::Map<const Matrix>;

  ConstMapMatrix Weight(int index, int rows, int cols) const;
  void RunForward(std::span<const LfbeImage* const> images, Forward& f) const;

  Architecture arch_;
  std::vector<ConvGeometry> geometry_;
  std::vector<ParamInfo> infos_;
  // Aligned so that vectorized kernels take the same code path for every
  // instance; with plain heap storage the peeling, and hence the rounding,
  // would depend on where the allocation landed.
  std::vector<T, Eigen::aligned_allocator<T>> params_;
};

using ArbitratorModel = ArbitratorNet<float>;
using Embedding = std::vector<float>;

struct ArbitrationOutput {
  std::vector<double> logits;
  std::vector<double> probabilities;
};

Embedding ExtractEmbedding(const LfbeImage& features,
                           const ArbitratorModel& model);
ArbitrationOutput Classify(const std::vector<Embedding>& embeddings,
                           const ArbitratorModel& model);
// Embeds every device and classifies; the argmax (ties to the lowest index)
// is the arbitration decision.
ArbitrationOutput Arbitrate(const std::vector<LfbeImage>& devices,
                            const ArbitratorModel& model);
int ArgMax(std::span<const double> values);

std::vector<double> Softmax(std::span<const double> logits);

}  // namespace devarb

#endif  // DEVARB_ARBITRATOR_H_
