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

#include "devarb/arbitrator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "devarb/error.h"
#include "devarb/rng.h"
#include "gtest/gtest.h"

namespace devarb {
namespace {

LfbeImage RandomImage(Rng& rng, double level = -8.0) {
  std::normal_distribution<double> g(level, 3.0);
  LfbeImage image;
  image.frames = 201;
  image.bands = 64;
  image.values.resize(201 * 64);
  for (float& v : image.values) v = static_cast<float>(g(rng));
  return image;
}

const ArbitratorModel& Model() {
  static const ArbitratorModel* model = [] {
    auto* m = new ArbitratorModel;
    m->InitHeUniform(42);
    // Non-zero biases so that every term participates.
    Rng rng(7);
    std::uniform_real_distribution<float> u(-0.05f, 0.05f);
    for (const ParamInfo& info : m->param_infos()) {
      if (info.shape.size() != 1) continue;
      for (size_t i = 0; i < info.size; ++i) m->params()[info.offset + i] = u(rng);
    }
    return m;
  }();
  return *model;
}

TEST(ArchitectureTest, ParameterCountsMatchLayerFormulas) {
  const Architecture arch;
  // Conv layer: k*k*cin*cout weights + cout biases; global average pooling
  // feeds the embedding layer, then g maps [z_j; sum z] -> hidden -> 1.
  size_t conv = 0;
  int cin = 1;
  for (int c : arch.conv_channels) {
    conv += static_cast<size_t>(9 * cin * c + c);
    cin = c;
  }
  const size_t embed = static_cast<size_t>(cin * 128 + 128);
  const size_t head = static_cast<size_t>(256 * 128 + 128 + 128 + 1);
  EXPECT_EQ(conv + embed, 91632u);
  EXPECT_EQ(conv + embed + head, 124657u);
  const ArbitratorModel model;
  EXPECT_EQ(model.extractor_param_count(), conv + embed);
  EXPECT_EQ(model.param_count(), conv + embed + head);
  EXPECT_LT(model.param_count(), 200000u);
  EXPECT_NE(model.Summary().find("124657"), std::string::npos);
}

TEST(ArchitectureTest, ConvGeometryHalvesEachLayer) {
  const ArbitratorModel model;
  const auto& g = model.conv_geometry();
  ASSERT_EQ(g.size(), 5u);
  const int want_h[] = {101, 51, 26, 13, 7};
  const int want_w[] = {32, 16, 8, 4, 2};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(g[i].hout, want_h[i]);
    EXPECT_EQ(g[i].wout, want_w[i]);
  }
}

TEST(ArchitectureTest, JsonRoundTrip) {
  Architecture a;
  a.conv_channels = {4, 4};
  a.linear = true;
  EXPECT_EQ(ArchitectureFromJson(ArchitectureJson(a)), a);
}

TEST(EmbeddingTest, LengthAndDeterminism) {
  Rng rng(1);
  const LfbeImage image = RandomImage(rng);
  const Embedding a = ExtractEmbedding(image, Model());
  const Embedding b = ExtractEmbedding(image, Model());
  EXPECT_EQ(a.size(), 128u);
  EXPECT_EQ(a, b);
  for (float v : a) EXPECT_TRUE(std::isfinite(v));
}

TEST(EmbeddingTest, BatchedMatchesSingle) {
  Rng rng(2);
  const std::vector<LfbeImage> images = {RandomImage(rng), RandomImage(rng, -4.0),
                                         RandomImage(rng, -15.0)};
  std::vector<const LfbeImage*> ptrs;
  for (const auto& im : images) ptrs.push_back(&im);
  const auto z = Model().Embed(ptrs);
  for (size_t j = 0; j < images.size(); ++j) {
    const Embedding single = ExtractEmbedding(images[j], Model());
    for (int i = 0; i < 128; ++i) EXPECT_NEAR(z(i, j), single[i], 1e-5);
  }
}

TEST(ClassifyTest, SingleDeviceIsCertain) {
  Rng rng(3);
  const auto out = Classify({ExtractEmbedding(RandomImage(rng), Model())}, Model());
  ASSERT_EQ(out.probabilities.size(), 1u);
  EXPECT_DOUBLE_EQ(out.probabilities[0], 1.0);
}

TEST(ClassifyTest, IdenticalEmbeddingsAreUniform) {
  Rng rng(4);
  const Embedding z = ExtractEmbedding(RandomImage(rng), Model());
  for (size_t n = 2; n <= 5; ++n) {
    const auto out = Classify(std::vector<Embedding>(n, z), Model());
    for (double p : out.probabilities) EXPECT_NEAR(p, 1.0 / n, 1e-12);
  }
}

TEST(ClassifyTest, PermutationEquivariance) {
  Rng rng(5);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::uniform_int_distribution<int> count(1, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = count(rng);
    std::vector<Embedding> z(n, Embedding(128));
    for (auto& e : z) for (float& v : e) v = g(rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Embedding> zp;
    for (int p : perm) zp.push_back(z[p]);
    const auto out = Classify(z, Model());
    const auto outp = Classify(zp, Model());
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      worst = std::max(worst, std::abs(outp.logits[j] - out.logits[perm[j]]));
      worst = std::max(worst, std::abs(outp.probabilities[j] -
                                       out.probabilities[perm[j]]));
      EXPECT_GE(outp.probabilities[j], 0.0);
      sum += outp.probabilities[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ClassifyTest, ArbitrateMatchesEmbedThenClassify) {
  Rng rng(6);
  const std::vector<LfbeImage> devices = {RandomImage(rng), RandomImage(rng, -5.0)};
  const auto direct = Arbitrate(devices, Model());
  const auto staged = Classify({ExtractEmbedding(devices[0], Model()),
                                ExtractEmbedding(devices[1], Model())},
                               Model());
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(direct.logits[j], staged.logits[j], 1e-5);
  }
}

TEST(ClassifyTest, Errors) {
  EXPECT_THROW(Classify({}, Model()), UsageError);
  EXPECT_THROW(Classify({Embedding(5)}, Model()), UsageError);
  EXPECT_THROW(Arbitrate({}, Model()), UsageError);
}

TEST(SoftmaxTest, SumsToOneAndIsStable) {
  const std::vector<double> big = {1000.0, 1001.0, 999.0};
  const auto p = Softmax(big);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[1] / p[0], std::exp(1.0), 1e-9);
  EXPECT_THROW(Softmax(std::vector<double>{}), UsageError);
}

TEST(ArgMaxTest, TiesPickLowestIndex) {
  EXPECT_EQ(ArgMax(std::vector<double>{1.0, 3.0, 3.0}), 1);
  EXPECT_EQ(ArgMax(std::vector<double>{2.0}), 0);
  EXPECT_THROW(ArgMax(std::vector<double>{}), UsageError);
}

}  // namespace
}  // namespace devarb
