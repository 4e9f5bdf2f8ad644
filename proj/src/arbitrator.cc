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
#include <random>
#include <sstream>

#include "devarb/error.h"
#include "devarb/rng.h"

namespace devarb {

nlohmann::json ArchitectureJson(const Architecture& a) {
  return {{"input_frames", a.input_frames},
          {"input_bands", a.input_bands},
          {"conv_channels", a.conv_channels},
          {"kernel", a.kernel},
          {"stride", a.stride},
          {"padding", a.padding},
          {"embedding_dim", a.embedding_dim},
          {"hidden_dim", a.hidden_dim},
          {"input_offset", a.input_offset},
          {"input_scale", a.input_scale},
          {"linear", a.linear}};
}

Architecture ArchitectureFromJson(const nlohmann::json& j) {
  Architecture d, a;
  a.input_frames = j.value("input_frames", d.input_frames);
  a.input_bands = j.value("input_bands", d.input_bands);
  a.conv_channels = j.value("conv_channels", d.conv_channels);
  a.kernel = j.value("kernel", d.kernel);
  a.stride = j.value("stride", d.stride);
  a.padding = j.value("padding", d.padding);
  a.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  a.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  a.input_offset = j.value("input_offset", d.input_offset);
  a.input_scale = j.value("input_scale", d.input_scale);
  a.linear = j.value("linear", d.linear);
  return a;
}

namespace {

// Column-major activations: one column per (image, position) holding all
// channels, so every spatial position is a contiguous channel vector.
template <typename T>
void Im2Col(const T* in, const ConvGeometry& g, int k, int s, int p,
            int images, T* cols) {
  const int kdim = k * k * g.cin;
  const int pin = g.in_positions();
  const int pout = g.out_positions();
  for (int b = 0; b < images; ++b) {
    for (int oy = 0; oy < g.hout; ++oy) {
      for (int ox = 0; ox < g.wout; ++ox) {
        T* dst = cols + static_cast<size_t>(b * pout + oy * g.wout + ox) * kdim;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * s - p + ky;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * s - p + kx;
            T* d = dst + (ky * k + kx) * g.cin;
            if (iy < 0 || iy >= g.hin || ix < 0 || ix >= g.win) {
              std::fill_n(d, g.cin, T(0));
            } else {
              const T* src =
                  in + static_cast<size_t>(b * pin + iy * g.win + ix) * g.cin;
              std::copy_n(src, g.cin, d);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T* cols, const ConvGeometry& g, int k, int s, int p,
            int images, T* in) {
  const int kdim = k * k * g.cin;
  const int pin = g.in_positions();
  const int pout = g.out_positions();
  for (int b = 0; b < images; ++b) {
    for (int oy = 0; oy < g.hout; ++oy) {
      for (int ox = 0; ox < g.wout; ++ox) {
        const T* src =
            cols + static_cast<size_t>(b * pout + oy * g.wout + ox) * kdim;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * s - p + ky;
          if (iy < 0 || iy >= g.hin) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * s - p + kx;
            if (ix < 0 || ix >= g.win) continue;
            const T* c = src + (ky * k + kx) * g.cin;
            T* d = in + static_cast<size_t>(b * pin + iy * g.win + ix) * g.cin;
            for (int ci = 0; ci < g.cin; ++ci) d[ci] += c[ci];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
struct ArbitratorNet<T>::Forward {
  int images = 0;
  std::vector<Matrix> acts;  // acts[0] is the normalized input
  Matrix pooled;
  Matrix embeddings;
};

template <typename T>
ArbitratorNet<T>::ArbitratorNet(const Architecture& arch) : arch_(arch) {
  if (arch.conv_channels.empty() || arch.kernel < 1 || arch.stride < 1 ||
      arch.embedding_dim < 1 || arch.hidden_dim < 1) {
    throw UsageError("invalid architecture");
  }
  size_t offset = 0;
  auto add = [&](std::string name, std::vector<int> shape) {
    size_t size = 1;
    for (int d : shape) size *= static_cast<size_t>(d);
    infos_.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  int h = arch.input_frames, w = arch.input_bands, cin = 1;
  for (size_t l = 0; l < arch.conv_channels.size(); ++l) {
    const int cout = arch.conv_channels[l];
    ConvGeometry g{cin, cout, h, w, 0, 0};
    g.hout = (h + 2 * arch.padding - arch.kernel) / arch.stride + 1;
    g.wout = (w + 2 * arch.padding - arch.kernel) / arch.stride + 1;
    if (g.hout < 1 || g.wout < 1) throw UsageError("input too small for net");
    geometry_.push_back(g);
    const std::string prefix = "conv" + std::to_string(l + 1);
    add(prefix + ".weight", {arch.kernel, arch.kernel, cin, cout});
    add(prefix + ".bias", {cout});
    h = g.hout;
    w = g.wout;
    cin = cout;
  }
  add("fc.weight", {cin, arch.embedding_dim});
  add("fc.bias", {arch.embedding_dim});
  add("g1.weight", {2 * arch.embedding_dim, arch.hidden_dim});
  add("g1.bias", {arch.hidden_dim});
  add("g2.weight", {arch.hidden_dim, 1});
  add("g2.bias", {1});
  params_.assign(offset, T(0));
}

template <typename T>
size_t ArbitratorNet<T>::extractor_param_count() const {
  size_t n = 0;
  for (const ParamInfo& p : infos_) {
    if (p.name.rfind("g", 0) != 0) n += p.size;
  }
  return n;
}

template <typename T>
void ArbitratorNet<T>::InitHeUniform(uint64_t seed) {
  Rng rng = MakeRng(seed, "model.init");
  for (const ParamInfo& p : infos_) {
    T* dst = params_.data() + p.offset;
    if (p.shape.size() == 1) {
      std::fill_n(dst, p.size, T(0));
      continue;
    }
    // Every weight's fan-in is the product of all but the output dimension.
    size_t fan_in = p.size / static_cast<size_t>(p.shape.back());
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (size_t i = 0; i < p.size; ++i) dst[i] = static_cast<T>(dist(rng));
  }
}

template <typename T>
typename ArbitratorNet<T>::ConstMapMatrix ArbitratorNet<T>::Weight(
    int index, int rows, int cols) const {
  return ConstMapMatrix(params_.data() + infos_[index].offset, rows, cols);
}

template <typename T>
void ArbitratorNet<T>::RunForward(std::span<const LfbeImage* const> images,
                                  Forward& f) const {
  const int n = static_cast<int>(images.size());
  const int p0 = arch_.input_frames * arch_.input_bands;
  f.images = n;
  f.acts.assign(geometry_.size() + 1, Matrix());
  Matrix& input = f.acts[0];
  input.resize(1, static_cast<Eigen::Index>(n) * p0);
  const T offset = static_cast<T>(arch_.input_offset);
  const T scale = static_cast<T>(arch_.input_scale);
  for (int b = 0; b < n; ++b) {
    const LfbeImage& img = *images[b];
    if (img.frames != arch_.input_frames || img.bands != arch_.input_bands) {
      throw UsageError("feature image shape does not match the model");
    }
    T* dst = input.data() + static_cast<size_t>(b) * p0;
    for (int i = 0; i < p0; ++i) {
      dst[i] = (static_cast<T>(img.values[i]) - offset) * scale;
    }
  }
  const int k = arch_.kernel;
  Matrix cols;
  for (size_t l = 0; l < geometry_.size(); ++l) {
    const ConvGeometry& g = geometry_[l];
    const int kdim = k * k * g.cin;
    cols.resize(kdim, static_cast<Eigen::Index>(n) * g.out_positions());
    Im2Col(f.acts[l].data(), g, k, arch_.stride, arch_.padding, n, cols.data());
    const auto weight = Weight(2 * l, g.cout, kdim);
    const auto bias = Weight(2 * l + 1, g.cout, 1);
    Matrix& out = f.acts[l + 1];
    out.noalias() = weight * cols;
    out.colwise() += bias.col(0);
    if (!arch_.linear) out = out.cwiseMax(T(0));
  }
  const ConvGeometry& last = geometry_.back();
  const int positions = last.out_positions();
  f.pooled.resize(last.cout, n);
  for (int b = 0; b < n; ++b) {
    f.pooled.col(b) =
        f.acts.back().middleCols(static_cast<Eigen::Index>(b) * positions,
                                 positions)
            .rowwise()
            .sum() /
        static_cast<T>(positions);
  }
  const int fc = 2 * static_cast<int>(geometry_.size());
  f.embeddings.noalias() = Weight(fc, arch_.embedding_dim, last.cout) * f.pooled;
  f.embeddings.colwise() += Weight(fc + 1, arch_.embedding_dim, 1).col(0);
}

template <typename T>
typename ArbitratorNet<T>::Matrix ArbitratorNet<T>::Embed(
    std::span<const LfbeImage* const> images) const {
  Forward f;
  RunForward(images, f);
  return std::move(f.embeddings);
}

template <typename T>
Eigen::VectorXd ArbitratorNet<T>::Logits(
    const Matrix& z) const {
  const int d = arch_.embedding_dim;
  if (z.rows() != d || z.cols() < 1) throw UsageError("bad embedding set");
  const int g1 = 2 * static_cast<int>(geometry_.size()) + 2;
  // Evaluated in double: the pooled sum is then exact for any realistic set
  // size, so reordering the devices reorders the logits to within 1e-12.
  const Eigen::MatrixXd zd = z.template cast<double>();
  Eigen::MatrixXd u(2 * d, z.cols());
  u.topRows(d) = zd;
  u.bottomRows(d).colwise() = zd.rowwise().sum();
  Eigen::MatrixXd hidden =
      Weight(g1, arch_.hidden_dim, 2 * d).template cast<double>() * u;
  hidden.colwise() += Weight(g1 + 1, arch_.hidden_dim, 1).col(0).template cast<double>();
  if (!arch_.linear) hidden = hidden.cwiseMax(0.0);
  Eigen::MatrixXd logits =
      Weight(g1 + 2, 1, arch_.hidden_dim).template cast<double>() * hidden;
  logits.array() += static_cast<double>(params_[infos_[g1 + 3].offset]);
  return logits.row(0).transpose();
}

template <typename T>
T ArbitratorNet<T>::LossAndGradient(
    std::span<const ArbitrationExample* const> batch, std::vector<T>* grad,
    std::vector<Vector>* logits_out) const {
  if (batch.empty()) throw UsageError("empty batch");
  std::vector<const LfbeImage*> images;
  std::vector<int> set_offset, set_size;
  for (const ArbitrationExample* ex : batch) {
    if (ex->devices.empty()) throw UsageError("example without devices");
    if (ex->label < 0 || ex->label >= static_cast<int>(ex->devices.size())) {
      throw UsageError("label out of range");
    }
    set_offset.push_back(static_cast<int>(images.size()));
    set_size.push_back(static_cast<int>(ex->devices.size()));
    for (const LfbeImage& img : ex->devices) images.push_back(&img);
  }
  Forward f;
  RunForward(images, f);

  const int d = arch_.embedding_dim;
  const int hdim = arch_.hidden_dim;
  const Eigen::Index total = static_cast<Eigen::Index>(images.size());
  const int num_sets = static_cast<int>(batch.size());
  const int g1 = 2 * static_cast<int>(geometry_.size()) + 2;

  Matrix u(2 * d, total);
  u.topRows(d) = f.embeddings;
  for (int s = 0; s < num_sets; ++s) {
    const Vector pooled =
        f.embeddings.middleCols(set_offset[s], set_size[s]).rowwise().sum();
    u.bottomRows(d).middleCols(set_offset[s], set_size[s]).colwise() = pooled;
  }
  const auto w1 = Weight(g1, hdim, 2 * d);
  const auto w2 = Weight(g1 + 2, 1, hdim);
  Matrix hidden = w1 * u;
  hidden.colwise() += Weight(g1 + 1, hdim, 1).col(0);
  if (!arch_.linear) hidden = hidden.cwiseMax(T(0));
  Matrix logits = w2 * hidden;
  logits.array() += params_[infos_[g1 + 3].offset];

  // Softmax cross-entropy per set, accumulated in double.
  double loss = 0.0;
  Matrix dlogits(1, total);
  if (logits_out != nullptr) logits_out->clear();
  for (int s = 0; s < num_sets; ++s) {
    const auto l = logits.row(0).segment(set_offset[s], set_size[s]);
    if (logits_out != nullptr) logits_out->push_back(l.transpose());
    const double mx = static_cast<double>(l.maxCoeff());
    double sum = 0.0;
    for (int j = 0; j < set_size[s]; ++j) {
      sum += std::exp(static_cast<double>(l(j)) - mx);
    }
    const double lse = mx + std::log(sum);
    loss += lse - static_cast<double>(l(batch[s]->label));
    for (int j = 0; j < set_size[s]; ++j) {
      const double prob = std::exp(static_cast<double>(l(j)) - lse);
      const double target = j == batch[s]->label ? 1.0 : 0.0;
      dlogits(0, set_offset[s] + j) = static_cast<T>((prob - target) / num_sets);
    }
  }
  loss /= num_sets;
  if (grad == nullptr) return static_cast<T>(loss);

  // Accumulated in aligned scratch for the same reason as params_.
  std::vector<T, Eigen::aligned_allocator<T>> g(params_.size(), T(0));
  auto gmap = [&](int index, int rows, int cols) {
    return MapMatrix(g.data() + infos_[index].offset, rows, cols);
  };

  // Classifier g.
  gmap(g1 + 2, 1, hdim).noalias() = dlogits * hidden.transpose();
  g[infos_[g1 + 3].offset] = dlogits.sum();
  Matrix dhidden = w2.transpose() * dlogits;
  if (!arch_.linear) {
    dhidden = (hidden.array() > T(0)).select(dhidden, T(0));
  }
  gmap(g1, hdim, 2 * d).noalias() = dhidden * u.transpose();
  gmap(g1 + 1, hdim, 1) = dhidden.rowwise().sum();
  const Matrix du = w1.transpose() * dhidden;
  Matrix dz = du.topRows(d);
  for (int s = 0; s < num_sets; ++s) {
    const Vector dpooled =
        du.bottomRows(d).middleCols(set_offset[s], set_size[s]).rowwise().sum();
    dz.middleCols(set_offset[s], set_size[s]).colwise() += dpooled;
  }

  // Embedding layer and global average pool.
  const int fc = 2 * static_cast<int>(geometry_.size());
  const ConvGeometry& last = geometry_.back();
  gmap(fc, d, last.cout).noalias() = dz * f.pooled.transpose();
  gmap(fc + 1, d, 1) = dz.rowwise().sum();
  const Matrix dpool =
      Weight(fc, d, last.cout).transpose() * dz / static_cast<T>(last.out_positions());
  Matrix dact(last.cout, total * last.out_positions());
  for (Eigen::Index b = 0; b < total; ++b) {
    dact.middleCols(b * last.out_positions(), last.out_positions()).colwise() =
        dpool.col(b);
  }

  // Convolutions, last to first.
  const int k = arch_.kernel;
  const int n = static_cast<int>(total);
  Matrix cols;
  for (size_t li = geometry_.size(); li-- > 0;) {
    const ConvGeometry& g = geometry_[li];
    const int kdim = k * k * g.cin;
    if (!arch_.linear) {
      dact = (f.acts[li + 1].array() > T(0)).select(dact, T(0));
    }
    cols.resize(kdim, total * g.out_positions());
    Im2Col(f.acts[li].data(), g, k, arch_.stride, arch_.padding, n, cols.data());
    gmap(2 * li, g.cout, kdim).noalias() = dact * cols.transpose();
    gmap(2 * li + 1, g.cout, 1) = dact.rowwise().sum();
    if (li == 0) break;
    const Matrix dcols = Weight(2 * li, g.cout, kdim).transpose() * dact;
    Matrix din = Matrix::Zero(g.cin, total * g.in_positions());
    Col2Im(dcols.data(), g, k, arch_.stride, arch_.padding, n, din.data());
    dact = std::move(din);
  }
  grad->assign(g.begin(), g.end());
  return static_cast<T>(loss);
}

template <typename T>
std::string ArbitratorNet<T>::Summary() const {
  std::ostringstream out;
  for (const ParamInfo& p : infos_) {
    out << p.name << " [";
    for (size_t i = 0; i < p.shape.size(); ++i) {
      out << (i ? "," : "") << p.shape[i];
    }
    out << "] " << p.size << "\n";
  }
  out << "extractor parameters: " << extractor_param_count() << "\n";
  out << "total parameters: " << param_count() << "\n";
  return out.str();
}

template class ArbitratorNet<float>;
template class ArbitratorNet<double>;

int ArgMax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax of an empty vector");
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw UsageError("softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Embedding ExtractEmbedding(const LfbeImage& features,
                           const ArbitratorModel& model) {
  const LfbeImage* ptr = &features;
  const auto z = model.Embed(std::span<const LfbeImage* const>(&ptr, 1));
  return Embedding(z.data(), z.data() + z.rows());
}

ArbitrationOutput Classify(const std::vector<Embedding>& embeddings,
                           const ArbitratorModel& model) {
  if (embeddings.empty()) throw UsageError("no embeddings to classify");
  const int d = model.arch().embedding_dim;
  ArbitratorModel::Matrix z(d, static_cast<Eigen::Index>(embeddings.size()));
  for (size_t j = 0; j < embeddings.size(); ++j) {
    if (static_cast<int>(embeddings[j].size()) != d) {
      throw UsageError("embedding has the wrong dimension");
    }
    for (int i = 0; i < d; ++i) z(i, static_cast<Eigen::Index>(j)) = embeddings[j][i];
  }
  const auto logits = model.Logits(z);
  ArbitrationOutput out;
  out.logits.assign(logits.data(), logits.data() + logits.size());
  out.probabilities = Softmax(out.logits);
  return out;
}

ArbitrationOutput Arbitrate(const std::vector<LfbeImage>& devices,
                            const ArbitratorModel& model) {
  if (devices.empty()) throw UsageError("no devices to arbitrate");
  std::vector<const LfbeImage*> ptrs;
  for (const LfbeImage& d : devices) ptrs.push_back(&d);
  const auto z = model.Embed(ptrs);
  const auto logits = model.Logits(z);
  ArbitrationOutput out;
  out.logits.assign(logits.data(), logits.data() + logits.size());
  out.probabilities = Softmax(out.logits);
  return out;
}

}  // namespace devarb
