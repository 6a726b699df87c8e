// Copyright (c) 2026, hsiaccel authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//         http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "hsiaccel/model.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace hsiaccel::model {

namespace {

constexpr Index kHiddenUnits = 120;
constexpr Index kBranchChannels[] = {1, 2, 4, 4, 4};

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"indian-pines", 11, 220, {4, 3, Block1Kernel::k1x1}},
      {"salinas", 16, 224, {8, 3, Block1Kernel::k1x1}},
      {"ksc", 13, 176, {8, 5, Block1Kernel::k3x3}},
      {"botswana", 14, 144, {8, 5, Block1Kernel::k3x3}},
  };
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "' (indian-pines|salinas|ksc|botswana)");
}

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv3x3: return "conv3x3";
    case LayerKind::conv1x1: return "conv1x1";
    case LayerKind::fc: return "fc";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax: return "softmax";
    case LayerKind::band_split: return "band_split";
    case LayerKind::concat: return "concat";
  }
  return "unknown";
}

bool is_weighted(LayerKind k) { return k == LayerKind::conv3x3 || k == LayerKind::conv1x1 || k == LayerKind::fc; }

Index LayerSpec::weight_count() const {
  if (weight_shape.empty()) return 0;
  Index n = 1;
  for (auto d : weight_shape) n *= d;
  return n;
}

Index LayerSpec::bias_count() const { return weight_shape.empty() ? 0 : weight_shape.back(); }

std::vector<std::size_t> NetworkSpec::weighted_layers() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (is_weighted(layers[i].kind)) idx.push_back(i);
  }
  return idx;
}

NetworkSpec derive_config(Index n_spectral, Index classes, const NetParams& params, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) {
      warnings->push_back(msg);
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  };

  if (n_spectral < 1 || classes < 1) throw ConfigError("spectral bands and classes must be positive");
  if (params.n_bands < 1 || n_spectral % params.n_bands != 0) {
    throw ConfigError(std::to_string(n_spectral) + " spectral channels are not divisible into " +
                      std::to_string(params.n_bands) + " bands");
  }
  if (params.n_bands != 2 && params.n_bands != 4 && params.n_bands != 8) {
    warn("band count " + std::to_string(params.n_bands) + " is outside {2, 4, 8}");
  }
  const Index k = static_cast<Index>(params.block1);
  const Index block1_side = params.patch - k + 1;
  if (params.patch < 1 || block1_side != 3) {
    throw ConfigError("block 1 with a " + std::to_string(k) + "x" + std::to_string(k) + " kernel on a " +
                      std::to_string(params.patch) + "x" + std::to_string(params.patch) + " patch gives a " +
                      std::to_string(block1_side) + "x" + std::to_string(block1_side) + " map, expected 3x3");
  }
  const Index width = n_spectral / params.n_bands;
  if (width < 9) {
    throw ConfigError("band width " + std::to_string(width) + " is too narrow for four valid 3x3 convolutions");
  }

  NetworkSpec spec;
  spec.n_spectral = n_spectral;
  spec.classes = classes;
  spec.n_bands = params.n_bands;
  spec.patch = params.patch;
  spec.block1 = params.block1;

  auto& L = spec.layers;
  auto relu_layer = [&](const std::string& name, int block, const Shape3& s, Index branches, bool shared) {
    LayerSpec r;
    r.kind = LayerKind::relu;
    r.name = name;
    r.block = block;
    r.in_shape = r.out_shape = s;
    r.branches = branches;
    r.band_shared = shared;
    L.push_back(r);
    L[L.size() - 2].relu_after = true;
  };

  LayerSpec b1;
  b1.kind = params.block1 == Block1Kernel::k3x3 ? LayerKind::conv3x3 : LayerKind::conv1x1;
  b1.name = "block1.conv";
  b1.block = 1;
  b1.in_shape = {params.patch, params.patch, n_spectral};
  b1.out_shape = {3, 3, n_spectral};
  b1.weight_shape = {k, k, n_spectral, n_spectral};
  L.push_back(b1);
  relu_layer("block1.relu", 1, b1.out_shape, 1, false);

  LayerSpec split;
  split.kind = LayerKind::band_split;
  split.name = "block1.band_split";
  split.block = 1;
  split.in_shape = b1.out_shape;
  split.out_shape = {9, width, 1};
  split.branches = params.n_bands;
  L.push_back(split);

  Shape3 cur = split.out_shape;
  for (int i = 1; i <= 4; ++i) {
    LayerSpec c;
    c.kind = LayerKind::conv3x3;
    c.name = "block2.conv" + std::to_string(i);
    c.block = 2;
    c.in_shape = cur;
    c.out_shape = {cur.height - 2, cur.width - 2, kBranchChannels[i]};
    c.weight_shape = {3, 3, kBranchChannels[i - 1], kBranchChannels[i]};
    c.band_shared = true;
    c.branches = params.n_bands;
    L.push_back(c);
    relu_layer("block2.relu" + std::to_string(i), 2, c.out_shape, params.n_bands, true);
    cur = c.out_shape;
  }

  spec.concat_len = params.n_bands * cur.size();
  LayerSpec cat;
  cat.kind = LayerKind::concat;
  cat.name = "block2.concat";
  cat.block = 2;
  cat.in_shape = cur;
  cat.out_shape = {1, 1, spec.concat_len};
  cat.branches = params.n_bands;
  L.push_back(cat);

  LayerSpec fc1;
  fc1.kind = LayerKind::fc;
  fc1.name = "block3.fc1";
  fc1.block = 3;
  fc1.in_shape = cat.out_shape;
  fc1.out_shape = {1, 1, kHiddenUnits};
  fc1.weight_shape = {spec.concat_len, kHiddenUnits};
  L.push_back(fc1);
  relu_layer("block3.relu1", 3, fc1.out_shape, 1, false);

  LayerSpec fc2;
  fc2.kind = LayerKind::fc;
  fc2.name = "block3.fc2";
  fc2.block = 3;
  fc2.in_shape = fc1.out_shape;
  fc2.out_shape = {1, 1, classes};
  fc2.weight_shape = {kHiddenUnits, classes};
  L.push_back(fc2);

  LayerSpec sm;
  sm.kind = LayerKind::softmax;
  sm.name = "block3.softmax";
  sm.block = 3;
  sm.in_shape = sm.out_shape = fc2.out_shape;
  L.push_back(sm);
  return spec;
}

void validate_weights(const NetworkSpec& spec, const WeightSet& w) {
  const auto idx = spec.weighted_layers();
  if (w.layers.size() != idx.size()) {
    throw WeightShapeError("weight set has " + std::to_string(w.layers.size()) + " layers, network expects " +
                           std::to_string(idx.size()));
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& ls = spec.layers[idx[i]];
    const auto& lw = w.layers[i];
    auto dims_str = [](const std::vector<Index>& d) {
      std::string s;
      for (std::size_t j = 0; j < d.size(); ++j) s += (j ? "x" : "") + std::to_string(d[j]);
      return s;
    };
    if (lw.kind != ls.kind || lw.dims != ls.weight_shape) {
      throw WeightShapeError("layer " + std::to_string(i) + " (" + ls.name + "): weights are " + to_string(lw.kind) +
                             " " + dims_str(lw.dims) + ", network expects " + to_string(ls.kind) + " " +
                             dims_str(ls.weight_shape));
    }
    if (lw.values.size() != ls.weight_count() || lw.bias.size() != ls.bias_count()) {
      throw WeightShapeError("layer " + std::to_string(i) + " (" + ls.name + "): payload length mismatch");
    }
  }
}

WeightSet zero_weights(const NetworkSpec& spec) {
  WeightSet w;
  for (auto i : spec.weighted_layers()) {
    const auto& ls = spec.layers[i];
    w.layers.push_back({ls.kind, ls.weight_shape, Eigen::ArrayXf::Zero(ls.weight_count()),
                        Eigen::ArrayXf::Zero(ls.bias_count())});
  }
  return w;
}

WeightSet random_weights(const NetworkSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  WeightSet w = zero_weights(spec);
  for (auto& lw : w.layers) {
    Index fan_in = 1;
    for (std::size_t d = 0; d + 1 < lw.dims.size(); ++d) fan_in *= lw.dims[d];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (Index i = 0; i < lw.values.size(); ++i) {
      // 53-bit uniform in [0, 1); avoids uniform_real_distribution's
      // implementation-defined draw sequence.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      lw.values[i] = static_cast<float>((2.0 * u - 1.0) * limit);
    }
  }
  return w;
}

template <typename Scalar>
std::vector<Volume<Scalar>> forward_float(const NetworkSpec& spec, const WeightSet& w, const Volume<Scalar>& input,
                                          std::optional<std::size_t> stop_after,
                                          const LayerObserver<Scalar>& observer) {
  validate_weights(spec, w);
  if (input.shape() != spec.input_shape()) {
    throw ShapeError("input " + to_string(input.shape()) + " does not match network input " +
                     to_string(spec.input_shape()));
  }
  std::vector<Volume<Scalar>> acts{input};
  std::size_t weight_idx = 0;
  const std::size_t last = stop_after.value_or(spec.layers.size() - 1);
  for (std::size_t li = 0; li <= last && li < spec.layers.size(); ++li) {
    const auto& layer = spec.layers[li];
    switch (layer.kind) {
      case LayerKind::conv3x3:
      case LayerKind::conv1x1: {
        const auto& lw = w.layers[weight_idx++];
        const auto k = kernel_bank<Scalar>(lw);
        const Eigen::Array<Scalar, Eigen::Dynamic, 1> bias = lw.bias.cast<Scalar>();
        for (auto& a : acts) a = conv2d_valid(a, k, bias);
        break;
      }
      case LayerKind::fc: {
        const auto& lw = w.layers[weight_idx++];
        const auto m = fc_matrix<Scalar>(lw);
        for (auto& a : acts) {
          Eigen::Array<Scalar, Eigen::Dynamic, 1> y = (m * a.data().matrix()).array() + lw.bias.cast<Scalar>();
          a = Volume<Scalar>(layer.out_shape, std::move(y));
        }
        break;
      }
      case LayerKind::relu:
        for (auto& a : acts) a = relu(a);
        break;
      case LayerKind::softmax:
        for (auto& a : acts) a = Volume<Scalar>(a.shape(), softmax(a.data()));
        break;
      case LayerKind::band_split:
        acts = band_partition(acts.at(0), spec.n_bands);
        break;
      case LayerKind::concat:
        acts = {concat_bands(acts)};
        break;
    }
    if (observer) observer(li, acts);
  }
  return acts;
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> infer_float(const NetworkSpec& spec, const WeightSet& w,
                                                    const Volume<Scalar>& input) {
  return forward_float(spec, w, input).at(0).data();
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> float_logits(const NetworkSpec& spec, const WeightSet& w,
                                                     const Volume<Scalar>& input) {
  return forward_float(spec, w, input, spec.layers.size() - 2).at(0).data();
}

Eigen::ArrayXd infer_float(const NetworkSpec& spec, const WeightSet& w, const io::Patch& patch) {
  if (patch.p != spec.patch || patch.bands != spec.n_spectral) {
    throw ShapeError("patch " + std::to_string(patch.p) + "x" + std::to_string(patch.p) + "x" +
                     std::to_string(patch.bands) + " does not match network input " + to_string(spec.input_shape()));
  }
  return infer_float<double>(spec, w, patch.volume().cast<double>());
}

template std::vector<Volume<float>> forward_float(const NetworkSpec&, const WeightSet&, const Volume<float>&,
                                                  std::optional<std::size_t>, const LayerObserver<float>&);
template std::vector<Volume<double>> forward_float(const NetworkSpec&, const WeightSet&, const Volume<double>&,
                                                   std::optional<std::size_t>, const LayerObserver<double>&);
template Eigen::ArrayXf infer_float(const NetworkSpec&, const WeightSet&, const Volume<float>&);
template Eigen::ArrayXd infer_float(const NetworkSpec&, const WeightSet&, const Volume<double>&);
template Eigen::ArrayXf float_logits(const NetworkSpec&, const WeightSet&, const Volume<float>&);
template Eigen::ArrayXd float_logits(const NetworkSpec&, const WeightSet&, const Volume<double>&);

}  // namespace hsiaccel::model
