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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsiaccel/hsi_io.hpp"
#include "hsiaccel/volume.hpp"

namespace hsiaccel::model {

enum class Block1Kernel { k1x1 = 1, k3x3 = 3 };

/// Tunable network parameters: number of spectral bands handled by the
/// parallel branch stage, patch side and the first-stage kernel.
struct NetParams {
  Index n_bands = 4;
  Index patch = 5;
  Block1Kernel block1 = Block1Kernel::k3x3;
};

/// Dataset variables plus the configuration chosen for them.
struct Preset {
  std::string name;
  Index classes = 0;
  Index spectral = 0;
  NetParams params;
};

/// The four evaluated scenes: Indian Pines, Salinas, KSC, Botswana.
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

enum class LayerKind : std::uint8_t {
  conv3x3 = 1,
  conv1x1 = 2,
  fc = 3,
  relu = 4,
  softmax = 5,
  band_split = 6,
  concat = 7,
};

std::string to_string(LayerKind k);
bool is_weighted(LayerKind k);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;
  int block = 0;
  /// Per-branch shapes. Vectors are 1 x 1 x n.
  Shape3 in_shape;
  Shape3 out_shape;
  /// (kh, kw, c_in, c_out) for convolutions, (in, out) for fc, empty otherwise.
  std::vector<Index> weight_shape;
  /// Block-2 layers run once per band with one shared weight set.
  bool band_shared = false;
  Index branches = 1;
  /// Set on weighted layers that are immediately followed by a ReLU.
  bool relu_after = false;

  Index weight_count() const;
  Index bias_count() const;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  Index n_spectral = 0;
  Index classes = 0;
  Index n_bands = 0;
  Index patch = 0;
  Block1Kernel block1 = Block1Kernel::k3x3;
  Index concat_len = 0;

  /// Indices into `layers` of conv/fc layers, in execution order.
  std::vector<std::size_t> weighted_layers() const;
  Shape3 input_shape() const { return layers.front().in_shape; }
};

/// Resolves every layer shape for (N_c, C, params). Throws ConfigError when
/// N_c is not a multiple of the band count, when the first stage does not
/// produce a 3x3 spatial map, or when a band is too narrow for four valid
/// 3x3 convolutions. Unusual but valid parameter choices are reported in
/// `warnings` (or stderr when null).
NetworkSpec derive_config(Index n_spectral, Index classes, const NetParams& params,
                          std::vector<std::string>* warnings = nullptr);

/// Float parameters of one conv/fc layer, in file layout.
struct LayerWeights {
  LayerKind kind = LayerKind::fc;
  std::vector<Index> dims;
  Eigen::ArrayXf values;
  Eigen::ArrayXf bias;
};

/// One entry per weighted layer of the spec, in execution order. The shared
/// Block-2 layers are stored once.
struct WeightSet {
  std::vector<LayerWeights> layers;
};

/// Throws WeightShapeError naming the first layer whose kind or dims differ.
void validate_weights(const NetworkSpec& spec, const WeightSet& w);

/// Zero tensors with the spec's shapes.
WeightSet zero_weights(const NetworkSpec& spec);

/// Fan-in scaled uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias.
WeightSet random_weights(const NetworkSpec& spec, std::uint64_t seed);

template <typename Scalar>
KernelBank<Scalar> kernel_bank(const LayerWeights& lw) {
  KernelBank<Scalar> k;
  k.kh = lw.dims.at(0);
  k.kw = lw.dims.at(1);
  k.c_in = lw.dims.at(2);
  k.c_out = lw.dims.at(3);
  k.values = lw.values.cast<Scalar>();
  return k;
}

/// The fc matrix as (out x in). The (in, out) row-major file layout maps
/// onto Eigen's column-major (out x in) storage directly.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> fc_matrix(const LayerWeights& lw) {
  return Eigen::Map<const Eigen::MatrixXf>(lw.values.data(), lw.dims.at(1), lw.dims.at(0)).cast<Scalar>();
}

/// Splits a 3 x 3 x N_c volume into n_bands volumes of 9 x (N_c/n_bands) x 1:
/// band b holds channels [b*s, (b+1)*s), spatial (y, x) becomes row y*3+x.
template <typename Scalar>
std::vector<Volume<Scalar>> band_partition(const Volume<Scalar>& block1_out, Index n_bands) {
  if (block1_out.height() != 3 || block1_out.width() != 3) {
    throw ConfigError("band_partition expects a 3x3 spatial map, got " + to_string(block1_out.shape()));
  }
  if (n_bands < 1 || block1_out.channels() % n_bands != 0) {
    throw ConfigError("band_partition: " + std::to_string(block1_out.channels()) + " channels not divisible by " +
                      std::to_string(n_bands) + " bands");
  }
  const Index s = block1_out.channels() / n_bands;
  std::vector<Volume<Scalar>> bands;
  bands.reserve(static_cast<std::size_t>(n_bands));
  for (Index b = 0; b < n_bands; ++b) {
    Volume<Scalar> v(Shape3{9, s, 1});
    for (Index y = 0; y < 3; ++y)
      for (Index x = 0; x < 3; ++x)
        for (Index j = 0; j < s; ++j) v(y * 3 + x, j, 0) = block1_out(y, x, b * s + j);
    bands.push_back(std::move(v));
  }
  return bands;
}

/// Concatenates branch outputs band-major into a 1 x 1 x n vector.
template <typename Scalar>
Volume<Scalar> concat_bands(const std::vector<Volume<Scalar>>& branches) {
  Index total = 0;
  for (const auto& b : branches) total += b.size();
  Volume<Scalar> out(Shape3{1, 1, total});
  Index off = 0;
  for (const auto& b : branches) {
    out.data().segment(off, b.size()) = b.data();
    off += b.size();
  }
  return out;
}

template <typename Scalar>
using LayerObserver = std::function<void(std::size_t layer_index, const std::vector<Volume<Scalar>>& branches)>;

/// Runs the float network up to and including layer `stop_after` (an index
/// into spec.layers) and returns the active branch volumes at that point.
/// `observer`, when set, sees the branch volumes after every layer.
template <typename Scalar>
std::vector<Volume<Scalar>> forward_float(const NetworkSpec& spec, const WeightSet& w, const Volume<Scalar>& input,
                                          std::optional<std::size_t> stop_after = std::nullopt,
                                          const LayerObserver<Scalar>& observer = {});

/// Class probabilities for one patch.
Eigen::ArrayXd infer_float(const NetworkSpec& spec, const WeightSet& w, const io::Patch& patch);
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> infer_float(const NetworkSpec& spec, const WeightSet& w,
                                                    const Volume<Scalar>& input);

/// Softmax inputs for one patch (the last fc output).
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> float_logits(const NetworkSpec& spec, const WeightSet& w,
                                                     const Volume<Scalar>& input);

}  // namespace hsiaccel::model
