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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "hsiaccel/engine.hpp"
#include "hsiaccel/model.hpp"
#include "hsiaccel/quant.hpp"

namespace fixtures {

using hsiaccel::Index;
using hsiaccel::Shape3;
namespace model = hsiaccel::model;
namespace quant = hsiaccel::quant;

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Fresh per-process scratch directory.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hsiaccel_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

/// Standalone weighted layer: conv over h x w x c_in, or fc c_in -> c_out.
inline model::LayerSpec layer(model::LayerKind kind, Index h, Index w, Index c_in, Index c_out, bool relu) {
  model::LayerSpec l;
  l.kind = kind;
  l.name = "test." + model::to_string(kind);
  l.relu_after = relu;
  switch (kind) {
    case model::LayerKind::conv3x3:
      l.in_shape = {h, w, c_in};
      l.out_shape = {h - 2, w - 2, c_out};
      l.weight_shape = {3, 3, c_in, c_out};
      break;
    case model::LayerKind::conv1x1:
      l.in_shape = {h, w, c_in};
      l.out_shape = {h, w, c_out};
      l.weight_shape = {1, 1, c_in, c_out};
      break;
    default:
      l.in_shape = {1, 1, c_in};
      l.out_shape = {1, 1, c_out};
      l.weight_shape = {c_in, c_out};
  }
  return l;
}

inline quant::QTensor random_qtensor(std::mt19937_64& rng, Shape3 s, int e, int lo = -32768, int hi = 32767) {
  quant::QTensor t{hsiaccel::Volume<std::int16_t>(s), quant::QFormat(e)};
  for (Index i = 0; i < t.values.size(); ++i) t.values.data()[i] = static_cast<std::int16_t>(uniform_int(rng, lo, hi));
  return t;
}

/// Random int16 weights and bias with exponents drawn so every shift stays
/// inside the saturation-free int64 range.
inline quant::QLayerWeights random_qweights(std::mt19937_64& rng, const model::LayerSpec& l, int in_e) {
  quant::QLayerWeights w;
  w.kind = l.kind;
  w.dims = l.weight_shape;
  const Index n = l.weight_count();
  w.values.resize(n);
  // Mix full-range and small-magnitude tensors so both saturation and the
  // rounding path get exercised.
  const int wmax = uniform_int(rng, 0, 1) ? 32767 : uniform_int(rng, 1, 600);
  for (Index i = 0; i < n; ++i) w.values[i] = static_cast<std::int16_t>(uniform_int(rng, -wmax, wmax));
  w.bias.resize(l.bias_count());
  for (Index i = 0; i < w.bias.size(); ++i) w.bias[i] = static_cast<std::int16_t>(uniform_int(rng, -32768, 32767));
  w.in_format = quant::QFormat(in_e);
  w.weight_format = quant::QFormat(uniform_int(rng, -20, -2));
  const int acc_e = in_e + w.weight_format.exponent;
  w.bias_format = quant::QFormat(std::clamp(acc_e + uniform_int(rng, -12, 20), -32, 31));
  w.out_format = quant::QFormat(std::clamp(acc_e + uniform_int(rng, -6, 30), -32, 31));
  return w;
}

inline model::NetworkSpec small_spec(Index n_spectral = 36, Index classes = 3, Index n_bands = 4, Index patch = 5) {
  model::NetParams p;
  p.n_bands = n_bands;
  p.patch = patch;
  p.block1 = patch == 5 ? model::Block1Kernel::k3x3 : model::Block1Kernel::k1x1;
  return model::derive_config(n_spectral, classes, p);
}

inline hsiaccel::io::Patch random_patch(std::mt19937_64& rng, Index p, Index bands, double lo = 0.0, double hi = 1.0) {
  hsiaccel::io::Patch patch;
  patch.p = p;
  patch.bands = bands;
  patch.label = 1;
  patch.data.resize(static_cast<std::size_t>(p * p * bands));
  for (auto& v : patch.data) v = static_cast<float>(uniform_real(rng, lo, hi));
  return patch;
}

}  // namespace fixtures
