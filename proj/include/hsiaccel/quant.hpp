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

// 16-bit fixed point: value = int16 * 2^exponent, per-tensor power-of-two
// scales, round-half-away-from-zero, saturation on every narrowing step.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hsiaccel/hsi_io.hpp"
#include "hsiaccel/model.hpp"
#include "hsiaccel/volume.hpp"

namespace hsiaccel::quant {

inline constexpr int kMinExponent = -32;
inline constexpr int kMaxExponent = 31;
inline constexpr int kZeroTensorExponent = -15;
inline constexpr std::int32_t kQMin = -32768;
inline constexpr std::int32_t kQMax = 32767;

struct QFormat {
  int exponent = kZeroTensorExponent;

  QFormat() = default;
  explicit QFormat(int e);

  double step() const;
  double max_value() const { return kQMax * step(); }
  friend bool operator==(const QFormat&, const QFormat&) = default;
};

/// Integer volume with an attached format; the unit of bit-exact emulation.
struct QTensor {
  Volume<std::int16_t> values;
  QFormat format;

  const Shape3& shape() const { return values.shape(); }
};

std::int16_t saturate16(std::int64_t v);

/// Smallest exponent e with max|t| <= 32767 * 2^e; all-zero tensors get -15.
QFormat choose_qformat(std::span<const float> t);
QFormat choose_qformat(std::span<const double> t);
QFormat choose_qformat_for_max(double max_abs);

std::int16_t quantize(double x, QFormat q);
double dequantize(std::int16_t v, QFormat q);

template <typename Derived>
Eigen::Array<std::int16_t, Eigen::Dynamic, 1> quantize(const Eigen::DenseBase<Derived>& t, QFormat q) {
  Eigen::Array<std::int16_t, Eigen::Dynamic, 1> out(t.size());
  for (Index i = 0; i < t.size(); ++i) out[i] = quantize(static_cast<double>(t(i)), q);
  return out;
}

template <typename Scalar>
QTensor quantize(const Volume<Scalar>& v, QFormat q) {
  return {Volume<std::int16_t>(v.shape(), quantize(v.data(), q)), q};
}

Volume<double> dequantize(const QTensor& t);

/// The 3x3 kernel datapath: nine products summed in 64 bits.
std::int64_t mac9(std::span<const std::int16_t, 9> a, std::span<const std::int16_t, 9> w);

/// v * 2^shift. Right shifts round half away from zero; left shifts saturate
/// to the int64 range.
std::int64_t shift_round(std::int64_t v, int shift);

/// Accumulator add that clamps to the int64 range instead of wrapping.
std::int64_t add_sat(std::int64_t a, std::int64_t b);

/// Moves an accumulator at exponent (in_e + w_e) to out_e and saturates to int16.
std::int16_t requantize(std::int64_t acc, int in_e, int w_e, int out_e);

/// Quantized parameters of one conv/fc layer plus the activation formats it
/// consumes and produces.
struct QLayerWeights {
  model::LayerKind kind = model::LayerKind::fc;
  std::vector<Index> dims;
  Eigen::Array<std::int16_t, Eigen::Dynamic, 1> values;
  QFormat weight_format;
  Eigen::Array<std::int16_t, Eigen::Dynamic, 1> bias;
  QFormat bias_format;
  QFormat in_format;
  QFormat out_format;
};

struct QWeightSet {
  std::vector<QLayerWeights> layers;
  QFormat input_format() const { return layers.front().in_format; }
};

void validate_qweights(const model::NetworkSpec& spec, const QWeightSet& qw);

struct CalibrationOptions {
  /// Headroom multiplier applied to the observed activation maxima.
  double headroom = 1.0;
};

/// Per-tensor weight/bias formats from the float tensors; activation formats
/// from the maxima observed running the float network over `calibration`.
QWeightSet quantize_weights(const model::NetworkSpec& spec, const model::WeightSet& w,
                            std::span<const io::Patch> calibration, CalibrationOptions opts = {});

/// Rebuilds quantized weights with explicit activation formats, e.g. from a
/// weight file: `activation_exponents` holds the input exponent of every
/// weighted layer followed by the output exponent of the last one.
QWeightSet quantize_weights_with_formats(const model::NetworkSpec& spec, const model::WeightSet& w,
                                         std::span<const int> activation_exponents);

/// The float tensors reconstructed from the quantized ones.
model::WeightSet dequantize_weights(const QWeightSet& qw);

}  // namespace hsiaccel::quant
