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

#include "hsiaccel/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsiaccel::quant {

QFormat::QFormat(int e) : exponent(e) {
  if (e < kMinExponent || e > kMaxExponent) {
    throw ConfigError("fixed-point exponent " + std::to_string(e) + " outside [" + std::to_string(kMinExponent) +
                      ", " + std::to_string(kMaxExponent) + "]");
  }
}

double QFormat::step() const { return std::ldexp(1.0, exponent); }

std::int16_t saturate16(std::int64_t v) {
  return static_cast<std::int16_t>(std::clamp<std::int64_t>(v, kQMin, kQMax));
}

QFormat choose_qformat_for_max(double max_abs) {
  if (!std::isfinite(max_abs)) throw DataError("cannot choose a fixed-point format for a non-finite tensor");
  if (max_abs == 0.0) return QFormat(kZeroTensorExponent);
  int e = static_cast<int>(std::ceil(std::log2(max_abs / kQMax)));
  e = std::clamp(e, kMinExponent, kMaxExponent);
  // log2 can be off by one ulp near powers of two; settle by direct evaluation.
  while (e < kMaxExponent && max_abs > std::ldexp(double(kQMax), e)) ++e;
  while (e > kMinExponent && max_abs <= std::ldexp(double(kQMax), e - 1)) --e;
  return QFormat(e);
}

namespace {

template <typename T>
QFormat choose_qformat_impl(std::span<const T> t) {
  if (t.empty()) throw DataError("cannot choose a fixed-point format for an empty tensor");
  double m = 0.0;
  for (T v : t) {
    if (!std::isfinite(v)) throw DataError("cannot choose a fixed-point format for a non-finite tensor");
    m = std::max(m, std::abs(static_cast<double>(v)));
  }
  return choose_qformat_for_max(m);
}

}  // namespace

QFormat choose_qformat(std::span<const float> t) { return choose_qformat_impl(t); }
QFormat choose_qformat(std::span<const double> t) { return choose_qformat_impl(t); }

std::int16_t quantize(double x, QFormat q) {
  // Scaling by a power of two is exact; std::round rounds halves away from zero.
  const double scaled = std::round(std::ldexp(x, -q.exponent));
  if (scaled >= kQMax) return kQMax;
  if (scaled <= kQMin) return kQMin;
  return static_cast<std::int16_t>(scaled);
}

double dequantize(std::int16_t v, QFormat q) { return std::ldexp(static_cast<double>(v), q.exponent); }

Volume<double> dequantize(const QTensor& t) {
  Volume<double> out(t.shape());
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = dequantize(t.values.data()[i], t.format);
  return out;
}

std::int64_t mac9(std::span<const std::int16_t, 9> a, std::span<const std::int16_t, 9> w) {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < 9; ++i) acc += static_cast<std::int64_t>(a[i]) * w[i];
  return acc;
}

std::int64_t add_sat(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) return a > 0 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min();
  return r;
}

std::int64_t shift_round(std::int64_t v, int shift) {
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  constexpr auto kMin = std::numeric_limits<std::int64_t>::min();
  if (v == 0 || shift == 0) return v;
  if (shift > 0) {
    if (shift >= 63) return v > 0 ? kMax : kMin;
    const std::int64_t limit = kMax >> shift;
    if (v > limit) return kMax;
    if (v < -limit) return kMin;
    return v * (std::int64_t{1} << shift);
  }
  const int n = -shift;
  const bool neg = v < 0;
  const std::uint64_t mag = neg ? std::uint64_t{0} - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
  std::uint64_t r;
  if (n >= 65) {
    r = 0;
  } else if (n == 64) {
    r = mag >= (std::uint64_t{1} << 63) ? 1 : 0;
  } else {
    r = (mag + (std::uint64_t{1} << (n - 1))) >> n;
  }
  return neg ? -static_cast<std::int64_t>(r) : static_cast<std::int64_t>(r);
}

std::int16_t requantize(std::int64_t acc, int in_e, int w_e, int out_e) {
  return saturate16(shift_round(acc, in_e + w_e - out_e));
}

void validate_qweights(const model::NetworkSpec& spec, const QWeightSet& qw) {
  const auto idx = spec.weighted_layers();
  if (qw.layers.size() != idx.size()) {
    throw WeightShapeError("quantized weight set has " + std::to_string(qw.layers.size()) +
                           " layers, network expects " + std::to_string(idx.size()));
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& ls = spec.layers[idx[i]];
    const auto& q = qw.layers[i];
    if (q.kind != ls.kind || q.dims != ls.weight_shape || q.values.size() != ls.weight_count() ||
        q.bias.size() != ls.bias_count()) {
      throw WeightShapeError("layer " + std::to_string(i) + " (" + ls.name +
                             "): quantized tensors do not match the network");
    }
    if (i + 1 < idx.size() && q.out_format != qw.layers[i + 1].in_format) {
      throw WeightShapeError("layer " + std::to_string(i) + " (" + ls.name +
                             "): output format does not match the next layer's input format");
    }
  }
}

namespace {

QLayerWeights quantize_layer(const model::LayerWeights& lw, QFormat in, QFormat out) {
  QLayerWeights q;
  q.kind = lw.kind;
  q.dims = lw.dims;
  q.weight_format = choose_qformat(std::span<const float>(lw.values.data(), static_cast<std::size_t>(lw.values.size())));
  q.values = quantize(lw.values, q.weight_format);
  q.bias_format = choose_qformat(std::span<const float>(lw.bias.data(), static_cast<std::size_t>(lw.bias.size())));
  q.bias = quantize(lw.bias, q.bias_format);
  q.in_format = in;
  q.out_format = out;
  return q;
}

}  // namespace

QWeightSet quantize_weights_with_formats(const model::NetworkSpec& spec, const model::WeightSet& w,
                                         std::span<const int> activation_exponents) {
  model::validate_weights(spec, w);
  if (activation_exponents.size() != w.layers.size() + 1) {
    throw WeightShapeError("expected " + std::to_string(w.layers.size() + 1) + " activation exponents, got " +
                           std::to_string(activation_exponents.size()));
  }
  QWeightSet qw;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    qw.layers.push_back(
        quantize_layer(w.layers[i], QFormat(activation_exponents[i]), QFormat(activation_exponents[i + 1])));
  }
  return qw;
}

QWeightSet quantize_weights(const model::NetworkSpec& spec, const model::WeightSet& w,
                            std::span<const io::Patch> calibration, CalibrationOptions opts) {
  if (calibration.empty()) throw ConfigError("quantization needs at least one calibration patch");
  const auto idx = spec.weighted_layers();
  std::vector<double> layer_max(idx.size(), 0.0);
  double input_max = 0.0;

  for (const auto& patch : calibration) {
    const auto input = patch.volume().cast<double>();
    input_max = std::max(input_max, input.data().abs().maxCoeff());
    model::forward_float<double>(spec, w, input, std::nullopt,
                                 [&](std::size_t li, const std::vector<Volume<double>>& acts) {
                                   const auto it = std::find(idx.begin(), idx.end(), li);
                                   if (it == idx.end()) return;
                                   const bool relu = spec.layers[li].relu_after;
                                   double m = 0.0;
                                   for (const auto& a : acts) {
                                     m = std::max(m, relu ? std::max(0.0, a.data().maxCoeff()) : a.data().abs().maxCoeff());
                                   }
                                   auto& slot = layer_max[static_cast<std::size_t>(it - idx.begin())];
                                   slot = std::max(slot, m);
                                 });
  }

  std::vector<int> exps;
  exps.push_back(choose_qformat_for_max(input_max * opts.headroom).exponent);
  for (double m : layer_max) exps.push_back(choose_qformat_for_max(m * opts.headroom).exponent);
  return quantize_weights_with_formats(spec, w, exps);
}

model::WeightSet dequantize_weights(const QWeightSet& qw) {
  model::WeightSet w;
  for (const auto& q : qw.layers) {
    model::LayerWeights lw;
    lw.kind = q.kind;
    lw.dims = q.dims;
    lw.values = (q.values.cast<double>() * q.weight_format.step()).cast<float>();
    lw.bias = (q.bias.cast<double>() * q.bias_format.step()).cast<float>();
    w.layers.push_back(std::move(lw));
  }
  return w;
}

}  // namespace hsiaccel::quant
