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

#include "hsiaccel/engine.hpp"

#include <algorithm>
#include <array>

#include "binary_io.hpp"
#include "hsiaccel/parallel.hpp"

namespace hsiaccel::engine {

using quant::QLayerWeights;
using quant::QTensor;

void HwParams::validate() const {
  if (conv_kernels < 1 || fc_multipliers < 1 || !(clock_mhz > 0.0) || bus_bytes_per_cycle < 1 || dsp_budget < 1 ||
      bram_budget < 1) {
    throw ConfigError("hardware parameters must all be positive");
  }
}

std::int64_t ExecutionTrace::kernel_ops_for(std::size_t layer_index) const {
  std::int64_t total = 0;
  for (const auto& s : steps) {
    if (s.layer_index == layer_index) total += s.kernel_ops;
  }
  return total;
}

Index activation_buffer_words(const model::NetworkSpec& spec) {
  Index words = 0;
  for (const auto& l : spec.layers) {
    if (!model::is_weighted(l.kind)) continue;
    words = std::max(words, (l.in_shape.size() + l.out_shape.size()) * l.branches);
  }
  return words;
}

namespace {

void check_layer(const model::LayerSpec& layer, const QTensor& x, const QLayerWeights& w, model::LayerKind kind) {
  if (layer.kind != kind) {
    throw ShapeError(layer.name + ": expected a " + model::to_string(kind) + " layer, got " +
                     model::to_string(layer.kind));
  }
  if (w.kind != kind || w.dims != layer.weight_shape) {
    throw ShapeError(layer.name + ": weights do not match the layer shape");
  }
  if (x.shape() != layer.in_shape) {
    throw ShapeError(layer.name + ": input " + to_string(x.shape()) + " does not match " + to_string(layer.in_shape));
  }
  if (x.format != w.in_format) {
    throw ShapeError(layer.name + ": input format 2^" + std::to_string(x.format.exponent) +
                     " does not match the layer's 2^" + std::to_string(w.in_format.exponent));
  }
}

// Bias moved into the accumulator's exponent (in_e + w_e).
std::int64_t aligned_bias(const QLayerWeights& w, Index co) {
  const int acc_e = w.in_format.exponent + w.weight_format.exponent;
  return quant::shift_round(w.bias[co], w.bias_format.exponent - acc_e);
}

std::int16_t finish(std::int64_t acc, const QLayerWeights& w, bool relu) {
  std::int16_t v = quant::requantize(acc, w.in_format.exponent, w.weight_format.exponent, w.out_format.exponent);
  return relu ? std::max<std::int16_t>(v, 0) : v;
}

}  // namespace

QTensor relu(const QTensor& x) {
  QTensor y = x;
  y.values.data() = y.values.data().max(std::int16_t{0});
  return y;
}

QTensor run_conv3x3(const model::LayerSpec& layer, const QTensor& x, const QLayerWeights& w, const HwParams& hw,
                    LayerStats* stats) {
  check_layer(layer, x, w, model::LayerKind::conv3x3);
  const Index c_in = layer.weight_shape[2], c_out = layer.weight_shape[3];
  const Shape3 out_shape{x.shape().height - 2, x.shape().width - 2, c_out};
  if (out_shape != layer.out_shape) throw ShapeError(layer.name + ": output shape mismatch");

  // Taps regrouped per (co, ci) so each kernel sees a contiguous 3x3 filter.
  std::vector<std::int16_t> taps(static_cast<std::size_t>(c_out * c_in * 9));
  for (Index co = 0; co < c_out; ++co)
    for (Index ci = 0; ci < c_in; ++ci)
      for (Index t = 0; t < 9; ++t)
        taps[static_cast<std::size_t>((co * c_in + ci) * 9 + t)] = w.values[(t * c_in + ci) * c_out + co];

  // Input channels are dealt round-robin to the P_C kernels; each kernel
  // keeps a partial sum that the final reduction adds up.
  const Index lanes = std::min(hw.conv_kernels, c_in);
  std::vector<std::int64_t> lane_acc(static_cast<std::size_t>(lanes));
  std::vector<std::int16_t> window(static_cast<std::size_t>(c_in * 9));

  QTensor y{Volume<std::int16_t>(out_shape), w.out_format};
  for (Index oy = 0; oy < out_shape.height; ++oy) {
    for (Index ox = 0; ox < out_shape.width; ++ox) {
      for (Index ci = 0; ci < c_in; ++ci)
        for (Index t = 0; t < 9; ++t)
          window[static_cast<std::size_t>(ci * 9 + t)] = x.values(oy + t / 3, ox + t % 3, ci);
      for (Index co = 0; co < c_out; ++co) {
        std::fill(lane_acc.begin(), lane_acc.end(), 0);
        for (Index ci = 0; ci < c_in; ++ci) {
          lane_acc[static_cast<std::size_t>(ci % lanes)] +=
              quant::mac9(std::span<const std::int16_t, 9>(window.data() + ci * 9, 9),
                          std::span<const std::int16_t, 9>(taps.data() + (co * c_in + ci) * 9, 9));
        }
        std::int64_t acc = 0;
        for (auto v : lane_acc) acc += v;
        y.values(oy, ox, co) = finish(quant::add_sat(acc, aligned_bias(w, co)), w, layer.relu_after);
      }
    }
  }
  if (stats) stats->kernel_ops = out_shape.height * out_shape.width * c_in * c_out;
  return y;
}

QTensor run_conv1x1(const model::LayerSpec& layer, const QTensor& x, const QLayerWeights& w, const HwParams& hw,
                    LayerStats* stats) {
  check_layer(layer, x, w, model::LayerKind::conv1x1);
  const Index c_in = layer.weight_shape[2], c_out = layer.weight_shape[3];
  if (layer.out_shape != Shape3{x.shape().height, x.shape().width, c_out}) {
    throw ShapeError(layer.name + ": output shape mismatch");
  }
  (void)hw;  // 9 * P_C multipliers; affects timing only

  // (c_out x c_in) int64 view of the (1, 1, c_in, c_out) kernel.
  const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Map<const Eigen::Matrix<std::int16_t, Eigen::Dynamic, Eigen::Dynamic>>(w.values.data(), c_out, c_in)
          .cast<std::int64_t>();
  QTensor y{Volume<std::int16_t>(layer.out_shape), w.out_format};
  for (Index py = 0; py < x.shape().height; ++py) {
    for (Index px = 0; px < x.shape().width; ++px) {
      const auto xin = Eigen::Map<const Eigen::Matrix<std::int16_t, Eigen::Dynamic, 1>>(&x.values(py, px, 0), c_in)
                           .cast<std::int64_t>();
      const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> acc = m * xin;
      for (Index co = 0; co < c_out; ++co) y.values(py, px, co) = finish(quant::add_sat(acc[co], aligned_bias(w, co)), w, layer.relu_after);
    }
  }
  if (stats) stats->kernel_ops = x.shape().height * x.shape().width * c_in * c_out;
  return y;
}

QTensor run_fc(const model::LayerSpec& layer, const QTensor& x, const QLayerWeights& w, const HwParams& hw,
               LayerStats* stats) {
  check_layer(layer, x, w, model::LayerKind::fc);
  const Index n_in = layer.weight_shape[0], n_out = layer.weight_shape[1];
  (void)hw;  // P_F multipliers; affects timing only
  const auto m = Eigen::Map<const Eigen::Matrix<std::int16_t, Eigen::Dynamic, Eigen::Dynamic>>(w.values.data(), n_out, n_in)
                     .cast<std::int64_t>();
  const auto xin = Eigen::Map<const Eigen::Matrix<std::int16_t, Eigen::Dynamic, 1>>(x.values.data().data(), n_in)
                       .cast<std::int64_t>();
  const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> acc = m * xin;
  QTensor y{Volume<std::int16_t>(layer.out_shape), w.out_format};
  for (Index o = 0; o < n_out; ++o) y.values.data()[o] = finish(quant::add_sat(acc[o], aligned_bias(w, o)), w, layer.relu_after);
  if (stats) stats->kernel_ops = n_in * n_out;
  return y;
}

Eigen::ArrayXd PixelResult::probabilities() const {
  return softmax((logits.cast<double>() * logit_format.step()).eval());
}

PixelResult classify_pixel(const model::NetworkSpec& spec, const quant::QWeightSet& qw, const io::Patch& patch,
                           const HwParams& hw, ExecutionTrace* trace) {
  quant::validate_qweights(spec, qw);
  if (patch.p != spec.patch || patch.bands != spec.n_spectral) {
    throw ShapeError("patch " + std::to_string(patch.p) + "x" + std::to_string(patch.p) + "x" +
                     std::to_string(patch.bands) + " does not match network input " + to_string(spec.input_shape()));
  }
  const bool record = trace && trace->record_tensors;
  if (trace) trace->capacity_words = activation_buffer_words(spec);

  std::vector<QTensor> acts{quant::quantize(patch.volume(), qw.input_format())};
  std::size_t wi = 0;

  // Layer-major: each layer runs over every band before the next layer
  // starts, so one weight load serves all bands of a shared Block-2 layer.
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const auto& layer = spec.layers[li];
    switch (layer.kind) {
      case model::LayerKind::conv3x3:
      case model::LayerKind::conv1x1:
      case model::LayerKind::fc: {
        const auto& w = qw.layers[wi++];
        Index in_words = 0;
        for (const auto& a : acts) in_words += a.values.size();
        Index out_words = 0;
        for (std::size_t b = 0; b < acts.size(); ++b) {
          LayerStats st;
          QTensor out;
          if (layer.kind == model::LayerKind::conv3x3) {
            out = run_conv3x3(layer, acts[b], w, hw, &st);
          } else if (layer.kind == model::LayerKind::conv1x1) {
            out = run_conv1x1(layer, acts[b], w, hw, &st);
          } else {
            out = run_fc(layer, acts[b], w, hw, &st);
          }
          out_words += out.values.size();
          if (trace) {
            TraceStep step;
            step.layer_index = li;
            step.name = layer.name;
            step.branch = layer.band_shared ? static_cast<Index>(b) : -1;
            step.in_shape = acts[b].shape();
            step.out_shape = out.shape();
            step.kernel_ops = st.kernel_ops;
            // Inputs of every band stay resident until the layer finishes.
            step.buffer_words = in_words + out_words;
            if (record) {
              step.input = acts[b];
              step.output = out;
            }
            trace->peak_buffer_words = std::max(trace->peak_buffer_words, step.buffer_words);
            trace->steps.push_back(std::move(step));
          }
          acts[b] = std::move(out);
        }
        break;
      }
      case model::LayerKind::relu:
        for (auto& a : acts) a = relu(a);
        break;
      case model::LayerKind::softmax:
        // Argmax over the integer logits is what the hardware reports.
        break;
      case model::LayerKind::band_split: {
        const auto fmt = acts.at(0).format;
        auto bands = model::band_partition(acts.at(0).values, spec.n_bands);
        acts.clear();
        for (auto& v : bands) acts.push_back({std::move(v), fmt});
        break;
      }
      case model::LayerKind::concat: {
        std::vector<Volume<std::int16_t>> vols;
        for (auto& a : acts) vols.push_back(a.values);
        const auto fmt = acts.at(0).format;
        acts = {QTensor{model::concat_bands(vols), fmt}};
        break;
      }
    }
  }

  PixelResult r;
  r.logits = acts.at(0).values.data();
  r.logit_format = acts.at(0).format;
  r.class_id = static_cast<std::uint16_t>(argmax(r.logits) + 1);
  return r;
}

namespace {

std::vector<io::Pixel> select_pixels(const io::HsiCube& cube, const io::LabelMap* labels, const ClassifyOptions& opts) {
  if (opts.pixels) return *opts.pixels;
  std::vector<io::Pixel> px;
  for (Index y = 0; y < cube.height(); ++y)
    for (Index x = 0; x < cube.width(); ++x)
      if (!(labels && opts.labeled_only) || labels->at(x, y) != 0) px.push_back({x, y});
  return px;
}

template <typename ClassifyFn>
ImageResult classify_image_impl(const io::HsiCube& cube, const io::LabelMap* labels, const model::NetworkSpec& spec,
                                const ClassifyOptions& opts, ClassifyFn&& classify) {
  if (cube.bands() != spec.n_spectral) {
    throw ConfigError("cube has " + std::to_string(cube.bands()) + " bands, network expects " +
                      std::to_string(spec.n_spectral));
  }
  if (labels && (labels->width() != cube.width() || labels->height() != cube.height())) {
    throw DataError("label map does not match the cube dimensions");
  }
  const auto pixels = select_pixels(cube, labels, opts);
  std::vector<std::uint16_t> pred(static_cast<std::size_t>(cube.width() * cube.height()), 0);
  std::vector<std::int8_t> classified(pixels.size(), 0);

  parallel_for(pixels.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    const auto& p = pixels[i];
    if (opts.border == io::BorderMode::strict && !io::patch_fits(cube, p.x, p.y, spec.patch)) return;
    const auto patch = io::extract_patch(cube, p.x, p.y, spec.patch, opts.border);
    pred[static_cast<std::size_t>(p.y * cube.width() + p.x)] = classify(patch);
    classified[i] = 1;
  });

  ImageResult r;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (!classified[i]) continue;
    ++r.classified;
    const auto& p = pixels[i];
    if (labels && labels->at(p.x, p.y) != 0) {
      ++r.evaluated;
      if (pred[static_cast<std::size_t>(p.y * cube.width() + p.x)] == labels->at(p.x, p.y)) ++r.correct;
    }
  }
  r.predictions = io::LabelMap(cube.width(), cube.height(), std::move(pred));
  return r;
}

}  // namespace

ImageResult classify_image(const io::HsiCube& cube, const io::LabelMap* labels, const model::NetworkSpec& spec,
                           const quant::QWeightSet& qw, const ClassifyOptions& opts) {
  quant::validate_qweights(spec, qw);
  opts.hw.validate();
  return classify_image_impl(cube, labels, spec, opts,
                             [&](const io::Patch& patch) { return classify_pixel(spec, qw, patch, opts.hw).class_id; });
}

ImageResult classify_image_float(const io::HsiCube& cube, const io::LabelMap* labels, const model::NetworkSpec& spec,
                                 const model::WeightSet& w, const ClassifyOptions& opts) {
  model::validate_weights(spec, w);
  return classify_image_impl(cube, labels, spec, opts, [&](const io::Patch& patch) {
    return static_cast<std::uint16_t>(argmax(model::infer_float(spec, w, patch)) + 1);
  });
}

void write_prediction_map(const io::LabelMap& map, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("HSIP");
  w.u32(static_cast<std::uint32_t>(map.width()));
  w.u32(static_cast<std::uint32_t>(map.height()));
  for (auto v : map.labels()) w.u16(v);
  detail::write_file(path, w.bytes());
}

io::LabelMap read_prediction_map(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.expect_magic("HSIP");
  const Index width = r.u32(), height = r.u32();
  if (width < 1 || height < 1) throw FormatError(path.string() + ": header dimensions must be positive");
  r.require(static_cast<std::size_t>(width * height) * 2, "prediction payload");
  std::vector<std::uint16_t> v(static_cast<std::size_t>(width * height));
  for (auto& x : v) x = r.u16();
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes");
  return io::LabelMap(width, height, std::move(v));
}

}  // namespace hsiaccel::engine
