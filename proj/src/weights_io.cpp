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

#include "hsiaccel/weights_io.hpp"

#include "binary_io.hpp"

namespace hsiaccel::io {

namespace {

constexpr std::uint32_t kVersion = 1;

quant::QFormat file_format(int e, const std::string& what) {
  if (e < quant::kMinExponent || e > quant::kMaxExponent) {
    throw FormatError(what + ": exponent " + std::to_string(e) + " outside the fixed-point range");
  }
  return quant::QFormat(e);
}

struct TensorRecord {
  std::vector<Index> dims;
  Eigen::ArrayXf values;
  std::optional<quant::QFormat> format;
  Eigen::Array<std::int16_t, Eigen::Dynamic, 1> qvalues;
};

void write_tensor(detail::ByteWriter& w, const std::vector<Index>& dims, const Eigen::ArrayXf& values,
                  const quant::QFormat* fmt, const Eigen::Array<std::int16_t, Eigen::Dynamic, 1>* qvalues) {
  w.u8(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) w.u32(static_cast<std::uint32_t>(d));
  w.u8(fmt ? 1 : 0);
  if (fmt) w.i8(static_cast<std::int8_t>(fmt->exponent));
  for (Index i = 0; i < values.size(); ++i) w.f32(values[i]);
  if (fmt) {
    for (Index i = 0; i < qvalues->size(); ++i) w.i16((*qvalues)[i]);
  }
}

TensorRecord read_tensor(detail::ByteReader& r, const std::string& what) {
  TensorRecord t;
  const auto rank = r.u8();
  if (rank == 0) throw FormatError(what + ": zero-rank tensor");
  std::size_t count = 1;
  for (std::uint8_t i = 0; i < rank; ++i) {
    const auto d = r.u32();
    if (d == 0) throw FormatError(what + ": zero-sized dimension");
    t.dims.push_back(d);
    count *= d;
  }
  const auto has_quant = r.u8();
  if (has_quant > 1) throw FormatError(what + ": invalid has_quant flag " + std::to_string(has_quant));
  if (has_quant) t.format = file_format(r.i8(), what);
  r.require(count * 4, what + " payload");
  t.values.resize(static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i) t.values[static_cast<Index>(i)] = r.f32();
  if (has_quant) {
    r.require(count * 2, what + " quantized payload");
    t.qvalues.resize(static_cast<Index>(count));
    for (std::size_t i = 0; i < count; ++i) t.qvalues[static_cast<Index>(i)] = r.i16();
  }
  return t;
}

}  // namespace

std::vector<std::uint8_t> encode_weight_file(const WeightFile& wf) {
  const auto& layers = wf.floats.layers;
  if (wf.quantized && wf.quantized->layers.size() != layers.size()) {
    throw WeightShapeError("quantized section has " + std::to_string(wf.quantized->layers.size()) +
                           " layers, float section " + std::to_string(layers.size()));
  }
  detail::ByteWriter w;
  w.magic("HSIW");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& lw = layers[i];
    const quant::QLayerWeights* q = wf.quantized ? &wf.quantized->layers[i] : nullptr;
    if (q && (q->dims != lw.dims || q->kind != lw.kind)) {
      throw WeightShapeError("layer " + std::to_string(i) + ": quantized and float tensors disagree");
    }
    w.u8(static_cast<std::uint8_t>(lw.kind));
    write_tensor(w, lw.dims, lw.values, q ? &q->weight_format : nullptr, q ? &q->values : nullptr);
    write_tensor(w, {lw.bias.size()}, lw.bias, q ? &q->bias_format : nullptr, q ? &q->bias : nullptr);
  }
  if (wf.quantized) {
    w.magic("HSIA");
    const auto& ql = wf.quantized->layers;
    w.u32(static_cast<std::uint32_t>(ql.size() + 1));
    for (const auto& q : ql) w.i8(static_cast<std::int8_t>(q.in_format.exponent));
    w.i8(static_cast<std::int8_t>(ql.back().out_format.exponent));
  }
  return w.bytes();
}

WeightFile decode_weight_file(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  detail::ByteReader r(bytes, what);
  r.expect_magic("HSIW");
  const auto version = r.u32();
  if (version != kVersion) throw FormatError(what + ": unsupported weight file version " + std::to_string(version));
  const auto count = r.u32();

  WeightFile wf;
  std::vector<quant::QLayerWeights> qlayers;
  int quant_layers = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string lname = what + " layer " + std::to_string(i);
    const auto kind = static_cast<model::LayerKind>(r.u8());
    if (!model::is_weighted(kind)) throw FormatError(lname + ": invalid layer kind");
    auto wt = read_tensor(r, lname + " weights");
    auto bt = read_tensor(r, lname + " bias");
    if (bt.dims.size() != 1) throw FormatError(lname + ": bias must be rank 1");
    if (wt.format.has_value() != bt.format.has_value()) {
      throw FormatError(lname + ": weights and bias disagree on quantization");
    }
    wf.floats.layers.push_back({kind, wt.dims, wt.values, bt.values});
    if (wt.format) {
      ++quant_layers;
      quant::QLayerWeights q;
      q.kind = kind;
      q.dims = wt.dims;
      q.values = std::move(wt.qvalues);
      q.weight_format = *wt.format;
      q.bias = std::move(bt.qvalues);
      q.bias_format = *bt.format;
      qlayers.push_back(std::move(q));
    }
  }
  if (quant_layers != 0 && quant_layers != static_cast<int>(count)) {
    throw FormatError(what + ": only some layers carry quantized sections");
  }
  if (quant_layers > 0) {
    r.expect_magic("HSIA");
    const auto n = r.u32();
    if (n != count + 1) throw FormatError(what + ": activation trailer has " + std::to_string(n) + " entries");
    std::vector<int> exps(n);
    for (auto& e : exps) e = r.i8();
    for (std::size_t i = 0; i < qlayers.size(); ++i) {
      qlayers[i].in_format = file_format(exps[i], what + " activation trailer");
      qlayers[i].out_format = file_format(exps[i + 1], what + " activation trailer");
    }
    wf.quantized = quant::QWeightSet{std::move(qlayers)};
  }
  if (!r.at_end()) throw FormatError(what + ": " + std::to_string(r.remaining()) + " trailing bytes");
  return wf;
}

WeightFile read_weight_file(const std::filesystem::path& path, const model::NetworkSpec* spec) {
  auto wf = decode_weight_file(detail::read_file(path), path.string());
  if (spec) {
    model::validate_weights(*spec, wf.floats);
    if (wf.quantized) quant::validate_qweights(*spec, *wf.quantized);
  }
  return wf;
}

void write_weight_file(const WeightFile& wf, const std::filesystem::path& path) {
  detail::write_file(path, encode_weight_file(wf));
}

model::WeightSet load_weights(const std::filesystem::path& path, const model::NetworkSpec* spec) {
  return read_weight_file(path, spec).floats;
}

void save_weights(const model::WeightSet& w, const std::filesystem::path& path) {
  write_weight_file(WeightFile{w, std::nullopt}, path);
}

}  // namespace hsiaccel::io
