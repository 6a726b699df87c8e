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

// "HSIW" weight files.
//
//   magic "HSIW", u32 version = 1, u32 layer_count
//   per layer:
//     u8 kind, u8 rank, u32 dims[rank], u8 has_quant, [i8 exponent],
//     f32 payload, [i16 payload]
//     bias: u8 rank (= 1), u32 dims[1], u8 has_quant, [i8 exponent],
//     f32 payload, [i16 payload]
//   when the layers are quantized, an activation-format trailer follows:
//     magic "HSIA", u32 count (= layer_count + 1), i8 exponents[count]
//
// All integers and floats are little-endian. Convolution payloads are
// (kh, kw, c_in, c_out) row-major, fc payloads (in, out) row-major.

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "hsiaccel/model.hpp"
#include "hsiaccel/quant.hpp"

namespace hsiaccel::io {

struct WeightFile {
  model::WeightSet floats;
  std::optional<quant::QWeightSet> quantized;
};

/// Parses a weight file; when `spec` is given the tensors are checked
/// against it (WeightShapeError names the offending layer).
WeightFile read_weight_file(const std::filesystem::path& path, const model::NetworkSpec* spec = nullptr);
void write_weight_file(const WeightFile& wf, const std::filesystem::path& path);

model::WeightSet load_weights(const std::filesystem::path& path, const model::NetworkSpec* spec = nullptr);
void save_weights(const model::WeightSet& w, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_weight_file(const WeightFile& wf);
WeightFile decode_weight_file(const std::vector<std::uint8_t>& bytes, const std::string& what = "weights");

}  // namespace hsiaccel::io
