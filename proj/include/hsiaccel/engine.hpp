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

// Functional emulation of the accelerator datapath. A CONV unit of P_C
// nine-multiplier kernels (1x1 convolutions reuse the multipliers with the
// adder trees bypassed) and an FC unit of P_F multipliers run the network
// layer by layer out of on-chip buffers. Values never depend on P_C/P_F;
// those only shape the lane structure and the timing model in perf.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hsiaccel/hsi_io.hpp"
#include "hsiaccel/model.hpp"
#include "hsiaccel/quant.hpp"

namespace hsiaccel::engine {

struct HwParams {
  Index conv_kernels = 64;      // P_C
  Index fc_multipliers = 256;   // P_F
  double clock_mhz = 250.0;
  Index bus_bytes_per_cycle = 8;
  Index dsp_budget = 900;
  Index bram_budget = 545;

  void validate() const;
};

/// Work and buffer bookkeeping for one layer invocation.
struct LayerStats {
  /// 9-wide MAC groups for conv3x3, scalar MACs for conv1x1 and fc.
  std::int64_t kernel_ops = 0;
};

struct TraceStep {
  std::size_t layer_index = 0;
  std::string name;
  /// Band index for Block-2 steps, -1 otherwise.
  Index branch = -1;
  Shape3 in_shape;
  Shape3 out_shape;
  std::int64_t kernel_ops = 0;
  /// Activation words live on chip while this step runs.
  Index buffer_words = 0;
  std::optional<quant::QTensor> input;
  std::optional<quant::QTensor> output;
};

struct ExecutionTrace {
  bool record_tensors = false;
  std::vector<TraceStep> steps;
  Index capacity_words = 0;
  Index peak_buffer_words = 0;

  /// Kernel ops summed over all steps of spec layer `layer_index`.
  std::int64_t kernel_ops_for(std::size_t layer_index) const;
};

/// On-chip activation buffer the model plans for: the largest
/// (input + output) of any conv/fc layer, summed over bands for Block 2.
Index activation_buffer_words(const model::NetworkSpec& spec);

quant::QTensor run_conv3x3(const model::LayerSpec& layer, const quant::QTensor& x, const quant::QLayerWeights& w,
                           const HwParams& hw, LayerStats* stats = nullptr);
quant::QTensor run_conv1x1(const model::LayerSpec& layer, const quant::QTensor& x, const quant::QLayerWeights& w,
                           const HwParams& hw, LayerStats* stats = nullptr);
quant::QTensor run_fc(const model::LayerSpec& layer, const quant::QTensor& x, const quant::QLayerWeights& w,
                      const HwParams& hw, LayerStats* stats = nullptr);

quant::QTensor relu(const quant::QTensor& x);

struct PixelResult {
  /// 1-based class id; ties go to the lowest id.
  std::uint16_t class_id = 0;
  Eigen::Array<std::int16_t, Eigen::Dynamic, 1> logits;
  quant::QFormat logit_format;

  /// Softmax over the dequantized logits.
  Eigen::ArrayXd probabilities() const;
};

PixelResult classify_pixel(const model::NetworkSpec& spec, const quant::QWeightSet& qw, const io::Patch& patch,
                           const HwParams& hw = {}, ExecutionTrace* trace = nullptr);

struct ClassifyOptions {
  unsigned threads = 1;
  /// Only these pixels when set; otherwise labeled pixels (labeled_only) or all.
  std::optional<std::vector<io::Pixel>> pixels;
  bool labeled_only = true;
  io::BorderMode border = io::BorderMode::zero_pad;
  HwParams hw;
};

struct ImageResult {
  io::LabelMap predictions;
  std::size_t classified = 0;
  std::size_t correct = 0;
  std::size_t evaluated = 0;

  double overall_accuracy() const { return evaluated ? double(correct) / double(evaluated) : 0.0; }
};

/// Fixed-point classification of every selected pixel. Pixels that are not
/// classified are 0 in the prediction map; accuracy counts labeled pixels.
ImageResult classify_image(const io::HsiCube& cube, const io::LabelMap* labels, const model::NetworkSpec& spec,
                           const quant::QWeightSet& qw, const ClassifyOptions& opts = {});

/// Same selection and bookkeeping with the float reference network.
ImageResult classify_image_float(const io::HsiCube& cube, const io::LabelMap* labels, const model::NetworkSpec& spec,
                                 const model::WeightSet& w, const ClassifyOptions& opts = {});

/// "HSIP" prediction maps: magic, u32 width, u32 height, u16 per pixel.
void write_prediction_map(const io::LabelMap& map, const std::filesystem::path& path);
io::LabelMap read_prediction_map(const std::filesystem::path& path);

}  // namespace hsiaccel::engine
