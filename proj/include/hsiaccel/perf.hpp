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

// Analytic cycle, latency and resource model of the accelerator.
//
// One shared off-chip bus moves the input patch, each layer's weights and
// the output logits. Weights are double-buffered: layer i+1's weights stream
// in while layer i computes, so
//
//   total = T_in + T_w(1) + sum_{i<n} max(C_i, T_w(i+1)) + C_n + T_out
//
// and any T_w(i+1) > C_i shows up as a stall before layer i+1.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsiaccel/engine.hpp"
#include "hsiaccel/model.hpp"

namespace hsiaccel::perf {

using engine::HwParams;

inline constexpr Index kBytesPerWord = 2;
inline constexpr Index kBramBlockBits = 18432;

struct LayerCost {
  std::size_t layer_index = 0;
  std::string name;
  model::LayerKind kind = model::LayerKind::fc;
  /// 9-wide MAC groups (conv3x3) or scalar MACs (conv1x1, fc), all bands.
  std::int64_t kernel_ops = 0;
  /// Units of kernel_ops retired per cycle.
  std::int64_t parallelism = 1;
  std::int64_t weight_bytes = 0;
  std::int64_t in_bytes = 0;
  std::int64_t out_bytes = 0;
  std::int64_t compute_cycles = 0;
  std::int64_t transfer_cycles = 0;
};

std::int64_t ceil_div(std::int64_t a, std::int64_t b);

/// Cost of one conv/fc layer; ModelError for any other kind.
LayerCost layer_cycles(const model::LayerSpec& layer, const HwParams& hw);
std::vector<LayerCost> network_costs(const model::NetworkSpec& spec, const HwParams& hw);

std::int64_t transfer_cycles(std::int64_t bytes, const HwParams& hw);

/// Phase lengths fed to the scheduler.
struct ScheduleInput {
  std::int64_t input_cycles = 0;
  std::vector<std::int64_t> weight_cycles;
  std::vector<std::int64_t> compute_cycles;
  std::int64_t output_cycles = 0;
};

enum class Resource { bus, compute };

struct Interval {
  std::string label;
  Resource resource = Resource::bus;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct Timeline {
  std::vector<Interval> phases;
  std::int64_t total_cycles = 0;
  std::int64_t compute_cycles = 0;
  std::int64_t stall_cycles = 0;
  /// Stall in front of each layer's compute (0 for the first layer).
  std::vector<std::int64_t> layer_stalls;
  double us_per_pixel = 0.0;
};

Timeline schedule(const ScheduleInput& in, double clock_mhz = 250.0);

/// Builds the phases from the layer costs. Weight loads are divided (ceil)
/// by `amortize_weights_over`, the number of pixels sharing one weight pass.
ScheduleInput schedule_input(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over = 1);
Timeline schedule(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over = 1);

struct ResourceEstimate {
  std::int64_t dsp_used = 0;
  std::int64_t bram_used = 0;
  std::int64_t activation_words = 0;
  std::int64_t weight_buffer_words = 0;
  bool dsp_ok = false;
  bool bram_ok = false;
  bool within_budget = false;
};

/// DSPs: 9 per CONV kernel plus one per FC multiplier. BRAM: the largest
/// layer's (input + output) activations plus the largest weight tensor
/// double-buffered, in 18Kb blocks.
ResourceEstimate estimate_resources(const model::NetworkSpec& spec, const HwParams& hw);

std::int64_t dsp_used(const HwParams& hw);

struct Throughput {
  double us_per_pixel = 0.0;
  double pixels_per_second = 0.0;
  double mpixels_per_second = 0.0;
  /// Normalised by the device DSP count (dsp_budget).
  double kpixels_per_second_per_dsp = 0.0;
};

Throughput throughput(std::int64_t total_cycles, const HwParams& hw);

struct PerfReport {
  std::vector<LayerCost> layers;
  Timeline timeline;
  ResourceEstimate resources;
  Throughput rates;
  std::int64_t amortize_weights_over = 1;
};

PerfReport throughput_report(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over = 1);

}  // namespace hsiaccel::perf
