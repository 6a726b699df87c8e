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

#include "hsiaccel/perf.hpp"

#include <algorithm>

namespace hsiaccel::perf {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a <= 0 ? 0 : (a + b - 1) / b; }

std::int64_t transfer_cycles(std::int64_t bytes, const HwParams& hw) {
  if (bytes < 0) throw ModelError("negative transfer size");
  return ceil_div(bytes, hw.bus_bytes_per_cycle);
}

std::int64_t dsp_used(const HwParams& hw) { return 9 * hw.conv_kernels + hw.fc_multipliers; }

LayerCost layer_cycles(const model::LayerSpec& layer, const HwParams& hw) {
  hw.validate();
  LayerCost c;
  c.name = layer.name;
  c.kind = layer.kind;
  const Index branches = layer.branches;
  switch (layer.kind) {
    case model::LayerKind::conv3x3:
      c.kernel_ops = layer.out_shape.height * layer.out_shape.width * layer.weight_shape[2] * layer.weight_shape[3] *
                     branches;
      c.parallelism = hw.conv_kernels;
      break;
    case model::LayerKind::conv1x1:
      c.kernel_ops = layer.out_shape.height * layer.out_shape.width * layer.weight_shape[2] * layer.weight_shape[3] *
                     branches;
      c.parallelism = 9 * hw.conv_kernels;
      break;
    case model::LayerKind::fc:
      c.kernel_ops = layer.weight_shape[0] * layer.weight_shape[1];
      c.parallelism = hw.fc_multipliers;
      break;
    default:
      throw ModelError("no cost model for " + model::to_string(layer.kind) + " layer '" + layer.name + "'");
  }
  c.compute_cycles = ceil_div(c.kernel_ops, c.parallelism);
  // Shared Block-2 weights cross the bus once for all bands.
  c.weight_bytes = (layer.weight_count() + layer.bias_count()) * kBytesPerWord;
  c.in_bytes = layer.in_shape.size() * branches * kBytesPerWord;
  c.out_bytes = layer.out_shape.size() * branches * kBytesPerWord;
  c.transfer_cycles = transfer_cycles(c.weight_bytes, hw);
  return c;
}

std::vector<LayerCost> network_costs(const model::NetworkSpec& spec, const HwParams& hw) {
  std::vector<LayerCost> costs;
  for (auto i : spec.weighted_layers()) {
    auto c = layer_cycles(spec.layers[i], hw);
    c.layer_index = i;
    costs.push_back(std::move(c));
  }
  return costs;
}

Timeline schedule(const ScheduleInput& in, double clock_mhz) {
  const std::size_t n = in.compute_cycles.size();
  if (in.weight_cycles.size() != n) throw ModelError("schedule: weight and compute phase counts differ");
  Timeline t;
  t.layer_stalls.assign(n, 0);
  if (n == 0) {
    t.total_cycles = in.input_cycles + in.output_cycles;
    t.phases.push_back({"input", Resource::bus, 0, in.input_cycles});
    t.phases.push_back({"output", Resource::bus, in.input_cycles, t.total_cycles});
    t.us_per_pixel = double(t.total_cycles) / clock_mhz;
    return t;
  }

  t.phases.push_back({"input", Resource::bus, 0, in.input_cycles});
  std::int64_t bus = in.input_cycles;
  t.phases.push_back({"weights.0", Resource::bus, bus, bus + in.weight_cycles[0]});
  bus += in.weight_cycles[0];

  std::int64_t start = bus;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t end = start + in.compute_cycles[i];
    t.phases.push_back({"compute." + std::to_string(i), Resource::compute, start, end});
    t.compute_cycles += in.compute_cycles[i];
    if (i + 1 < n) {
      // The next weights occupy the slot freed when layer i-1 finished,
      // i.e. they stream in alongside layer i.
      const std::int64_t w = in.weight_cycles[i + 1];
      t.phases.push_back({"weights." + std::to_string(i + 1), Resource::bus, start, start + w});
      const std::int64_t step = std::max(in.compute_cycles[i], w);
      t.layer_stalls[i + 1] = step - in.compute_cycles[i];
      t.stall_cycles += t.layer_stalls[i + 1];
      start += step;
    } else {
      start = end;
    }
  }
  t.phases.push_back({"output", Resource::bus, start, start + in.output_cycles});
  t.total_cycles = start + in.output_cycles;
  t.us_per_pixel = double(t.total_cycles) / clock_mhz;
  return t;
}

ScheduleInput schedule_input(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over) {
  if (amortize_weights_over < 1) throw ConfigError("weight amortization must be at least 1 pixel");
  ScheduleInput in;
  in.input_cycles = transfer_cycles(spec.input_shape().size() * kBytesPerWord, hw);
  in.output_cycles = transfer_cycles(spec.classes * kBytesPerWord, hw);
  for (const auto& c : network_costs(spec, hw)) {
    in.weight_cycles.push_back(ceil_div(c.transfer_cycles, amortize_weights_over));
    in.compute_cycles.push_back(c.compute_cycles);
  }
  return in;
}

Timeline schedule(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over) {
  return schedule(schedule_input(spec, hw, amortize_weights_over), hw.clock_mhz);
}

ResourceEstimate estimate_resources(const model::NetworkSpec& spec, const HwParams& hw) {
  hw.validate();
  ResourceEstimate r;
  r.dsp_used = dsp_used(hw);
  r.activation_words = engine::activation_buffer_words(spec);
  for (const auto& l : spec.layers) r.weight_buffer_words = std::max<std::int64_t>(r.weight_buffer_words, l.weight_count());
  const std::int64_t bits = (r.activation_words + 2 * r.weight_buffer_words) * kBytesPerWord * 8;
  r.bram_used = ceil_div(bits, kBramBlockBits);
  r.dsp_ok = r.dsp_used <= hw.dsp_budget;
  r.bram_ok = r.bram_used <= hw.bram_budget;
  r.within_budget = r.dsp_ok && r.bram_ok;
  return r;
}

Throughput throughput(std::int64_t total_cycles, const HwParams& hw) {
  Throughput t;
  t.us_per_pixel = double(total_cycles) / hw.clock_mhz;
  t.pixels_per_second = t.us_per_pixel > 0 ? 1e6 / t.us_per_pixel : 0.0;
  t.mpixels_per_second = t.pixels_per_second / 1e6;
  t.kpixels_per_second_per_dsp = t.pixels_per_second / 1e3 / double(hw.dsp_budget);
  return t;
}

PerfReport throughput_report(const model::NetworkSpec& spec, const HwParams& hw, std::int64_t amortize_weights_over) {
  PerfReport r;
  r.layers = network_costs(spec, hw);
  r.timeline = schedule(spec, hw, amortize_weights_over);
  r.resources = estimate_resources(spec, hw);
  r.rates = throughput(r.timeline.total_cycles, hw);
  r.amortize_weights_over = amortize_weights_over;
  return r;
}

}  // namespace hsiaccel::perf
