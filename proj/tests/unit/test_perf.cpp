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

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hsiaccel/perf.hpp"
#include "oracle.hpp"

using namespace hsiaccel;
using namespace hsiaccel::perf;
using fixtures::uniform_int;

namespace {

model::NetworkSpec reference_spec() { return model::derive_config(220, 9, {4, 5, model::Block1Kernel::k3x3}); }

model::NetworkSpec preset_spec(const std::string& name) {
  const auto& p = model::find_preset(name);
  return model::derive_config(p.spectral, p.classes, p.params);
}

const model::LayerSpec& named(const model::NetworkSpec& s, const std::string& name) {
  for (const auto& l : s.layers)
    if (l.name == name) return l;
  throw std::runtime_error("no layer " + name);
}

}  // namespace

TEST(LayerCycles, Block2FirstLayerAllBands) {
  const auto c = layer_cycles(named(reference_spec(), "block2.conv1"), HwParams{});
  EXPECT_EQ(c.kernel_ops, 2968);
  EXPECT_EQ(c.compute_cycles, 47);
}

TEST(LayerCycles, Block1PointwiseUsesNineLanesPerKernel) {
  const auto spec = preset_spec("indian-pines");
  const auto c = layer_cycles(named(spec, "block1.conv"), HwParams{});
  EXPECT_EQ(c.kernel_ops, 435600);
  EXPECT_EQ(c.parallelism, 576);
  EXPECT_EQ(c.compute_cycles, 757);
}

TEST(LayerCycles, HiddenFc) {
  const auto c = layer_cycles(named(reference_spec(), "block3.fc1"), HwParams{});
  EXPECT_EQ(c.kernel_ops, 90240);
  EXPECT_EQ(c.compute_cycles, 353);
}

TEST(LayerCycles, UnsupportedKind) {
  EXPECT_THROW(layer_cycles(named(reference_spec(), "block1.relu"), HwParams{}), ModelError);
  EXPECT_THROW(layer_cycles(named(reference_spec(), "block3.softmax"), HwParams{}), ModelError);
}

TEST(LayerCycles, SharedWeightsCrossTheBusOnce) {
  const auto c = layer_cycles(named(reference_spec(), "block2.conv2"), HwParams{});
  EXPECT_EQ(c.weight_bytes, (3 * 3 * 2 * 4 + 4) * 2);
}

TEST(TransferCycles, Examples) {
  HwParams hw;
  EXPECT_EQ(transfer_cycles(0, hw), 0);
  EXPECT_EQ(transfer_cycles(96800, hw), 12100);
  EXPECT_EQ(transfer_cycles(11000, hw), 1375);
  EXPECT_EQ(transfer_cycles(9, hw), 2);
  EXPECT_THROW(transfer_cycles(-1, hw), ModelError);
}

TEST(Schedule, WorkedExample) {
  const auto t = schedule(ScheduleInput{2, {4, 4, 4}, {10, 10, 10}, 1});
  EXPECT_EQ(t.total_cycles, 37);
  EXPECT_EQ(t.stall_cycles, 0);
  EXPECT_EQ(oracle::simulate(2, {4, 4, 4}, {10, 10, 10}, 1).total, 37);
}

TEST(Schedule, NoWeightTraffic) {
  const auto t = schedule(ScheduleInput{5, {0, 0, 0, 0}, {3, 9, 1, 4}, 2});
  EXPECT_EQ(t.total_cycles, 5 + 3 + 9 + 1 + 4 + 2);
}

TEST(Schedule, SlowWeightLoadStalls) {
  const auto t = schedule(ScheduleInput{0, {0, 100, 0}, {10, 10, 10}, 0});
  EXPECT_EQ(t.layer_stalls[1], 90);
  EXPECT_EQ(t.stall_cycles, 90);
  EXPECT_EQ(t.compute_cycles, 30);
  EXPECT_EQ(t.total_cycles, 120);
}

TEST(Schedule, EmptyNetwork) {
  EXPECT_EQ(schedule(ScheduleInput{3, {}, {}, 4}).total_cycles, 7);
}

TEST(Schedule, PhaseCountMismatch) {
  EXPECT_THROW(schedule(ScheduleInput{0, {1}, {1, 2}, 0}), ModelError);
}

TEST(Schedule, MatchesEventSimulation) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = uniform_int(rng, 1, 12);
    ScheduleInput in;
    in.input_cycles = uniform_int(rng, 0, 2000);
    in.output_cycles = uniform_int(rng, 0, 50);
    for (int i = 0; i < n; ++i) {
      // Alternate compute- and transfer-bound layers, with zeros mixed in.
      in.weight_cycles.push_back(uniform_int(rng, 0, 3) == 0 ? 0 : uniform_int(rng, 0, 5000));
      in.compute_cycles.push_back(uniform_int(rng, 0, 3) == 0 ? 0 : uniform_int(rng, 0, 5000));
    }
    const auto t = schedule(in);
    const auto sim = oracle::simulate(in.input_cycles, in.weight_cycles, in.compute_cycles, in.output_cycles);
    ASSERT_EQ(t.total_cycles, sim.total) << "trial " << trial;
    ASSERT_EQ(t.stall_cycles, sim.stall) << "trial " << trial;
    ASSERT_EQ(t.compute_cycles, sim.compute);
  }
}

TEST(Schedule, TimelineInvariants) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = uniform_int(rng, 1, 9);
    ScheduleInput in{uniform_int(rng, 0, 100), {}, {}, uniform_int(rng, 0, 10)};
    for (int i = 0; i < n; ++i) {
      in.weight_cycles.push_back(uniform_int(rng, 0, 300));
      in.compute_cycles.push_back(uniform_int(rng, 0, 300));
    }
    const auto t = schedule(in);
    std::vector<const Interval*> compute, weights;
    for (const auto& p : t.phases) {
      if (p.label.rfind("compute.", 0) == 0) compute.push_back(&p);
      if (p.label.rfind("weights.", 0) == 0) weights.push_back(&p);
    }
    ASSERT_EQ(compute.size(), std::size_t(n));
    ASSERT_EQ(weights.size(), std::size_t(n));
    for (int i = 0; i + 1 < n; ++i) {
      EXPECT_LE(weights[i + 1]->start, compute[i]->start);
      EXPECT_EQ(compute[i + 1]->start, std::max(compute[i]->end, weights[i + 1]->end));
    }
    // One bus, one compute engine: intervals on each resource never overlap.
    for (auto res : {Resource::bus, Resource::compute}) {
      std::vector<Interval> on;
      for (const auto& p : t.phases)
        if (p.resource == res) on.push_back(p);
      std::sort(on.begin(), on.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < on.size(); ++i) EXPECT_LE(on[i - 1].end, on[i].start);
    }
  }
}

TEST(Resources, DspAnchor) {
  const auto spec = preset_spec("indian-pines");
  EXPECT_EQ(estimate_resources(spec, HwParams{}).dsp_used, 832);
  HwParams one;
  one.conv_kernels = 1;
  one.fc_multipliers = 1;
  EXPECT_EQ(estimate_resources(spec, one).dsp_used, 10);
}

TEST(Resources, PresetsFitBram) {
  for (const auto& p : model::presets()) {
    const auto r = estimate_resources(model::derive_config(p.spectral, p.classes, p.params), HwParams{});
    EXPECT_LE(r.bram_used, 545) << p.name;
    EXPECT_TRUE(r.within_budget) << p.name;
    EXPECT_EQ(r.bram_used, oracle::point_bram(model::derive_config(p.spectral, p.classes, p.params))) << p.name;
  }
}

TEST(Resources, ReferenceBufferRule) {
  // 3x3x220x220 Block-1 kernel double-buffered plus the largest layer's
  // activations: (5*5*220 + 3*3*220 + 2 * 435600) words of 16 bits.
  const auto r = estimate_resources(reference_spec(), HwParams{});
  EXPECT_EQ(r.weight_buffer_words, 435600);
  EXPECT_EQ(r.activation_words, 5 * 5 * 220 + 3 * 3 * 220);
  EXPECT_EQ(r.bram_used, (std::int64_t{5 * 5 * 220 + 3 * 3 * 220 + 2 * 435600} * 16 + 18431) / 18432);
}

TEST(Throughput, UnitConversions) {
  HwParams hw;
  const auto t = throughput(2500, hw);
  EXPECT_DOUBLE_EQ(t.us_per_pixel, 10.0);
  EXPECT_DOUBLE_EQ(t.pixels_per_second, 1e5);
  // ~0.09 Mpixels/s is ~11.1 us/pixel, and 0.1 Kpixels/s/DSP on 900 DSPs.
  const auto k = throughput(2778, hw);
  EXPECT_NEAR(k.mpixels_per_second, 0.09, 0.001);
  EXPECT_NEAR(k.kpixels_per_second_per_dsp, 0.1, 0.001);
}

TEST(Perf, MonotoneInParallelismAndBandwidth) {
  for (const auto& p : model::presets()) {
    const auto spec = model::derive_config(p.spectral, p.classes, p.params);
    HwParams hw;
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (Index pc : {1, 2, 3, 8, 16, 31, 64, 99}) {
      hw.conv_kernels = pc;
      const auto t = schedule(spec, hw).total_cycles;
      EXPECT_LE(t, prev) << p.name << " P_C=" << pc;
      prev = t;
    }
    hw = {};
    prev = std::numeric_limits<std::int64_t>::max();
    for (Index pf : {1, 7, 64, 256, 891}) {
      hw.fc_multipliers = pf;
      const auto t = schedule(spec, hw).total_cycles;
      EXPECT_LE(t, prev) << p.name << " P_F=" << pf;
      prev = t;
    }
    hw = {};
    prev = std::numeric_limits<std::int64_t>::max();
    for (Index bus : {1, 2, 4, 8, 16, 64, 512}) {
      hw.bus_bytes_per_cycle = bus;
      const auto t = schedule(spec, hw).total_cycles;
      EXPECT_LE(t, prev) << p.name << " bus=" << bus;
      prev = t;
    }
  }
}

TEST(Perf, CeilDivisionScaling) {
  // Doubling P_C at most halves conv cycles and stays within one cycle of
  // the ideal halving.
  for (const auto& p : model::presets()) {
    const auto spec = model::derive_config(p.spectral, p.classes, p.params);
    for (Index pc = 1; pc <= 64; ++pc) {
      HwParams a, b;
      a.conv_kernels = pc;
      b.conv_kernels = 2 * pc;
      for (auto li : spec.weighted_layers()) {
        const auto& l = spec.layers[li];
        if (l.kind == model::LayerKind::fc) continue;
        const auto ca = layer_cycles(l, a).compute_cycles, cb = layer_cycles(l, b).compute_cycles;
        EXPECT_GE(2 * cb, ca);
        EXPECT_LE(cb, (ca + 1) / 2 + 1);
      }
    }
  }
}

TEST(Perf, AmortizationLimit) {
  for (const auto& p : model::presets()) {
    const auto spec = model::derive_config(p.spectral, p.classes, p.params);
    const auto in = schedule_input(spec, HwParams{});
    std::int64_t ideal = in.input_cycles + in.output_cycles;
    for (auto c : in.compute_cycles) ideal += c;
    const auto big = schedule(spec, HwParams{}, 1'000'000'000).total_cycles;
    // ceil keeps one cycle per weight load at most; the first one is exposed.
    EXPECT_GE(big, ideal);
    EXPECT_LE(big, ideal + 1);
    EXPECT_THROW(schedule(spec, HwParams{}, 0), ConfigError);
  }
}

TEST(Perf, ReportSeparatesComputeAndStalls) {
  const auto spec = preset_spec("ksc");
  const auto r = throughput_report(spec, HwParams{});
  EXPECT_EQ(r.resources.dsp_used, 832);
  EXPECT_EQ(r.timeline.total_cycles, oracle::point_cycles(spec, HwParams{}, 64, 256));
  EXPECT_GT(r.timeline.stall_cycles, 0);
  std::int64_t sum = 0;
  for (const auto& l : r.layers) sum += l.compute_cycles;
  EXPECT_EQ(sum, r.timeline.compute_cycles);
}
