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

#include <bit>

#include <gtest/gtest.h>

#include "hsiaccel/dse.hpp"
#include "oracle.hpp"

using namespace hsiaccel;
using namespace hsiaccel::dse;

namespace {

model::NetworkSpec preset_spec(const std::string& name) {
  const auto& p = model::find_preset(name);
  return model::derive_config(p.spectral, p.classes, p.params);
}

ExploreOptions small_grid() {
  ExploreOptions o;
  o.conv_kernels = {1, 40};
  o.fc_multipliers = {1, 120};
  return o;
}

}  // namespace

TEST(Explore, DefaultBudgetIsRespected) {
  const auto r = explore(preset_spec("indian-pines"), engine::HwParams{});
  EXPECT_TRUE(r.best.feasible);
  EXPECT_LE(9 * r.best.conv_kernels + r.best.fc_multipliers, 900);
  EXPECT_EQ(r.search_space_size, std::size_t(99 * 891));
  ASSERT_TRUE(r.best_pow2.has_value());
  EXPECT_TRUE(std::has_single_bit(static_cast<unsigned>(r.best_pow2->conv_kernels)));
  EXPECT_TRUE(std::has_single_bit(static_cast<unsigned>(r.best_pow2->fc_multipliers)));
  EXPECT_LE(r.best.total_cycles, r.best_pow2->total_cycles);
}

TEST(Explore, TinyBudgetIsInfeasible) {
  engine::HwParams hw;
  hw.dsp_budget = 9;
  EXPECT_THROW(explore(preset_spec("salinas"), hw), InfeasibleError);
}

TEST(Explore, BramBudgetCanExcludeEverything) {
  engine::HwParams hw;
  hw.bram_budget = 10;
  EXPECT_THROW(explore(preset_spec("ksc"), hw), InfeasibleError);
}

TEST(Explore, BadRanges) {
  ExploreOptions o;
  o.conv_kernels = {0, 4};
  EXPECT_THROW(explore(preset_spec("ksc"), engine::HwParams{}, o), ConfigError);
  o.conv_kernels = {5, 4};
  EXPECT_THROW(explore(preset_spec("ksc"), engine::HwParams{}, o), ConfigError);
  o = {};
  o.conv_kernels = {3, 3};
  o.pow2_only = true;
  EXPECT_THROW(explore(preset_spec("ksc"), engine::HwParams{}, o), ConfigError);
}

TEST(Explore, MatchesIndependentScan) {
  for (const auto& p : model::presets()) {
    const auto spec = model::derive_config(p.spectral, p.classes, p.params);
    for (Index budget : {150, 400}) {
      engine::HwParams hw;
      hw.dsp_budget = budget;
      const auto o = small_grid();
      const auto r = explore(spec, hw, o);
      const auto ref = oracle::scan_best(spec, hw, o.conv_kernels.lo, o.conv_kernels.hi, o.fc_multipliers.lo,
                                         o.fc_multipliers.hi);
      EXPECT_EQ(r.best.total_cycles, ref.cycles) << p.name;
      EXPECT_EQ(r.best.conv_kernels, ref.pc) << p.name;
      EXPECT_EQ(r.best.fc_multipliers, ref.pf) << p.name;
      EXPECT_EQ(r.best.dsp_used, ref.dsp) << p.name;
    }
  }
}

TEST(Explore, ParetoFrontIsNondominatedAndSorted) {
  const auto spec = preset_spec("botswana");
  engine::HwParams hw;
  hw.dsp_budget = 500;
  const auto o = small_grid();
  const auto r = explore(spec, hw, o);
  ASSERT_FALSE(r.pareto.empty());
  for (std::size_t i = 1; i < r.pareto.size(); ++i) {
    EXPECT_LT(r.pareto[i - 1].dsp_used, r.pareto[i].dsp_used);
    EXPECT_GT(r.pareto[i - 1].total_cycles, r.pareto[i].total_cycles);
  }
  EXPECT_EQ(r.pareto.back().total_cycles, r.best.total_cycles);
  // No feasible point dominates a front entry, and every point is covered.
  for (Index pc = o.conv_kernels.lo; pc <= o.conv_kernels.hi; ++pc)
    for (Index pf = o.fc_multipliers.lo; pf <= o.fc_multipliers.hi; ++pf) {
      const std::int64_t dsp = 9 * pc + pf;
      if (dsp > hw.dsp_budget) continue;
      const auto cyc = oracle::point_cycles(spec, hw, pc, pf);
      bool covered = false;
      for (const auto& f : r.pareto) {
        EXPECT_FALSE((dsp <= f.dsp_used && cyc < f.total_cycles) || (dsp < f.dsp_used && cyc <= f.total_cycles))
            << "(" << pc << "," << pf << ") dominates a front point";
        covered |= f.dsp_used <= dsp && f.total_cycles <= cyc;
      }
      EXPECT_TRUE(covered);
    }
}

TEST(Explore, ThreadCountDoesNotChangeResult) {
  const auto spec = preset_spec("salinas");
  auto o = small_grid();
  o.threads = 1;
  const auto a = explore(spec, engine::HwParams{}, o);
  o.threads = 8;
  const auto b = explore(spec, engine::HwParams{}, o);
  EXPECT_EQ(a.best.conv_kernels, b.best.conv_kernels);
  EXPECT_EQ(a.best.fc_multipliers, b.best.fc_multipliers);
  ASSERT_EQ(a.pareto.size(), b.pareto.size());
  for (std::size_t i = 0; i < a.pareto.size(); ++i) {
    EXPECT_EQ(a.pareto[i].conv_kernels, b.pareto[i].conv_kernels);
    EXPECT_EQ(a.pareto[i].fc_multipliers, b.pareto[i].fc_multipliers);
  }
}

TEST(Explore, Pow2Mode) {
  ExploreOptions o;
  o.pow2_only = true;
  const auto r = explore(preset_spec("ksc"), engine::HwParams{}, o);
  EXPECT_EQ(r.search_space_size, std::size_t(7 * 10));  // 1..64, 1..512
  EXPECT_FALSE(r.best_pow2.has_value());
  EXPECT_TRUE(std::has_single_bit(static_cast<unsigned>(r.best.conv_kernels)));
}

TEST(Explore, BudgetMonotone) {
  const auto spec = preset_spec("indian-pines");
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (Index budget : {100, 300, 500, 700, 900}) {
    engine::HwParams hw;
    hw.dsp_budget = budget;
    const auto r = explore(spec, hw, small_grid());
    EXPECT_LE(r.best.total_cycles, prev) << budget;
    prev = r.best.total_cycles;
  }
}

TEST(Evaluate, ReferencePoint) {
  const auto p = evaluate(preset_spec("indian-pines"), engine::HwParams{});
  EXPECT_EQ(p.dsp_used, 832);
  EXPECT_TRUE(p.feasible);
}
