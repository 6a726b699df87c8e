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

#include "hsiaccel/dse.hpp"

#include <algorithm>
#include <bit>

#include "hsiaccel/parallel.hpp"

namespace hsiaccel::dse {

bool better(const DesignPoint& a, const DesignPoint& b) {
  if (a.total_cycles != b.total_cycles) return a.total_cycles < b.total_cycles;
  if (a.dsp_used != b.dsp_used) return a.dsp_used < b.dsp_used;
  return a.conv_kernels < b.conv_kernels;
}

DesignPoint evaluate(const model::NetworkSpec& spec, const engine::HwParams& hw, std::int64_t amortize) {
  DesignPoint p;
  p.conv_kernels = hw.conv_kernels;
  p.fc_multipliers = hw.fc_multipliers;
  p.total_cycles = perf::schedule(spec, hw, amortize).total_cycles;
  const auto res = perf::estimate_resources(spec, hw);
  p.dsp_used = res.dsp_used;
  p.bram_used = res.bram_used;
  p.feasible = res.within_budget;
  return p;
}

namespace {

std::vector<Index> axis(Range r, bool pow2_only) {
  std::vector<Index> v;
  for (Index x = r.lo; x <= r.hi; ++x) {
    if (!pow2_only || std::has_single_bit(static_cast<std::uint64_t>(x))) v.push_back(x);
  }
  return v;
}

bool is_pow2_point(const DesignPoint& p) {
  return std::has_single_bit(static_cast<std::uint64_t>(p.conv_kernels)) &&
         std::has_single_bit(static_cast<std::uint64_t>(p.fc_multipliers));
}

}  // namespace

DseResult explore(const model::NetworkSpec& spec, const engine::HwParams& hw_base, const ExploreOptions& opts) {
  hw_base.validate();
  if (opts.conv_kernels.lo < 1 || opts.fc_multipliers.lo < 1 || opts.conv_kernels.hi < opts.conv_kernels.lo ||
      opts.fc_multipliers.hi < opts.fc_multipliers.lo) {
    throw ConfigError("design-space ranges must be non-empty and start at 1 or above");
  }
  const auto pcs = axis(opts.conv_kernels, opts.pow2_only);
  const auto pfs = axis(opts.fc_multipliers, opts.pow2_only);
  if (pcs.empty() || pfs.empty()) throw ConfigError("design-space ranges contain no candidate points");

  // Everything except the compute cycles is independent of (P_C, P_F), so
  // the schedule is rebuilt from one precomputed input per point.
  const auto base_in = perf::schedule_input(spec, hw_base, opts.amortize_weights_over);
  const auto bram = perf::estimate_resources(spec, hw_base).bram_used;
  const auto layers = spec.weighted_layers();

  std::vector<DesignPoint> grid(pcs.size() * pfs.size());
  parallel_for(pcs.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    engine::HwParams hw = hw_base;
    hw.conv_kernels = pcs[i];
    auto in = base_in;
    for (std::size_t j = 0; j < pfs.size(); ++j) {
      hw.fc_multipliers = pfs[j];
      for (std::size_t k = 0; k < layers.size(); ++k) {
        in.compute_cycles[k] = perf::layer_cycles(spec.layers[layers[k]], hw).compute_cycles;
      }
      DesignPoint& p = grid[i * pfs.size() + j];
      p.conv_kernels = hw.conv_kernels;
      p.fc_multipliers = hw.fc_multipliers;
      p.total_cycles = perf::schedule(in, hw.clock_mhz).total_cycles;
      p.dsp_used = perf::dsp_used(hw);
      p.bram_used = bram;
      p.feasible = p.dsp_used <= hw.dsp_budget && bram <= hw.bram_budget;
    }
  });

  DseResult r;
  r.search_space_size = grid.size();
  std::vector<const DesignPoint*> feasible;
  for (const auto& p : grid) {
    if (!p.feasible) continue;
    feasible.push_back(&p);
    if (r.feasible_count++ == 0 || better(p, r.best)) r.best = p;
    if (!opts.pow2_only && is_pow2_point(p) && (!r.best_pow2 || better(p, *r.best_pow2))) r.best_pow2 = p;
  }
  if (feasible.empty()) {
    throw InfeasibleError("no (P_C, P_F) point fits " + std::to_string(hw_base.dsp_budget) + " DSPs and " +
                          std::to_string(hw_base.bram_budget) + " BRAM blocks");
  }

  std::sort(feasible.begin(), feasible.end(), [](const DesignPoint* a, const DesignPoint* b) {
    if (a->dsp_used != b->dsp_used) return a->dsp_used < b->dsp_used;
    return better(*a, *b);
  });
  for (const auto* p : feasible) {
    // Within one dsp_used the best point sorts first; later ones never improve.
    if (r.pareto.empty() || p->total_cycles < r.pareto.back().total_cycles) {
      r.pareto.push_back({p->dsp_used, p->total_cycles, p->conv_kernels, p->fc_multipliers});
    }
  }
  return r;
}

}  // namespace hsiaccel::dse
