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

// Exhaustive search over (P_C, P_F) for the lowest modeled latency under
// the DSP and BRAM budgets.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hsiaccel/perf.hpp"

namespace hsiaccel::dse {

struct Range {
  Index lo = 1;
  Index hi = 1;
};

struct DesignPoint {
  Index conv_kernels = 0;
  Index fc_multipliers = 0;
  std::int64_t total_cycles = 0;
  std::int64_t dsp_used = 0;
  std::int64_t bram_used = 0;
  bool feasible = false;
};

struct ParetoPoint {
  std::int64_t dsp_used = 0;
  std::int64_t total_cycles = 0;
  Index conv_kernels = 0;
  Index fc_multipliers = 0;
};

struct ExploreOptions {
  Range conv_kernels{1, 99};
  Range fc_multipliers{1, 891};
  std::int64_t amortize_weights_over = 1;
  /// Evaluate only power-of-two P_C / P_F inside the ranges.
  bool pow2_only = false;
  unsigned threads = 1;
};

struct DseResult {
  DesignPoint best;
  /// Set when the full grid was searched: the best power-of-two point too.
  std::optional<DesignPoint> best_pow2;
  /// Nondominated (dsp_used, total_cycles) among feasible points, by dsp_used.
  std::vector<ParetoPoint> pareto;
  std::size_t search_space_size = 0;
  std::size_t feasible_count = 0;
};

/// True when a should be preferred over b: fewer cycles, then fewer DSPs,
/// then smaller P_C.
bool better(const DesignPoint& a, const DesignPoint& b);

DesignPoint evaluate(const model::NetworkSpec& spec, const engine::HwParams& hw, std::int64_t amortize = 1);

/// Budgets come from hw_base. InfeasibleError when no point fits.
DseResult explore(const model::NetworkSpec& spec, const engine::HwParams& hw_base, const ExploreOptions& opts = {});

}  // namespace hsiaccel::dse
