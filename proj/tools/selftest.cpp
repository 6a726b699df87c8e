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


#include "selftest.hpp"

#include <functional>
#include <string>

#include "fixtures.hpp"
#include "hsiaccel/dse.hpp"
#include "hsiaccel/perf.hpp"
#include "oracle.hpp"

namespace tools {

using namespace hsiaccel;
using fixtures::uniform_int;

namespace {

std::vector<int> ints(const quant::QTensor& t) {
  return {t.values.data().data(), t.values.data().data() + t.values.size()};
}

int layer_failures(model::LayerKind kind, int cases, std::mt19937_64& rng) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const bool fc = kind == model::LayerKind::fc;
    const auto l = fc ? fixtures::layer(kind, 1, 1, uniform_int(rng, 1, 400), uniform_int(rng, 1, 64),
                                        uniform_int(rng, 0, 1))
                      : fixtures::layer(kind, uniform_int(rng, 3, 8), uniform_int(rng, 3, 12),
                                        uniform_int(rng, 1, 8), uniform_int(rng, 1, 8), uniform_int(rng, 0, 1));
    const int in_e = uniform_int(rng, -16, -4);
    const auto w = fixtures::random_qweights(rng, l, in_e);
    const auto x = fixtures::random_qtensor(rng, l.in_shape, in_e);
    engine::HwParams hw;
    hw.conv_kernels = uniform_int(rng, 1, 99);
    hw.fc_multipliers = uniform_int(rng, 1, 891);
    const auto ref = oracle::from_qlayer(w, l.relu_after);
    if (fc) {
      bad += ints(engine::run_fc(l, x, w, hw)) != oracle::fc(ints(x), ref);
    } else {
      const auto y = kind == model::LayerKind::conv3x3 ? engine::run_conv3x3(l, x, w, hw)
                                                       : engine::run_conv1x1(l, x, w, hw);
      bad += ints(y) != oracle::conv(ints(x), l.in_shape.height, l.in_shape.width, ref);
    }
  }
  return bad;
}

int schedule_failures(int cases, std::mt19937_64& rng) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    perf::ScheduleInput in;
    in.input_cycles = uniform_int(rng, 0, 2000);
    in.output_cycles = uniform_int(rng, 0, 50);
    for (int n = uniform_int(rng, 1, 12); n > 0; --n) {
      in.weight_cycles.push_back(uniform_int(rng, 0, 5000));
      in.compute_cycles.push_back(uniform_int(rng, 0, 5000));
    }
    const auto t = perf::schedule(in);
    const auto s = oracle::simulate(in.input_cycles, in.weight_cycles, in.compute_cycles, in.output_cycles);
    bad += t.total_cycles != s.total || t.stall_cycles != s.stall;
  }
  return bad;
}

int search_failures(int pf_hi) {
  int bad = 0;
  for (const auto& p : model::presets()) {
    const auto spec = model::derive_config(p.spectral, p.classes, p.params);
    engine::HwParams hw;
    dse::ExploreOptions opts;
    opts.fc_multipliers = {1, pf_hi};
    const auto r = dse::explore(spec, hw, opts);
    const auto ref = oracle::scan_best(spec, hw, 1, 99, 1, pf_hi);
    bad += r.best.conv_kernels != ref.pc || r.best.fc_multipliers != ref.pf || r.best.total_cycles != ref.cycles;
  }
  return bad;
}

}  // namespace

bool run_selftest(bool quick, std::ostream& out) {
  std::mt19937_64 rng(2026);
  const int n = quick ? 100 : 1000;
  struct Suite {
    std::string name;
    int cases;
    std::function<int()> run;
  };
  const std::vector<Suite> suites{
      {"conv3x3", n, [&] { return layer_failures(model::LayerKind::conv3x3, n, rng); }},
      {"conv1x1", n, [&] { return layer_failures(model::LayerKind::conv1x1, n, rng); }},
      {"fc", n, [&] { return layer_failures(model::LayerKind::fc, n, rng); }},
      {"schedule", n, [&] { return schedule_failures(n, rng); }},
      {"dse", 4, [&] { return search_failures(quick ? 128 : 891); }},
  };
  int failed = 0;
  for (const auto& s : suites) {
    const int bad = s.run();
    out << "selftest: " << s.name << " " << (s.cases - bad) << "/" << s.cases << (bad ? " FAILED" : " ok") << "\n";
    failed += bad != 0;
  }
  out << (failed ? "selftest: " + std::to_string(failed) + " suite(s) failed" : std::string("selftest: all passed"))
      << "\n";
  return failed == 0;
}

}  // namespace tools
