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

#include "hsiaccel/report.hpp"

#include <cstdio>
#include <sstream>

#include "binary_io.hpp"

namespace hsiaccel::report {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace {

std::string shape_str(const Shape3& s) { return to_string(s); }

std::string weight_str(const std::vector<Index>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "x" : "") + std::to_string(w[i]);
  return s.empty() ? "-" : s;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string block1_str(model::Block1Kernel k) { return k == model::Block1Kernel::k3x3 ? "3x3" : "1x1"; }

}  // namespace

Json hw_json(const engine::HwParams& hw) {
  return Json{{"conv_kernels", hw.conv_kernels},   {"fc_multipliers", hw.fc_multipliers},
              {"clock_mhz", hw.clock_mhz},         {"bus_bytes_per_cycle", hw.bus_bytes_per_cycle},
              {"dsp_budget", hw.dsp_budget},       {"bram_budget", hw.bram_budget}};
}

Json shapes_json(const model::NetworkSpec& spec) {
  Json layers = Json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"name", l.name},
                      {"kind", model::to_string(l.kind)},
                      {"block", l.block},
                      {"in", shape_str(l.in_shape)},
                      {"out", shape_str(l.out_shape)},
                      {"weights", weight_str(l.weight_shape)},
                      {"branches", l.branches},
                      {"band_shared", l.band_shared}});
  }
  return Json{{"n_spectral", spec.n_spectral}, {"classes", spec.classes},       {"n_bands", spec.n_bands},
              {"patch", spec.patch},           {"block1", block1_str(spec.block1)}, {"concat_len", spec.concat_len},
              {"weighted_layers", spec.weighted_layers().size()}, {"layers", layers}};
}

std::string shapes_text(const model::NetworkSpec& spec) {
  std::ostringstream os;
  os << "n_spectral=" << spec.n_spectral << " classes=" << spec.classes << " n_bands=" << spec.n_bands
     << " patch=" << spec.patch << " block1=" << block1_str(spec.block1) << "\n";
  os << pad("layer", 18) << pad("kind", 11) << pad("in", 12) << pad("out", 12) << pad("weights", 14) << "branches\n";
  for (const auto& l : spec.layers) {
    os << pad(l.name, 18) << pad(model::to_string(l.kind), 11) << pad(shape_str(l.in_shape), 12)
       << pad(shape_str(l.out_shape), 12) << pad(weight_str(l.weight_shape), 14) << l.branches << "\n";
  }
  os << "fc_input=" << spec.concat_len << "\n";
  return os.str();
}

Json perf_json(const model::NetworkSpec& spec, const engine::HwParams& hw, const perf::PerfReport& r) {
  Json layers = Json::array();
  const auto& stalls = r.timeline.layer_stalls;
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    const auto& c = r.layers[i];
    layers.push_back({{"name", c.name},
                      {"kind", model::to_string(c.kind)},
                      {"kernel_ops", c.kernel_ops},
                      {"parallelism", c.parallelism},
                      {"compute_cycles", c.compute_cycles},
                      {"weight_bytes", c.weight_bytes},
                      {"weight_cycles", c.transfer_cycles},
                      {"stall_cycles", i < stalls.size() ? stalls[i] : 0}});
  }
  const auto& t = r.timeline;
  return Json{{"hw", hw_json(hw)},
              {"n_spectral", spec.n_spectral},
              {"classes", spec.classes},
              {"amortize_weights_over", r.amortize_weights_over},
              {"total_cycles", t.total_cycles},
              {"compute_cycles", t.compute_cycles},
              {"stall_cycles", t.stall_cycles},
              {"us_per_pixel", t.us_per_pixel},
              {"pixels_per_second", r.rates.pixels_per_second},
              {"kpixels_per_second_per_dsp", r.rates.kpixels_per_second_per_dsp},
              {"dsp_used", r.resources.dsp_used},
              {"bram_used", r.resources.bram_used},
              {"activation_words", r.resources.activation_words},
              {"weight_buffer_words", r.resources.weight_buffer_words},
              {"within_budget", r.resources.within_budget},
              {"layers", layers}};
}

std::string perf_text(const model::NetworkSpec& spec, const engine::HwParams& hw, const perf::PerfReport& r) {
  std::ostringstream os;
  const auto& t = r.timeline;
  os << "P_C=" << hw.conv_kernels << " P_F=" << hw.fc_multipliers << " clock_mhz=" << fixed(hw.clock_mhz, 1)
     << " bus_bytes_per_cycle=" << hw.bus_bytes_per_cycle << " amortize=" << r.amortize_weights_over << "\n";
  os << pad("layer", 18) << pad("ops", 10) << pad("compute", 10) << pad("weights", 10) << "stall\n";
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    const auto& c = r.layers[i];
    os << pad(c.name, 18) << pad(std::to_string(c.kernel_ops), 10) << pad(std::to_string(c.compute_cycles), 10)
       << pad(std::to_string(c.transfer_cycles), 10) << (i < t.layer_stalls.size() ? t.layer_stalls[i] : 0) << "\n";
  }
  os << "total_cycles=" << t.total_cycles << "\n";
  os << "compute_cycles=" << t.compute_cycles << "\n";
  os << "stall_cycles=" << t.stall_cycles << "\n";
  os << "us_per_pixel=" << fixed(t.us_per_pixel, 3) << "\n";
  os << "pixels_per_second=" << fixed(r.rates.pixels_per_second, 1) << "\n";
  os << "kpixels_per_second_per_dsp=" << fixed(r.rates.kpixels_per_second_per_dsp, 4) << "\n";
  os << "dsp_used=" << r.resources.dsp_used << " (budget " << hw.dsp_budget << ")\n";
  os << "bram_used=" << r.resources.bram_used << " (budget " << hw.bram_budget << ")\n";
  os << "within_budget=" << (r.resources.within_budget ? "yes" : "no") << "\n";
  (void)spec;
  return os.str();
}

namespace {

Json point_json(const dse::DesignPoint& p) {
  return Json{{"P_C", p.conv_kernels},       {"P_F", p.fc_multipliers}, {"total_cycles", p.total_cycles},
              {"dsp_used", p.dsp_used},      {"bram_used", p.bram_used}, {"feasible", p.feasible}};
}

}  // namespace

Json dse_json(const engine::HwParams& hw, const dse::DseResult& r) {
  Json pareto = Json::array();
  for (const auto& p : r.pareto) {
    pareto.push_back({{"dsp_used", p.dsp_used},
                      {"total_cycles", p.total_cycles},
                      {"P_C", p.conv_kernels},
                      {"P_F", p.fc_multipliers}});
  }
  Json doc{{"hw", hw_json(hw)},
           {"search_space_size", r.search_space_size},
           {"feasible_count", r.feasible_count},
           {"best", point_json(r.best)},
           {"best_us_per_pixel", double(r.best.total_cycles) / hw.clock_mhz}};
  doc["best_pow2"] = r.best_pow2 ? point_json(*r.best_pow2) : Json(nullptr);
  doc["pareto"] = pareto;
  return doc;
}

std::string dse_text(const engine::HwParams& hw, const dse::DseResult& r) {
  std::ostringstream os;
  os << "search_space_size=" << r.search_space_size << " feasible=" << r.feasible_count << "\n";
  auto line = [&](const char* tag, const dse::DesignPoint& p) {
    os << tag << " P_C=" << p.conv_kernels << " P_F=" << p.fc_multipliers << " total_cycles=" << p.total_cycles
       << " us_per_pixel=" << fixed(double(p.total_cycles) / hw.clock_mhz, 3) << " dsp_used=" << p.dsp_used
       << " bram_used=" << p.bram_used << "\n";
  };
  line("best", r.best);
  if (r.best_pow2) line("best_pow2", *r.best_pow2);
  os << "pareto_points=" << r.pareto.size() << "\n";
  for (const auto& p : r.pareto) {
    os << "  dsp=" << p.dsp_used << " cycles=" << p.total_cycles << " P_C=" << p.conv_kernels
       << " P_F=" << p.fc_multipliers << "\n";
  }
  return os.str();
}

Json classify_json(const engine::ImageResult& r) {
  return Json{{"width", r.predictions.width()},
              {"height", r.predictions.height()},
              {"classified", r.classified},
              {"evaluated", r.evaluated},
              {"correct", r.correct},
              {"overall_accuracy", r.overall_accuracy()}};
}

std::string classify_text(const engine::ImageResult& r) {
  std::ostringstream os;
  os << "classified=" << r.classified << "\n";
  os << "evaluated=" << r.evaluated << "\n";
  os << "correct=" << r.correct << "\n";
  os << "overall_accuracy=" << fixed(r.overall_accuracy(), 6) << "\n";
  return os.str();
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  const std::string s = doc.dump(2) + "\n";
  detail::write_file(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

}  // namespace hsiaccel::report
