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


// hsiaccel command-line tool. Exit codes: 0 success, 1 toolkit error,
// 2 usage error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hsiaccel/dse.hpp"
#include "hsiaccel/engine.hpp"
#include "hsiaccel/perf.hpp"
#include "hsiaccel/report.hpp"
#include "hsiaccel/synthetic.hpp"
#include "hsiaccel/weights_io.hpp"
#include "selftest.hpp"

using namespace hsiaccel;

namespace {

struct NetArgs {
  std::string preset;
  std::string dataset_config;
  std::optional<Index> spectral, classes, n_bands, patch;
  std::optional<std::string> block1;
};

struct HwArgs {
  engine::HwParams hw;
  std::int64_t amortize = 1;
};

void add_net_options(CLI::App* app, NetArgs& a) {
  app->add_option("--preset", a.preset, "Dataset preset: indian-pines, salinas, ksc, botswana");
  app->add_option("--dataset-config", a.dataset_config, "key=value file: preset, spectral, classes, n_bands, patch, block1")
      ->check(CLI::ExistingFile);
  app->add_option("--spectral", a.spectral, "Spectral band count N_c");
  app->add_option("--classes", a.classes, "Class count C");
  app->add_option("--n-bands", a.n_bands, "Band partitions N_b");
  app->add_option("--patch", a.patch, "Patch side p (3 or 5)");
  app->add_option("--block1", a.block1, "Block-1 kernel, 1x1 or 3x3")->check(CLI::IsMember({"1x1", "3x3"}));
}

void add_hw_options(CLI::App* app, HwArgs& a) {
  app->add_option("--pc", a.hw.conv_kernels, "Conv kernels P_C")->capture_default_str();
  app->add_option("--pf", a.hw.fc_multipliers, "FC multipliers P_F")->capture_default_str();
  app->add_option("--clock-mhz", a.hw.clock_mhz, "Clock in MHz")->capture_default_str();
  app->add_option("--bus-bytes", a.hw.bus_bytes_per_cycle, "Off-chip bytes per cycle")->capture_default_str();
  app->add_option("--dsp-budget", a.hw.dsp_budget, "DSP budget")->capture_default_str();
  app->add_option("--bram-budget", a.hw.bram_budget, "18Kb BRAM block budget")->capture_default_str();
  app->add_option("--amortize", a.amortize, "Pixels sharing one weight transfer")->capture_default_str();
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  for (int n = 1; std::getline(f, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(n) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

Index to_index(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return static_cast<Index>(x);
  } catch (const std::exception&) {
  }
  throw ConfigError("dataset config: " + key + "=" + v + " is not an integer");
}

model::Block1Kernel parse_block1(const std::string& s) {
  if (s == "1x1") return model::Block1Kernel::k1x1;
  if (s == "3x3") return model::Block1Kernel::k3x3;
  throw ConfigError("block1 must be 1x1 or 3x3, got '" + s + "'");
}

model::NetworkSpec resolve_spec(NetArgs a) {
  // The dataset file fills whatever the flags left unset.
  if (!a.dataset_config.empty()) {
    for (const auto& [k, v] : read_key_values(a.dataset_config)) {
      if (k == "preset") {
        if (a.preset.empty()) a.preset = v;
      } else if (k == "spectral") {
        if (!a.spectral) a.spectral = to_index(k, v);
      } else if (k == "classes") {
        if (!a.classes) a.classes = to_index(k, v);
      } else if (k == "n_bands") {
        if (!a.n_bands) a.n_bands = to_index(k, v);
      } else if (k == "patch") {
        if (!a.patch) a.patch = to_index(k, v);
      } else if (k == "block1") {
        if (!a.block1) a.block1 = v;
      } else {
        throw ConfigError("dataset config: unknown key '" + k + "'");
      }
    }
  }
  model::Preset base;
  if (!a.preset.empty()) {
    base = model::find_preset(a.preset);
  } else if (!a.spectral || !a.classes) {
    throw ConfigError("give --preset, or --spectral and --classes");
  }
  if (a.spectral) base.spectral = *a.spectral;
  if (a.classes) base.classes = *a.classes;
  if (a.n_bands) base.params.n_bands = *a.n_bands;
  if (a.patch) {
    base.params.patch = *a.patch;
    if (!a.block1) base.params.block1 = *a.patch == 5 ? model::Block1Kernel::k3x3 : model::Block1Kernel::k1x1;
  }
  if (a.block1) base.params.block1 = parse_block1(*a.block1);
  std::vector<std::string> warnings;
  auto spec = model::derive_config(base.spectral, base.classes, base.params, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return spec;
}

engine::HwParams resolve_hw(const HwArgs& a) {
  a.hw.validate();
  if (a.amortize < 1) throw ConfigError("--amortize must be >= 1");
  return a.hw;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

// Splices `--config FILE` entries into the argument list as ordinary flags,
// skipping any option already given on the command line.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  const auto at = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.starts_with("--config=");
  });
  if (at == args.end() || args.empty()) return args;
  std::string path = at->size() > 8 ? at->substr(9) : (at + 1 != args.end() ? *(at + 1) : std::string{});
  if (path.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (a.starts_with("-")) continue;
    sub = app.get_subcommand_no_throw(a);
    if (sub) break;
  }
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_key_values(path)) {
    const std::string flag = "--" + key;
    if (given(args, flag)) continue;
    const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
    if (opt && opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

void emit(const std::string& text, const report::Json& doc, const std::string& report_path) {
  std::cout << text;
  if (!report_path.empty()) report::write_json(doc, report_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral CNN accelerator toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hsiaccel 0.1.0");

  NetArgs net;
  HwArgs hwa;
  std::string report_path;
  unsigned threads = 0;

  std::string config_path;
  std::string norm = "minmax";
  const auto add_norm = [&](CLI::App* sub) {
    sub->add_option("--normalize", norm, "Cube scaling before inference: none, minmax, standardize")
        ->check(CLI::IsMember({"none", "minmax", "standardize"}))
        ->capture_default_str();
  };
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file of option values; flags override it")
        ->check(CLI::ExistingFile);
    sub->add_option("--report", report_path, "Write a JSON report to this path");
  };

  auto* shapes = app.add_subcommand("shapes", "Print the derived layer table");
  add_net_options(shapes, net);
  common(shapes);

  auto* bench = app.add_subcommand("benchmark", "Cycle, stall and resource report for one hardware point");
  add_net_options(bench, net);
  add_hw_options(bench, hwa);
  common(bench);

  dse::ExploreOptions dopts;
  auto* dse_cmd = app.add_subcommand("dse", "Search (P_C, P_F) under the DSP and BRAM budgets");
  add_net_options(dse_cmd, net);
  add_hw_options(dse_cmd, hwa);
  common(dse_cmd);
  dse_cmd->add_option("--pc-min", dopts.conv_kernels.lo)->capture_default_str();
  dse_cmd->add_option("--pc-max", dopts.conv_kernels.hi)->capture_default_str();
  dse_cmd->add_option("--pf-min", dopts.fc_multipliers.lo)->capture_default_str();
  dse_cmd->add_option("--pf-max", dopts.fc_multipliers.hi)->capture_default_str();
  dse_cmd->add_flag("--pow2-only", dopts.pow2_only, "Only power-of-two P_C and P_F");
  dse_cmd->add_option("--threads", threads, "Worker threads, 0 = all cores");

  std::string cube_path, labels_path, weights_path, out_path;
  engine::ClassifyOptions copts;
  bool use_float = false, all_pixels = false, strict = false;
  auto* classify = app.add_subcommand("classify", "Classify a cube with the fixed-point engine");
  add_net_options(classify, net);
  add_hw_options(classify, hwa);
  common(classify);
  classify->add_option("--cube", cube_path, "HSIC cube")->required()->check(CLI::ExistingFile);
  classify->add_option("--labels", labels_path, "HSIL labels, enables accuracy")->check(CLI::ExistingFile);
  classify->add_option("--weights", weights_path, "HSIW weights")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", out_path, "HSIP prediction map");
  classify->add_flag("--all-pixels", all_pixels, "Classify every pixel, not just labeled ones");
  classify->add_flag("--float", use_float, "Use the float reference path");
  classify->add_flag("--strict-border", strict, "Skip pixels whose patch leaves the image");
  classify->add_option("--threads", threads, "Worker threads, 0 = all cores");
  add_norm(classify);

  std::size_t calibration = 64;
  std::uint64_t seed = 1;
  double headroom = 1.0;
  auto* quantize = app.add_subcommand("quantize", "Add int16 sections to a float weight file");
  add_net_options(quantize, net);
  common(quantize);
  quantize->add_option("--weights", weights_path, "Float HSIW input")->required()->check(CLI::ExistingFile);
  quantize->add_option("--cube", cube_path, "Calibration cube")->required()->check(CLI::ExistingFile);
  quantize->add_option("--labels", labels_path, "Calibration labels")->required()->check(CLI::ExistingFile);
  quantize->add_option("--out", out_path, "Quantized HSIW output")->required();
  quantize->add_option("--calibration", calibration, "Calibration patch count")->capture_default_str();
  quantize->add_option("--seed", seed, "Calibration sample seed")->capture_default_str();
  quantize->add_option("--headroom", headroom, "Activation range multiplier")->capture_default_str();
  add_norm(quantize);

  synth::SceneOptions sopts;
  std::string out_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scene and fitted float weights");
  add_net_options(synth_cmd, net);
  common(synth_cmd);
  synth_cmd->add_option("--out-dir", out_dir, "Directory for scene.hsic, scene.hsil, weights.hsiw")->required();
  synth_cmd->add_option("--width", sopts.width)->capture_default_str();
  synth_cmd->add_option("--height", sopts.height)->capture_default_str();
  synth_cmd->add_option("--tile", sopts.tile)->capture_default_str();
  synth_cmd->add_option("--noise", sopts.noise)->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Scene, split and weight seed")->capture_default_str();
  add_norm(synth_cmd);

  bool quick = false;
  auto* selftest = app.add_subcommand("selftest", "Check the engine, schedule and search against reference models");
  selftest->add_flag("--quick", quick, "Fewer randomized cases");

  try {
    auto args = expand_config(app, std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (selftest->parsed()) return tools::run_selftest(quick, std::cout) ? 0 : 1;

    if (synth_cmd->parsed()) {
      if (!net.spectral && net.preset.empty() && net.dataset_config.empty()) net.spectral = sopts.bands;
      if (!net.classes && net.preset.empty() && net.dataset_config.empty()) net.classes = sopts.classes;
      const auto spec = resolve_spec(net);
      sopts.bands = spec.n_spectral;
      sopts.classes = spec.classes;
      sopts.seed = seed;
      const auto scene = synth::make_scene(sopts);
      const auto split = io::split_dataset(scene.labels, {}, seed, 5);
      // The head is fitted on the cube as classify will see it; the file keeps raw values.
      const auto fit_cube = io::normalize(scene.cube, io::parse_norm_mode(norm));
      const auto w = synth::fitted_weights(spec, fit_cube, scene.labels, split.train, seed);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      io::write_cube(scene.cube, dir / "scene.hsic");
      io::write_labels(scene.labels, dir / "scene.hsil");
      io::save_weights(w, dir / "weights.hsiw");
      report::Json doc{{"width", sopts.width},         {"height", sopts.height}, {"bands", sopts.bands},
                       {"classes", sopts.classes},     {"seed", seed},           {"train", split.train.size()},
                       {"test", split.test.size()}};
      emit("wrote " + (dir / "scene.hsic").string() + " " + (dir / "scene.hsil").string() + " " +
               (dir / "weights.hsiw").string() + "\n",
           doc, report_path);
      return 0;
    }

    const auto spec = resolve_spec(net);

    if (shapes->parsed()) {
      emit(report::shapes_text(spec), report::shapes_json(spec), report_path);
    } else if (bench->parsed()) {
      const auto hw = resolve_hw(hwa);
      const auto r = perf::throughput_report(spec, hw, hwa.amortize);
      emit(report::perf_text(spec, hw, r), report::perf_json(spec, hw, r), report_path);
    } else if (dse_cmd->parsed()) {
      const auto hw = resolve_hw(hwa);
      dopts.amortize_weights_over = hwa.amortize;
      dopts.threads = threads;
      const auto r = dse::explore(spec, hw, dopts);
      emit(report::dse_text(hw, r), report::dse_json(hw, r), report_path);
    } else if (quantize->parsed()) {
      auto wf = io::read_weight_file(weights_path, &spec);
      const auto cube = io::normalize(io::load_cube(cube_path), io::parse_norm_mode(norm));
      const auto labels = io::load_labels(labels_path);
      // Same draw as the synth training split for equal seeds.
      auto pixels = io::split_dataset(labels, {}, seed, 5).train;
      if (pixels.size() > calibration) pixels.resize(calibration);
      const auto cal = synth::patches_at(cube, labels, pixels, spec.patch);
      wf.quantized = quant::quantize_weights(spec, wf.floats, cal, {headroom});
      io::write_weight_file(wf, out_path);
      report::Json exps = report::Json::array();
      for (const auto& l : wf.quantized->layers) exps.push_back(l.out_format.exponent);
      emit("quantized " + std::to_string(wf.quantized->layers.size()) + " layers with " + std::to_string(cal.size()) +
               " calibration patches -> " + out_path + "\n",
           report::Json{{"calibration_patches", cal.size()},
                        {"input_exponent", wf.quantized->input_format().exponent},
                        {"output_exponents", exps}},
           report_path);
    } else if (classify->parsed()) {
      const auto hw = resolve_hw(hwa);
      const auto wf = io::read_weight_file(weights_path, &spec);
      const auto cube = io::normalize(io::load_cube(cube_path), io::parse_norm_mode(norm));
      std::optional<io::LabelMap> labels;
      if (!labels_path.empty()) labels = io::load_labels(labels_path);
      copts.threads = threads;
      copts.hw = hw;
      copts.labeled_only = labels.has_value() && !all_pixels;
      copts.border = strict ? io::BorderMode::strict : io::BorderMode::zero_pad;
      engine::ImageResult r;
      if (use_float) {
        r = engine::classify_image_float(cube, labels ? &*labels : nullptr, spec, wf.floats, copts);
      } else {
        if (!wf.quantized) throw ConfigError(weights_path + " has no quantized sections; run quantize first");
        r = engine::classify_image(cube, labels ? &*labels : nullptr, spec, *wf.quantized, copts);
      }
      if (!out_path.empty()) engine::write_prediction_map(r.predictions, out_path);
      emit(report::classify_text(r), report::classify_json(r), report_path);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
