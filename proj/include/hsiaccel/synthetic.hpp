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

// Desk-scale data: separable synthetic scenes and a classifier head fitted
// on top of fixed random feature layers.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hsiaccel/hsi_io.hpp"
#include "hsiaccel/model.hpp"

namespace hsiaccel::synth {

struct SceneOptions {
  Index width = 48;
  Index height = 48;
  Index bands = 64;
  Index classes = 3;
  /// Side of the square label tiles.
  Index tile = 16;
  double noise = 0.02;
  double unlabeled_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct Scene {
  io::HsiCube cube;
  io::LabelMap labels;
};

/// Each class gets a smooth random mean spectrum; pixels add Gaussian noise.
Scene make_scene(const SceneOptions& opts);

struct HeadFitOptions {
  int iterations = 2000;
  double l2 = 1e-4;
};

/// Replaces the last fc layer of `w` by a softmax regression fitted on the
/// penultimate (post-ReLU) features of the given pixels.
model::WeightSet fit_classifier_head(const model::NetworkSpec& spec, model::WeightSet w, const io::HsiCube& cube,
                                     const io::LabelMap& labels, std::span<const io::Pixel> pixels,
                                     const HeadFitOptions& opts = {});

/// Random feature layers plus a fitted head.
model::WeightSet fitted_weights(const model::NetworkSpec& spec, const io::HsiCube& cube, const io::LabelMap& labels,
                                std::span<const io::Pixel> train, std::uint64_t seed);

std::vector<io::Patch> patches_at(const io::HsiCube& cube, const io::LabelMap& labels, std::span<const io::Pixel> px,
                                  Index p);

}  // namespace hsiaccel::synth
