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

#include "hsiaccel/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hsiaccel::synth {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; keeps the stream independent of the standard library's
// normal_distribution implementation.
double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Scene make_scene(const SceneOptions& o) {
  if (o.classes < 1 || o.tile < 1) throw ConfigError("synthetic scene needs at least one class and a positive tile");
  std::mt19937_64 rng(o.seed);

  Eigen::MatrixXd means(o.classes, o.bands);
  for (Index c = 0; c < o.classes; ++c) {
    const double freq = 0.5 + 2.5 * uniform01(rng);
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    const double level = 0.3 + 0.4 * uniform01(rng);
    for (Index b = 0; b < o.bands; ++b) {
      means(c, b) = level + 0.25 * std::sin(2.0 * std::numbers::pi * freq * double(b) / double(o.bands) + phase);
    }
  }

  std::vector<std::uint16_t> labels(static_cast<std::size_t>(o.width * o.height));
  std::vector<Index> cls(labels.size());
  for (Index y = 0; y < o.height; ++y) {
    for (Index x = 0; x < o.width; ++x) {
      const Index c = ((x / o.tile) + 2 * (y / o.tile)) % o.classes;
      cls[static_cast<std::size_t>(y * o.width + x)] = c;
      labels[static_cast<std::size_t>(y * o.width + x)] =
          uniform01(rng) < o.unlabeled_fraction ? 0 : static_cast<std::uint16_t>(c + 1);
    }
  }

  std::vector<float> data(static_cast<std::size_t>(o.width * o.height * o.bands));
  for (Index b = 0; b < o.bands; ++b) {
    for (Index y = 0; y < o.height; ++y) {
      for (Index x = 0; x < o.width; ++x) {
        const Index c = cls[static_cast<std::size_t>(y * o.width + x)];
        data[static_cast<std::size_t>((b * o.height + y) * o.width + x)] =
            static_cast<float>(means(c, b) + o.noise * gaussian(rng));
      }
    }
  }
  return {io::HsiCube(o.width, o.height, o.bands, std::move(data)), io::LabelMap(o.width, o.height, std::move(labels))};
}

std::vector<io::Patch> patches_at(const io::HsiCube& cube, const io::LabelMap& labels, std::span<const io::Pixel> px,
                                  Index p) {
  std::vector<io::Patch> out;
  out.reserve(px.size());
  for (const auto& q : px) out.push_back(io::extract_patch(cube, labels, q.x, q.y, p, false));
  return out;
}

model::WeightSet fit_classifier_head(const model::NetworkSpec& spec, model::WeightSet w, const io::HsiCube& cube,
                                     const io::LabelMap& labels, std::span<const io::Pixel> pixels,
                                     const HeadFitOptions& opts) {
  if (pixels.empty()) throw EmptyDatasetError("no pixels to fit the classifier head on");
  // Penultimate features: the ReLU after the hidden fc layer.
  const std::size_t feature_layer = spec.layers.size() - 3;
  const Index n = static_cast<Index>(pixels.size());
  const Index classes = spec.classes;
  const Index dim = spec.layers[feature_layer].out_shape.size();

  Eigen::MatrixXd features(dim, n);
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(classes, n);
  for (Index i = 0; i < n; ++i) {
    const auto& q = pixels[static_cast<std::size_t>(i)];
    const auto patch = io::extract_patch(cube, labels, q.x, q.y, spec.patch, true);
    const auto act = model::forward_float<double>(spec, w, patch.volume().cast<double>(), feature_layer);
    features.col(i) = act.at(0).data().matrix();
    if (patch.label > classes) throw DataError("label " + std::to_string(patch.label) + " exceeds class count");
    targets(patch.label - 1, i) = 1.0;
  }

  // Full-batch gradient descent on the softmax cross-entropy; the step is
  // bounded by the feature scale (the loss Hessian is <= 0.5 * E|f|^2).
  const double mean_sq = features.colwise().squaredNorm().mean() + 1.0;
  const double step = 1.0 / (0.5 * mean_sq);
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(classes, dim);
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(classes);
  for (int it = 0; it < opts.iterations; ++it) {
    Eigen::MatrixXd logits = (weight * features).colwise() + bias;
    Eigen::RowVectorXd mx = logits.colwise().maxCoeff();
    Eigen::MatrixXd prob = (logits.rowwise() - mx).array().exp().matrix();
    prob.array().rowwise() /= prob.colwise().sum().array();
    const Eigen::MatrixXd err = (prob - targets) / double(n);
    weight -= step * (err * features.transpose() + opts.l2 * weight);
    bias -= step * err.rowwise().sum();
  }

  auto& head = w.layers.back();
  // (in, out) row-major == (out x in) column-major.
  Eigen::Map<Eigen::MatrixXf>(head.values.data(), classes, dim) = weight.cast<float>();
  head.bias = bias.cast<float>().array();
  return w;
}

model::WeightSet fitted_weights(const model::NetworkSpec& spec, const io::HsiCube& cube, const io::LabelMap& labels,
                                std::span<const io::Pixel> train, std::uint64_t seed) {
  return fit_classifier_head(spec, model::random_weights(spec, seed), cube, labels, train);
}

}  // namespace hsiaccel::synth
