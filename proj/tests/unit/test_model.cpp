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
#include "hsiaccel/model.hpp"
#include "oracle.hpp"

using namespace hsiaccel;
using namespace hsiaccel::model;

namespace {

const LayerSpec& named(const NetworkSpec& s, const std::string& name) {
  for (const auto& l : s.layers)
    if (l.name == name) return l;
  throw std::runtime_error("no layer " + name);
}

}  // namespace

TEST(DeriveConfig, ReferenceNetworkShapes) {
  const auto s = derive_config(220, 9, {4, 5, Block1Kernel::k3x3});
  EXPECT_EQ(named(s, "block1.conv").in_shape, (Shape3{5, 5, 220}));
  EXPECT_EQ(named(s, "block1.conv").out_shape, (Shape3{3, 3, 220}));
  EXPECT_EQ(named(s, "block1.conv").weight_shape, (std::vector<Index>{3, 3, 220, 220}));
  EXPECT_EQ(named(s, "block2.conv1").in_shape, (Shape3{9, 55, 1}));
  EXPECT_EQ(named(s, "block2.conv1").out_shape, (Shape3{7, 53, 2}));
  EXPECT_EQ(named(s, "block2.conv2").out_shape, (Shape3{5, 51, 4}));
  EXPECT_EQ(named(s, "block2.conv3").out_shape, (Shape3{3, 49, 4}));
  EXPECT_EQ(named(s, "block2.conv4").out_shape, (Shape3{1, 47, 4}));
  EXPECT_EQ(named(s, "block3.fc1").weight_shape, (std::vector<Index>{752, 120}));
  EXPECT_EQ(named(s, "block3.fc2").weight_shape, (std::vector<Index>{120, 9}));
  EXPECT_EQ(s.concat_len, 752);
  EXPECT_EQ(named(s, "block2.conv2").branches, 4);
  EXPECT_TRUE(named(s, "block2.conv2").band_shared);
}

TEST(DeriveConfig, KscRow) {
  const auto& p = find_preset("ksc");
  const auto s = derive_config(p.spectral, p.classes, p.params);
  EXPECT_EQ(named(s, "block2.conv1").in_shape, (Shape3{9, 22, 1}));
  EXPECT_EQ(named(s, "block2.conv1").out_shape, (Shape3{7, 20, 2}));
  EXPECT_EQ(named(s, "block2.conv2").out_shape, (Shape3{5, 18, 4}));
  EXPECT_EQ(named(s, "block2.conv3").out_shape, (Shape3{3, 16, 4}));
  EXPECT_EQ(named(s, "block2.conv4").out_shape, (Shape3{1, 14, 4}));
  EXPECT_EQ(s.concat_len, 448);
  EXPECT_EQ(named(s, "block3.fc2").weight_shape, (std::vector<Index>{120, 13}));
}

TEST(DeriveConfig, Presets) {
  EXPECT_EQ(presets().size(), 4u);
  const auto& ip = find_preset("indian-pines");
  EXPECT_EQ(ip.classes, 11);
  EXPECT_EQ(ip.spectral, 220);
  EXPECT_EQ(ip.params.n_bands, 4);
  EXPECT_EQ(ip.params.patch, 3);
  EXPECT_EQ(ip.params.block1, Block1Kernel::k1x1);
  const auto& bw = find_preset("botswana");
  EXPECT_EQ(bw.classes, 14);
  EXPECT_EQ(bw.spectral, 144);
  EXPECT_EQ(bw.params.n_bands, 8);
  EXPECT_EQ(bw.params.patch, 5);
  EXPECT_THROW(find_preset("pavia"), ConfigError);
}

TEST(DeriveConfig, Errors) {
  EXPECT_THROW(derive_config(221, 9, {4, 5, Block1Kernel::k3x3}), ConfigError);
  // 1x1 on a 5x5 patch leaves a 5x5 map.
  EXPECT_THROW(derive_config(220, 9, {4, 5, Block1Kernel::k1x1}), ConfigError);
  // Four valid 3x3 convs need at least 9 channels per band.
  EXPECT_THROW(derive_config(32, 3, {4, 3, Block1Kernel::k1x1}), ConfigError);
  EXPECT_THROW(derive_config(36, 0, {4, 3, Block1Kernel::k1x1}), ConfigError);
}

TEST(DeriveConfig, UnusualBandCountWarns) {
  std::vector<std::string> warnings;
  derive_config(60, 3, {3, 3, Block1Kernel::k1x1}, &warnings);
  EXPECT_FALSE(warnings.empty());
  warnings.clear();
  derive_config(60, 3, {4, 3, Block1Kernel::k1x1}, &warnings);
  EXPECT_TRUE(warnings.empty());
}

TEST(DeriveConfig, ShapesChainAndConcatFormula) {
  std::vector<NetworkSpec> specs;
  for (const auto& p : presets()) specs.push_back(derive_config(p.spectral, p.classes, p.params));
  for (Index nb : {2, 4, 8})
    for (Index s = 9; s < 40; s += 3)
      for (Index patch : {3, 5})
        specs.push_back(derive_config(nb * s, 5, {nb, patch, patch == 5 ? Block1Kernel::k3x3 : Block1Kernel::k1x1}));
  for (const auto& s : specs) {
    for (std::size_t i = 1; i < s.layers.size(); ++i) {
      const auto& prev = s.layers[i - 1];
      const auto& cur = s.layers[i];
      if (cur.kind == LayerKind::band_split || cur.kind == LayerKind::concat) continue;
      EXPECT_EQ(prev.out_shape, cur.in_shape) << cur.name;
    }
    EXPECT_EQ(s.concat_len, s.n_bands * 4 * (s.n_spectral / s.n_bands - 8));
    EXPECT_EQ(s.layers.back().out_shape.size(), s.classes);
    const auto& last2 = named(s, "block2.conv4").out_shape;
    EXPECT_EQ(s.concat_len, s.n_bands * last2.size());
    EXPECT_EQ(s.weighted_layers().size(), 7u);
  }
}

TEST(BandPartition, Shapes) {
  Volume<float> v(Shape3{3, 3, 220});
  const auto bands = band_partition(v, 4);
  ASSERT_EQ(bands.size(), 4u);
  for (const auto& b : bands) EXPECT_EQ(b.shape(), (Shape3{9, 55, 1}));
  EXPECT_THROW(band_partition(v, 3), ConfigError);
  EXPECT_THROW(band_partition(Volume<float>(Shape3{2, 3, 8}), 2), ConfigError);
}

TEST(BandPartition, SingleBandIsFlatten) {
  Volume<double> v(Shape3{3, 3, 6});
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = double(i);
  const auto b = band_partition(v, 1);
  ASSERT_EQ(b.size(), 1u);
  ASSERT_EQ(b[0].shape(), (Shape3{9, 6, 1}));
  for (Index y = 0; y < 3; ++y)
    for (Index x = 0; x < 3; ++x)
      for (Index c = 0; c < 6; ++c) EXPECT_EQ(b[0](y * 3 + x, c, 0), v(y, x, c));
}

TEST(BandPartition, IndexArithmetic) {
  Volume<float> v(Shape3{3, 3, 220});
  v(1, 2, 57) = 42.0f;
  const auto b = band_partition(v, 4);
  EXPECT_EQ(b[1](5, 2, 0), 42.0f);
  EXPECT_EQ(b[1].data().sum(), 42.0f);
}

TEST(InferFloat, ZeroWeightsUniform) {
  const auto spec = fixtures::small_spec(36, 5, 4, 3);
  std::mt19937_64 rng(1);
  const auto p = infer_float(spec, zero_weights(spec), fixtures::random_patch(rng, 3, 36));
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(p[i], 0.2, 1e-12);
}

TEST(InferFloat, DeltaKernel) {
  Volume<double> x(Shape3{5, 4, 1});
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = double(i) - 7.0;
  KernelBank<double> k{3, 3, 1, 1, Eigen::ArrayXd::Zero(9)};
  k(1, 1, 0, 0) = 1.0;
  const auto y = conv2d_valid(x, k, Eigen::ArrayXd::Zero(1).eval());
  ASSERT_EQ(y.shape(), (Shape3{3, 2, 1}));
  for (Index r = 0; r < 3; ++r)
    for (Index c = 0; c < 2; ++c) EXPECT_EQ(y(r, c, 0), x(r + 1, c + 1, 0));
}

TEST(InferFloat, MatchesNaiveOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Index nb = std::array<Index, 3>{2, 4, 8}[static_cast<std::size_t>(trial % 3)];
    const Index patch = trial % 2 ? 3 : 5;
    const auto spec = fixtures::small_spec(nb * fixtures::uniform_int(rng, 9, 16), fixtures::uniform_int(rng, 2, 9),
                                           nb, patch);
    auto w = random_weights(spec, 1000 + trial);
    for (auto& l : w.layers)
      for (Index i = 0; i < l.bias.size(); ++i) l.bias[i] = static_cast<float>(fixtures::uniform_real(rng, -0.1, 0.1));
    const auto p = fixtures::random_patch(rng, spec.patch, spec.n_spectral, -1.0, 1.0);
    const auto got = infer_float(spec, w, p);
    const auto want = oracle::infer_float(spec, w, p);
    ASSERT_EQ(got.size(), static_cast<Index>(want.size()));
    for (Index i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got[i], want[static_cast<std::size_t>(i)], 1e-5 * std::max(1.0, std::abs(want[static_cast<std::size_t>(i)])));
    EXPECT_NEAR(got.sum(), 1.0, 1e-6);
    EXPECT_TRUE((got >= 0).all());
  }
}

TEST(InferFloat, ShapeMismatch) {
  const auto spec = fixtures::small_spec(36, 3, 4, 3);
  std::mt19937_64 rng(3);
  EXPECT_THROW(infer_float(spec, zero_weights(spec), fixtures::random_patch(rng, 5, 36)), ShapeError);
  EXPECT_THROW(infer_float(spec, zero_weights(spec), fixtures::random_patch(rng, 3, 40)), ShapeError);
}

TEST(InferFloat, SharedBranchesAgreeOnEqualInputs) {
  const auto spec = fixtures::small_spec(40, 3, 4, 3);
  auto w = random_weights(spec, 4);
  // Identity Block 1 and a patch whose four spectral bands are copies.
  w.layers[0].values.setZero();
  for (Index c = 0; c < 40; ++c) w.layers[0].values[c * 40 + c] = 1.0f;
  std::mt19937_64 rng(5);
  auto p = fixtures::random_patch(rng, 3, 40);
  for (Index pos = 0; pos < 9; ++pos)
    for (Index b = 1; b < 4; ++b)
      for (Index j = 0; j < 10; ++j)
        p.data[static_cast<std::size_t>(pos * 40 + b * 10 + j)] = p.data[static_cast<std::size_t>(pos * 40 + j)];
  std::vector<Volume<double>> conv4;
  LayerObserver<double> obs = [&](std::size_t li, const std::vector<Volume<double>>& branches) {
    if (spec.layers[li].name == "block2.conv4") conv4 = branches;
  };
  forward_float<double>(spec, w, p.volume().cast<double>(), std::nullopt, obs);
  ASSERT_EQ(conv4.size(), 4u);
  for (std::size_t b = 1; b < 4; ++b) EXPECT_TRUE(conv4[b] == conv4[0]);
}

TEST(Weights, ValidateNamesLayer) {
  const auto spec = fixtures::small_spec();
  auto w = random_weights(spec, 1);
  w.layers[5].dims = {10, 120};
  w.layers[5].values.resize(1200);
  try {
    validate_weights(spec, w);
    FAIL() << "expected WeightShapeError";
  } catch (const WeightShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("block3.fc1"), std::string::npos) << e.what();
  }
  w = random_weights(spec, 1);
  w.layers.pop_back();
  EXPECT_THROW(validate_weights(spec, w), WeightShapeError);
}

TEST(Weights, RandomIsSeededAndFanInScaled) {
  const auto spec = fixtures::small_spec();
  const auto a = random_weights(spec, 9), b = random_weights(spec, 9), c = random_weights(spec, 10);
  EXPECT_TRUE((a.layers[0].values == b.layers[0].values).all());
  EXPECT_FALSE((a.layers[0].values == c.layers[0].values).all());
  const double bound = std::sqrt(6.0 / (9.0 * spec.n_spectral));
  EXPECT_LE(a.layers[0].values.abs().maxCoeff(), bound);
}
