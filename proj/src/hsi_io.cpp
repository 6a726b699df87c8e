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

#include "hsiaccel/hsi_io.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <random>

#include "binary_io.hpp"

namespace hsiaccel {

std::string to_string(const Shape3& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

}  // namespace hsiaccel

namespace hsiaccel::io {

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint8_t kDtypeFloat32 = 1;

}  // namespace

HsiCube::HsiCube(Index width, Index height, Index bands, std::vector<float> data)
    : width_(width), height_(height), bands_(bands), data_(std::move(data)) {
  if (width < 1 || height < 1 || bands < 1) {
    throw DataError("cube dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(bands));
  }
  if (static_cast<Index>(data_.size()) != width * height * bands) {
    throw DataError("cube payload has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(width * height * bands));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) throw DataError("non-finite cube value at index " + std::to_string(i));
  }
}

LabelMap::LabelMap(Index width, Index height, std::vector<std::uint16_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width < 1 || height < 1) throw DataError("label map dimensions must be positive");
  if (static_cast<Index>(labels_.size()) != width * height) {
    throw DataError("label map has " + std::to_string(labels_.size()) + " entries, expected " +
                    std::to_string(width * height));
  }
}

std::uint16_t LabelMap::max_label() const {
  return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
}

Volume<float> Patch::volume() const {
  Volume<float>::Storage storage = Eigen::Map<const Eigen::ArrayXf>(data.data(), static_cast<Index>(data.size()));
  return Volume<float>(Shape3{p, p, bands}, std::move(storage));
}

NormMode parse_norm_mode(const std::string& s) {
  if (s == "none") return NormMode::none;
  if (s == "minmax") return NormMode::minmax;
  if (s == "standardize") return NormMode::standardize;
  throw ConfigError("unknown normalization mode '" + s + "' (none|minmax|standardize)");
}

HsiCube load_cube(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.expect_magic("HSIC");
  const auto version = r.u32();
  if (version != kFormatVersion) throw FormatError(path.string() + ": unsupported cube version " + std::to_string(version));
  const Index width = r.u32();
  const Index height = r.u32();
  const Index bands = r.u32();
  const auto dtype = r.u8();
  if (dtype != kDtypeFloat32) throw FormatError(path.string() + ": unsupported dtype " + std::to_string(dtype));
  if (width < 1 || height < 1 || bands < 1) throw FormatError(path.string() + ": header dimensions must be positive");

  const auto count = static_cast<std::size_t>(width * height * bands);
  r.require(count * 4, "cube payload");
  std::vector<float> data(count);
  for (auto& v : data) v = r.f32();
  if (!r.at_end()) throw FormatError(path.string() + ": " + std::to_string(r.remaining()) + " trailing bytes");
  return HsiCube(width, height, bands, std::move(data));
}

void write_cube(const HsiCube& cube, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("HSIC");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(cube.width()));
  w.u32(static_cast<std::uint32_t>(cube.height()));
  w.u32(static_cast<std::uint32_t>(cube.bands()));
  w.u8(kDtypeFloat32);
  for (float v : cube.data()) w.f32(v);
  detail::write_file(path, w.bytes());
}

LabelMap load_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.expect_magic("HSIL");
  const auto version = r.u32();
  if (version != kFormatVersion) throw FormatError(path.string() + ": unsupported label version " + std::to_string(version));
  const Index width = r.u32();
  const Index height = r.u32();
  if (width < 1 || height < 1) throw FormatError(path.string() + ": header dimensions must be positive");
  const auto count = static_cast<std::size_t>(width * height);
  r.require(count * 2, "label payload");
  std::vector<std::uint16_t> labels(count);
  for (auto& v : labels) v = r.u16();
  if (!r.at_end()) throw FormatError(path.string() + ": " + std::to_string(r.remaining()) + " trailing bytes");
  return LabelMap(width, height, std::move(labels));
}

void write_labels(const LabelMap& labels, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("HSIL");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(labels.width()));
  w.u32(static_cast<std::uint32_t>(labels.height()));
  for (auto v : labels.labels()) w.u16(v);
  detail::write_file(path, w.bytes());
}

bool patch_fits(const HsiCube& cube, Index x, Index y, Index p) {
  const Index r = p / 2;
  return x - r >= 0 && y - r >= 0 && x + r < cube.width() && y + r < cube.height();
}

Patch extract_patch(const HsiCube& cube, Index x, Index y, Index p, BorderMode border) {
  if (p < 1 || p % 2 == 0) throw ConfigError("patch size must be odd and positive, got " + std::to_string(p));
  if (x < 0 || y < 0 || x >= cube.width() || y >= cube.height()) {
    throw DataError("patch centre (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the cube");
  }
  if (border == BorderMode::strict && !patch_fits(cube, x, y, p)) {
    throw DataError("patch at (" + std::to_string(x) + ", " + std::to_string(y) + ") crosses the image border");
  }
  Patch patch;
  patch.p = p;
  patch.bands = cube.bands();
  patch.center = {x, y};
  patch.data.assign(static_cast<std::size_t>(p * p * cube.bands()), 0.0f);
  const Index r = p / 2;
  for (Index dy = 0; dy < p; ++dy) {
    const Index sy = y - r + dy;
    if (sy < 0 || sy >= cube.height()) continue;
    for (Index dx = 0; dx < p; ++dx) {
      const Index sx = x - r + dx;
      if (sx < 0 || sx >= cube.width()) continue;
      float* dst = patch.data.data() + (dy * p + dx) * cube.bands();
      for (Index b = 0; b < cube.bands(); ++b) dst[b] = cube.at(sx, sy, b);
    }
  }
  return patch;
}

Patch extract_patch(const HsiCube& cube, const LabelMap& labels, Index x, Index y, Index p, bool labeled_only,
                    BorderMode border) {
  if (labels.width() != cube.width() || labels.height() != cube.height()) {
    throw DataError("label map " + std::to_string(labels.width()) + "x" + std::to_string(labels.height()) +
                    " does not match cube " + std::to_string(cube.width()) + "x" + std::to_string(cube.height()));
  }
  Patch patch = extract_patch(cube, x, y, p, border);
  patch.label = labels.at(x, y);
  if (labeled_only && patch.label == 0) {
    throw UnlabeledError("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") is unlabeled");
  }
  return patch;
}

namespace {

// Fisher-Yates with an explicit index draw so the permutation does not depend
// on the standard library's distribution implementations.
void seeded_shuffle(std::vector<Pixel>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(v[i - 1], v[static_cast<std::size_t>(draw % bound)]);
  }
}

}  // namespace

DatasetSplit split_dataset(const LabelMap& labels, SplitRatios ratios, std::uint64_t seed, std::size_t min_samples) {
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || ratios.train + ratios.val >= 1.0) {
    throw ConfigError("split ratios must be positive with train + val < 1");
  }
  std::map<std::uint16_t, std::vector<Pixel>> by_class;
  for (Index y = 0; y < labels.height(); ++y) {
    for (Index x = 0; x < labels.width(); ++x) {
      const auto l = labels.at(x, y);
      if (l != 0) by_class[l].push_back({x, y});
    }
  }

  DatasetSplit split;
  split.seed = seed;
  std::mt19937_64 rng(seed);
  for (auto& [cls, pixels] : by_class) {
    if (pixels.size() < min_samples) {
      split.dropped_classes.push_back(cls);
      continue;
    }
    seeded_shuffle(pixels, rng);
    const auto n = static_cast<double>(pixels.size());
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    auto n_val = static_cast<std::size_t>(std::llround(ratios.val * n));
    n_train = std::min(n_train, pixels.size());
    n_val = std::min(n_val, pixels.size() - n_train);
    split.train.insert(split.train.end(), pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.val.insert(split.val.end(), pixels.begin() + static_cast<std::ptrdiff_t>(n_train),
                     pixels.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.insert(split.test.end(), pixels.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), pixels.end());
  }
  if (split.train.empty() && split.val.empty() && split.test.empty()) {
    throw EmptyDatasetError("no class has at least " + std::to_string(min_samples) + " labeled pixels");
  }
  return split;
}

HsiCube normalize(const HsiCube& cube, NormMode mode, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) {
      warnings->push_back(msg);
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  };

  HsiCube out = cube;
  auto& data = out.data();
  switch (mode) {
    case NormMode::none:
      break;
    case NormMode::minmax: {
      const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
      const double min = *lo, range = static_cast<double>(*hi) - min;
      if (range == 0.0) {
        warn("minmax: cube has zero range; mapped to zeros");
        std::fill(data.begin(), data.end(), 0.0f);
      } else {
        for (auto& v : data) v = static_cast<float>((v - min) / range);
      }
      break;
    }
    case NormMode::standardize: {
      const auto plane = static_cast<std::size_t>(cube.width() * cube.height());
      for (Index b = 0; b < cube.bands(); ++b) {
        Eigen::Map<Eigen::ArrayXf> band(data.data() + b * plane, static_cast<Index>(plane));
        const double mean = band.cast<double>().mean();
        const double var = (band.cast<double>() - mean).square().mean();
        const double sd = std::sqrt(var);
        if (sd == 0.0) {
          warn("standardize: band " + std::to_string(b) + " has zero standard deviation; mapped to zeros");
          band.setZero();
        } else {
          band = ((band.cast<double>() - mean) / sd).cast<float>();
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace hsiaccel::io
