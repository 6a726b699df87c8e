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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hsiaccel/volume.hpp"

namespace hsiaccel::io {

/// Hyperspectral scene, band-sequential: value (x, y, band) lives at
/// (band * height + y) * width + x.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(Index width, Index height, Index bands, std::vector<float> data);

  Index width() const { return width_; }
  Index height() const { return height_; }
  Index bands() const { return bands_; }

  float at(Index x, Index y, Index band) const { return data_[(band * height_ + y) * width_ + x]; }
  float& at(Index x, Index y, Index band) { return data_[(band * height_ + y) * width_ + x]; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  Index width_ = 0, height_ = 0, bands_ = 0;
  std::vector<float> data_;
};

/// Per-pixel class ids, 0 = unlabeled. Row-major (y * width + x).
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(Index width, Index height, std::vector<std::uint16_t> labels);

  Index width() const { return width_; }
  Index height() const { return height_; }
  std::uint16_t at(Index x, Index y) const { return labels_[y * width_ + x]; }
  std::uint16_t& at(Index x, Index y) { return labels_[y * width_ + x]; }
  std::uint16_t max_label() const;

  const std::vector<std::uint16_t>& labels() const { return labels_; }

 private:
  Index width_ = 0, height_ = 0;
  std::vector<std::uint16_t> labels_;
};

struct Pixel {
  Index x = 0;
  Index y = 0;
  friend constexpr bool operator==(const Pixel&, const Pixel&) = default;
  friend constexpr auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// p x p x bands neighbourhood around `center`, stored HWC (row = y offset).
struct Patch {
  Index p = 0;
  Index bands = 0;
  Pixel center;
  std::uint16_t label = 0;
  std::vector<float> data;

  Volume<float> volume() const;
};

struct DatasetSplit {
  std::vector<Pixel> train;
  std::vector<Pixel> val;
  std::vector<Pixel> test;
  std::uint64_t seed = 0;
  std::vector<std::uint16_t> dropped_classes;
};

enum class BorderMode { zero_pad, strict };
enum class NormMode { none, minmax, standardize };

NormMode parse_norm_mode(const std::string& s);

HsiCube load_cube(const std::filesystem::path& path);
void write_cube(const HsiCube& cube, const std::filesystem::path& path);
LabelMap load_labels(const std::filesystem::path& path);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);

/// Extracts the p x p patch centred on (x, y). Positions outside the image
/// are zero in zero_pad mode; strict mode throws DataError for them.
/// With labeled_only set, an unlabeled centre throws UnlabeledError.
Patch extract_patch(const HsiCube& cube, const LabelMap& labels, Index x, Index y, Index p,
                    bool labeled_only = true, BorderMode border = BorderMode::zero_pad);

/// Same as above without a label map; the patch label is 0.
Patch extract_patch(const HsiCube& cube, Index x, Index y, Index p, BorderMode border = BorderMode::zero_pad);

/// True when the whole p x p window around (x, y) lies inside the image.
bool patch_fits(const HsiCube& cube, Index x, Index y, Index p);

struct SplitRatios {
  double train = 0.15;
  double val = 0.05;
};

/// Per-class stratified shuffle split. Classes with fewer than min_samples
/// labeled pixels are dropped; each surviving class gives round(ratio * n)
/// pixels to train and val, the remainder to test.
DatasetSplit split_dataset(const LabelMap& labels, SplitRatios ratios, std::uint64_t seed,
                           std::size_t min_samples = 20);

/// Rescales a cube. Degenerate ranges map to zeros; a warning per affected
/// band is appended to `warnings`, or written to stderr when it is null.
HsiCube normalize(const HsiCube& cube, NormMode mode, std::vector<std::string>* warnings = nullptr);

}  // namespace hsiaccel::io
