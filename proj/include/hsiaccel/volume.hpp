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

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <string>

#include "hsiaccel/errors.hpp"

namespace hsiaccel {

using Index = Eigen::Index;

/// A (height, width, channels) triple. Vectors are 1 x 1 x n.
struct Shape3 {
  Index height = 0;
  Index width = 0;
  Index channels = 0;

  constexpr Index size() const { return height * width * channels; }
  friend constexpr bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& s);

/// Dense activation volume stored HWC: element (y, x, c) lives at
/// (y * width + x) * channels + c.
template <typename Scalar>
class Volume {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Volume() = default;
  explicit Volume(const Shape3& shape) : shape_(shape), data_(Storage::Zero(shape.size())) {}
  Volume(const Shape3& shape, Storage data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("volume data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  const Shape3& shape() const { return shape_; }
  Index height() const { return shape_.height; }
  Index width() const { return shape_.width; }
  Index channels() const { return shape_.channels; }
  Index size() const { return data_.size(); }

  Scalar& operator()(Index y, Index x, Index c) { return data_[(y * shape_.width + x) * shape_.channels + c]; }
  const Scalar& operator()(Index y, Index x, Index c) const {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  template <typename Other>
  Volume<Other> cast() const {
    return Volume<Other>(shape_, data_.template cast<Other>());
  }

  friend bool operator==(const Volume& a, const Volume& b) {
    return a.shape_ == b.shape_ && (a.data_ == b.data_).all();
  }

 private:
  Shape3 shape_;
  Storage data_;
};

/// Convolution kernel bank stored (kh, kw, c_in, c_out) row-major, the layout
/// used in weight files: element (ky, kx, ci, co) lives at
/// ((ky * kw + kx) * c_in + ci) * c_out + co.
template <typename Scalar>
struct KernelBank {
  Index kh = 0, kw = 0, c_in = 0, c_out = 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values;

  const Scalar& operator()(Index ky, Index kx, Index ci, Index co) const {
    return values[((ky * kw + kx) * c_in + ci) * c_out + co];
  }
  Scalar& operator()(Index ky, Index kx, Index ci, Index co) {
    return values[((ky * kw + kx) * c_in + ci) * c_out + co];
  }
};

/// Valid (unpadded, stride 1) 2-D convolution with bias.
template <typename Scalar>
Volume<Scalar> conv2d_valid(const Volume<Scalar>& in, const KernelBank<Scalar>& k,
                            const Eigen::Array<Scalar, Eigen::Dynamic, 1>& bias) {
  if (in.channels() != k.c_in || in.height() < k.kh || in.width() < k.kw || bias.size() != k.c_out) {
    throw ShapeError("conv2d_valid: input " + to_string(in.shape()) + " incompatible with kernel " +
                     std::to_string(k.kh) + "x" + std::to_string(k.kw) + "x" + std::to_string(k.c_in) + "x" +
                     std::to_string(k.c_out));
  }
  const Shape3 out_shape{in.height() - k.kh + 1, in.width() - k.kw + 1, k.c_out};
  Volume<Scalar> out(out_shape);
  for (Index y = 0; y < out_shape.height; ++y) {
    for (Index x = 0; x < out_shape.width; ++x) {
      // Accumulate all output channels at once; inner loop walks contiguous c_out.
      Eigen::Array<Scalar, Eigen::Dynamic, 1> acc = bias;
      for (Index ky = 0; ky < k.kh; ++ky) {
        for (Index kx = 0; kx < k.kw; ++kx) {
          for (Index ci = 0; ci < k.c_in; ++ci) {
            const Scalar a = in(y + ky, x + kx, ci);
            acc += a * k.values.segment(((ky * k.kw + kx) * k.c_in + ci) * k.c_out, k.c_out);
          }
        }
      }
      for (Index co = 0; co < k.c_out; ++co) out(y, x, co) = acc[co];
    }
  }
  return out;
}

template <typename Derived>
auto relu(const Eigen::ArrayBase<Derived>& a) {
  return a.max(typename Derived::Scalar(0));
}

template <typename Scalar>
Volume<Scalar> relu(const Volume<Scalar>& v) {
  return Volume<Scalar>(v.shape(), relu(v.data()));
}

/// Numerically stable softmax.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::ArrayBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = logits.maxCoeff();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> e = (logits - m).exp();
  return e / e.sum();
}

/// Index of the largest element; ties resolve to the lowest index.
template <typename Derived>
Index argmax(const Eigen::DenseBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace hsiaccel
