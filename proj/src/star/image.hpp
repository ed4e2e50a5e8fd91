// Copyright 2026 The STAR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace star {

/// Dense row-major raster with a fixed channel count. All thumbnail-scale
/// math runs on these; 8-bit samples only.
template <int Channels>
struct Raster {
  static constexpr int kChannels = Channels;

  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  Raster() = default;
  Raster(int r, int c, std::uint8_t fill = 0)
      : rows(r), cols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c) * Channels, fill) {}

  bool empty() const { return rows == 0 || cols == 0; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int r, int c) const {
    return (static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
            static_cast<std::size_t>(c)) * Channels;
  }
  std::uint8_t& at(int r, int c, int ch = 0) { return data[index(r, c) + ch]; }
  std::uint8_t at(int r, int c, int ch = 0) const { return data[index(r, c) + ch]; }

  bool operator==(const Raster&) const = default;
};

using GrayImage = Raster<1>;
using RgbImage = Raster<3>;

/// Per-pixel {0,1} mask with the dims of the image it annotates.
struct BinaryMask : Raster<1> {
  using Raster<1>::Raster;
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data) n += v != 0;
    return n;
  }
};

/// Half-open pixel rectangle [row0,row1) x [col0,col1).
struct BBox {
  int row0 = 0;
  int col0 = 0;
  int row1 = 0;
  int col1 = 0;

  int rows() const { return row1 - row0; }
  int cols() const { return col1 - col0; }
  bool valid() const { return 0 <= row0 && row0 < row1 && 0 <= col0 && col0 < col1; }
  bool operator==(const BBox&) const = default;
};

struct Dims {
  int rows = 0;
  int cols = 0;
  bool operator==(const Dims&) const = default;
};

template <int C>
Dims dims_of(const Raster<C>& img) {
  return {img.rows, img.cols};
}

/// Copies `box` out of `img`; pixels outside the source read as `fill`.
template <int C>
Raster<C> crop_with_fill(const Raster<C>& img, const BBox& box, std::uint8_t fill = 0) {
  Raster<C> out(box.rows(), box.cols(), fill);
  for (int r = 0; r < out.rows; ++r) {
    const int sr = box.row0 + r;
    if (sr < 0 || sr >= img.rows) continue;
    for (int c = 0; c < out.cols; ++c) {
      const int sc = box.col0 + c;
      if (sc < 0 || sc >= img.cols) continue;
      for (int ch = 0; ch < C; ++ch) out.at(r, c, ch) = img.at(sr, sc, ch);
    }
  }
  return out;
}

/// Nearest integer with ties rounded up; the single rounding rule used for
/// every float -> 8-bit conversion in the pipeline.
inline std::uint8_t round_to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 254.5) return 255;
  return static_cast<std::uint8_t>(static_cast<int>(v + 0.5));
}

/// Bilinear sample with constant-zero extension outside the raster.
/// (x, y) are column/row coordinates of pixel centres.
double sample_bilinear(const std::uint8_t* data, int rows, int cols, int channels,
                       int channel, double x, double y);

/// Bilinear resize with centre-aligned sampling and clamped borders.
template <int C>
Raster<C> resize_bilinear(const Raster<C>& img, int out_rows, int out_cols);

extern template GrayImage resize_bilinear(const GrayImage&, int, int);
extern template RgbImage resize_bilinear(const RgbImage&, int, int);

RgbImage gray_to_rgb(const GrayImage& img);

/// Window starts {0, stride, 2*stride, ...} below `extent`; a window that
/// would overrun is pulled back to end at the edge and duplicates dropped.
/// Requires 1 <= size <= extent and stride >= 1.
std::vector<int> clamped_starts(int extent, int size, int stride);

}  // namespace star
