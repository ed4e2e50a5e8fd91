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
#include "star/preprocess.hpp"

#include <algorithm>
#include <array>

#include "star/error.hpp"

namespace star {

std::uint8_t gray_value(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int v = (299 * r + 587 * g + 114 * b + 500) / 1000;
  return static_cast<std::uint8_t>(std::min(v, 255));
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.rows, img.cols);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    out.data[i] = gray_value(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]);
  }
  return out;
}

GrayImage histogram_equalize(const GrayImage& img) {
  std::array<std::uint64_t, 256> hist{};
  for (auto v : img.data) ++hist[v];

  const std::uint64_t n = img.data.size();
  std::array<std::uint64_t, 256> cdf{};
  std::uint64_t running = 0;
  std::uint64_t cdf_min = 0;
  for (int v = 0; v < 256; ++v) {
    running += hist[static_cast<std::size_t>(v)];
    cdf[static_cast<std::size_t>(v)] = running;
    if (cdf_min == 0 && running > 0) cdf_min = running;
  }
  if (n == 0 || cdf_min == n) return img;  // constant image

  const std::uint64_t denom = n - cdf_min;
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    const std::uint64_t c = cdf[static_cast<std::size_t>(v)];
    const std::uint64_t num = c > cdf_min ? c - cdf_min : 0;
    lut[static_cast<std::size_t>(v)] =
        static_cast<std::uint8_t>((2 * 255 * num + denom) / (2 * denom));
  }
  GrayImage out = img;
  for (auto& v : out.data) v = lut[v];
  return out;
}

GrayImage invert(const GrayImage& img) {
  GrayImage out = img;
  for (auto& v : out.data) v = static_cast<std::uint8_t>(255 - v);
  return out;
}

GrayImage rescale_minmax(const GrayImage& img) {
  GrayImage out = img;
  if (img.data.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  const int lo = *lo_it;
  const int hi = *hi_it;
  if (lo == hi) {
    std::fill(out.data.begin(), out.data.end(), 0);
    return out;
  }
  const int range = hi - lo;
  for (auto& v : out.data) {
    v = static_cast<std::uint8_t>((2 * 255 * (v - lo) + range) / (2 * range));
  }
  return out;
}

GrayImage lift_dark(const GrayImage& img, std::uint8_t below) {
  GrayImage out = img;
  for (auto& v : out.data) {
    if (v < below) v = 255;
  }
  return out;
}

GrayImage box_blur3(const GrayImage& img) {
  GrayImage out(img.rows, img.cols);
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      int sum = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = std::clamp(r + dr, 0, img.rows - 1);
        for (int dc = -1; dc <= 1; ++dc) {
          sum += img.at(rr, std::clamp(c + dc, 0, img.cols - 1));
        }
      }
      out.at(r, c) = static_cast<std::uint8_t>((2 * sum + 9) / 18);
    }
  }
  return out;
}

PreprocessedImage preprocess_reference(const RgbImage& crop, const BinaryMask& dilated_mask) {
  if (crop.rows != dilated_mask.rows || crop.cols != dilated_mask.cols) {
    fail(ErrorCode::kDimMismatch, "reference crop and mask differ in size");
  }
  GrayImage phi = to_grayscale(crop);
  phi = lift_dark(phi, 50);
  phi = histogram_equalize(phi);
  phi = invert(phi);
  phi = rescale_minmax(phi);

  PreprocessedImage out;
  out.kind = PreprocessKind::kReference;
  out.mask = BinaryMask(crop.rows, crop.cols);
  for (std::size_t i = 0; i < phi.data.size(); ++i) {
    const bool on = dilated_mask.data[i] != 0;
    out.mask.data[i] = on ? 1 : 0;
    if (!on) phi.data[i] = 0;
  }
  out.image = std::move(phi);
  return out;
}

PreprocessedImage preprocess_target(const RgbImage& thumb) {
  GrayImage phi = to_grayscale(thumb);
  phi = lift_dark(phi, 30);
  phi = box_blur3(phi);
  phi = invert(phi);
  PreprocessedImage out;
  out.kind = PreprocessKind::kTarget;
  out.image = std::move(phi);
  return out;
}

PreprocessedImage as_reference(GrayImage phi) {
  PreprocessedImage out;
  out.kind = PreprocessKind::kReference;
  out.mask = BinaryMask(phi.rows, phi.cols, 1);
  out.image = std::move(phi);
  return out;
}

PreprocessedImage as_target(GrayImage phi) {
  PreprocessedImage out;
  out.kind = PreprocessKind::kTarget;
  out.image = std::move(phi);
  return out;
}

}  // namespace star
