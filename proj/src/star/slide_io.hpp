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

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "star/image.hpp"

namespace star {

enum class SlideFormat { kPng, kTiff };

struct SlideLevel {
  int width = 0;
  int height = 0;
  int downsample = 1;
  int directory = 0;  // TIFF directory index; unused for PNG
};

/// Metadata for a flat or pyramidal slide. Immutable once opened; pixel data
/// is decoded on demand by each read, so concurrent reads are safe.
class SlideSource {
 public:
  const std::filesystem::path& path() const { return path_; }
  SlideFormat format() const { return format_; }
  int width() const { return levels_.front().width; }
  int height() const { return levels_.front().height; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  const SlideLevel& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
  std::vector<int> level_downsamples() const;

 private:
  friend SlideSource open_slide(const std::filesystem::path& path);

  std::filesystem::path path_;
  SlideFormat format_ = SlideFormat::kPng;
  std::vector<SlideLevel> levels_;
};

/// Reads header metadata only. Throws FileNotFound / UnsupportedFormat.
SlideSource open_slide(const std::filesystem::path& path);

/// Area-averaged thumbnail of dims (ceil(H/factor), ceil(W/factor)), built
/// from the coarsest pyramid level whose downsample divides `factor`.
RgbImage read_thumbnail(const SlideSource& slide, int factor);

/// Exact native-resolution crop. Throws OutOfBounds; no clamping.
RgbImage read_region_native(const SlideSource& slide, const BBox& box);

/// Native crop where pixels outside the slide are filled with `fill`.
/// Throws OutOfBounds only when `box` misses the slide entirely.
RgbImage read_region_native_padded(const SlideSource& slide, const BBox& box,
                                   std::uint8_t fill = 0);

/// Lossless PNG output. Throws IoError.
void write_image(const std::filesystem::path& path, const GrayImage& image);
void write_image(const std::filesystem::path& path, const RgbImage& image);

using AnyImage = std::variant<GrayImage, RgbImage>;

/// Decodes a PNG keeping its channel layout (gray stays gray).
AnyImage read_image(const std::filesystem::path& path);
RgbImage read_image_rgb(const std::filesystem::path& path);
GrayImage read_image_gray(const std::filesystem::path& path);

/// Writes a tiled, deflate-compressed TIFF. Additional entries become
/// reduced-resolution subfiles, giving a pyramid readable by open_slide.
void write_tiff(const std::filesystem::path& path, const RgbImage& image, int tile = 256);
void write_pyramid_tiff(const std::filesystem::path& path, const std::vector<RgbImage>& levels,
                        int tile = 256);
/// Strip-organised TIFF, mostly for fixtures.
void write_strip_tiff(const std::filesystem::path& path, const RgbImage& image,
                      int rows_per_strip = 16);
void write_strip_tiff(const std::filesystem::path& path, const GrayImage& image,
                      int rows_per_strip = 16);

}  // namespace star
