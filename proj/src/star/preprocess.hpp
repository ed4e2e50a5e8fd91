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

#include <optional>

#include "star/image.hpp"

namespace star {

enum class PreprocessKind { kReference, kTarget };

/// A matched dark-background grayscale representation ready for correlation.
/// For references, `mask` is the dilated tissue mask over the ROI crop and
/// every pixel outside it is 0.
struct PreprocessedImage {
  GrayImage image;
  PreprocessKind kind = PreprocessKind::kTarget;
  std::optional<BBox> origin_bbox;
  BinaryMask mask;  // empty for targets
};

/// Luma with integer weights 299/587/114 and round-half-up.
GrayImage to_grayscale(const RgbImage& img);
std::uint8_t gray_value(std::uint8_t r, std::uint8_t g, std::uint8_t b);

GrayImage histogram_equalize(const GrayImage& img);
GrayImage invert(const GrayImage& img);
GrayImage rescale_minmax(const GrayImage& img);

/// Pixels strictly below `below` become 255.
GrayImage lift_dark(const GrayImage& img, std::uint8_t below);

/// 3x3 mean with replicated borders.
GrayImage box_blur3(const GrayImage& img);

/// gray -> (<50 => 255) -> equalize -> invert -> min-max rescale -> zero
/// outside the mask. The dark-pixel lift runs on raw gray, as in the target
/// pipeline; after inversion it would turn the background white.
PreprocessedImage preprocess_reference(const RgbImage& crop, const BinaryMask& dilated_mask);
/// gray -> (<30 => 255) -> 3x3 blur -> invert.
PreprocessedImage preprocess_target(const RgbImage& thumb);

/// Wraps a ready-made reference representation (all-ones mask), mainly for
/// synthetic inputs that skip the colour pipeline.
PreprocessedImage as_reference(GrayImage phi);
PreprocessedImage as_target(GrayImage phi);

}  // namespace star
