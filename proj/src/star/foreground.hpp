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

#include <cstdint>
#include <functional>
#include <vector>

#include "star/image.hpp"

namespace star {

enum class PatchLabel { kBackground, kTissue };

/// Tissue/background decision for one RGB patch of kClassifierInput^2
/// pixels. Must be deterministic; an external model can be plugged in here.
using PatchClassifier = std::function<PatchLabel(const RgbImage&)>;

inline constexpr int kClassifierInput = 256;

struct GateThresholds {
  std::uint8_t white = 230;
  std::uint8_t black = 20;
};

/// Tile-resolution vote of a BinaryMask. `scale` is the number of pixels of
/// the consuming image per mask pixel (1 when used at mask scale).
struct BlockMask {
  int block_size = 1;
  int scale = 1;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> grid;

  std::uint8_t at(int r, int c) const {
    return grid[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                static_cast<std::size_t>(c)];
  }
  bool operator==(const BlockMask&) const = default;
};

/// 1 iff black < gray(pixel) < white.
BinaryMask gate_mask(const RgbImage& thumb, GateThresholds gate = {});

/// Intensity-heuristic stand-in for a learned patch classifier: tissue iff
/// at least `min_fraction` of the pixels pass the gate.
struct DefaultClassifier {
  GateThresholds gate{};
  double min_fraction = 0.05;
  PatchLabel operator()(const RgbImage& patch) const;
};

PatchLabel default_classifier(const RgbImage& patch);

/// Slides a patch x patch window at `stride`, skipping windows with no gate
/// pass, and ORs the footprint of every tissue vote into the output. If the
/// thumbnail is smaller than one patch the whole image is classified as a
/// single resized window.
BinaryMask classify_patches(const RgbImage& thumb, const BinaryMask& gate,
                            const PatchClassifier& classifier, int patch = 256,
                            int stride = 64);

/// Registration ROI: per-axis smallest window holding `coverage` of the
/// foreground, falling back to 1st/99th percentile trimming when that window
/// is narrower than 8 px. Throws EmptyMask.
BBox extract_roi(const BinaryMask& mask, double coverage = 0.98);

/// 7x7 square dilation; outside the mask counts as background.
BinaryMask dilate_mask(const BinaryMask& mask, int size = 7);

/// Block is foreground iff its foreground fraction >= 0.5.
BlockMask block_mask(const BinaryMask& mask, int block);

BinaryMask crop_mask(const BinaryMask& mask, const BBox& box);

/// 0/255 rendering used for on-disk masks.
GrayImage mask_to_image(const BinaryMask& mask);
BinaryMask mask_from_image(const GrayImage& img);
GrayImage block_mask_to_image(const BlockMask& blocks);
BlockMask block_mask_from_image(const GrayImage& img, int block_size, int scale = 1);

}  // namespace star
