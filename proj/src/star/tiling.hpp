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

#include <string>
#include <utility>
#include <vector>

#include "star/foreground.hpp"
#include "star/image.hpp"

namespace star {

struct TileSpec {
  int row0 = 0;
  int col0 = 0;
  int size = 0;
  int grid_row = 0;
  int grid_col = 0;
  bool operator==(const TileSpec&) const = default;
};

/// Overlapping tile grid. stride = size - round(size*overlap); the last
/// start per axis is clamped to extent - size. Throws ExtentTooSmall.
std::vector<TileSpec> plan_tiles(Dims extent, int size = 256, double overlap = 0.2);
int tile_stride(int size, double overlap);

/// Keeps tiles whose covered block area is at least half foreground.
/// Blocks span blocks.block_size * blocks.scale pixels of `aligned`.
std::vector<TileSpec> select_tiles(const BlockMask& blocks, const std::vector<TileSpec>& plan);
std::vector<std::pair<TileSpec, RgbImage>> extract_tiles(const RgbImage& aligned, const BlockMask& blocks,
                                                         const std::vector<TileSpec>& plan);

/// "{stain}_{slide}_rNNN_cNNN.png". Throws InvalidName.
std::string encode_tile_name(const std::string& stain, const std::string& slide, int grid_row, int grid_col);

struct TileName {
  std::string stain;
  std::string slide;
  int grid_row = 0;
  int grid_col = 0;
  bool operator==(const TileName&) const = default;
};
TileName decode_tile_name(const std::string& name);

}  // namespace star
