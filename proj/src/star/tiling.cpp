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
#include "star/tiling.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

#include "star/error.hpp"

namespace star {

int tile_stride(int size, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) fail(ErrorCode::kInvalidArgument, "overlap must lie in [0, 1)");
  if (size < 1) fail(ErrorCode::kInvalidArgument, "tile size must be positive");
  const int overlap_px = static_cast<int>(std::floor(size * overlap + 0.5));
  return std::max(1, size - overlap_px);
}

std::vector<TileSpec> plan_tiles(Dims extent, int size, double overlap) {
  const int stride = tile_stride(size, overlap);
  if (extent.rows < size || extent.cols < size) {
    fail(ErrorCode::kExtentTooSmall, "extent " + std::to_string(extent.rows) + "x" +
                                         std::to_string(extent.cols) + " smaller than tile " +
                                         std::to_string(size));
  }
  const auto rows = clamped_starts(extent.rows, size, stride);
  const auto cols = clamped_starts(extent.cols, size, stride);
  std::vector<TileSpec> plan;
  plan.reserve(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      plan.push_back({rows[i], cols[j], size, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return plan;
}

std::vector<TileSpec> select_tiles(const BlockMask& blocks, const std::vector<TileSpec>& plan) {
  const long long bn = static_cast<long long>(blocks.block_size) * blocks.scale;
  if (bn < 1) fail(ErrorCode::kInvalidArgument, "block size must be positive");
  std::vector<TileSpec> kept;
  for (const auto& t : plan) {
    long long covered = 0;
    long long fg = 0;
    const long long r0 = t.row0, r1 = t.row0 + t.size;
    const long long c0 = t.col0, c1 = t.col0 + t.size;
    const int br0 = static_cast<int>(r0 / bn);
    const int bc0 = static_cast<int>(c0 / bn);
    for (int br = br0; br < blocks.rows && br * bn < r1; ++br) {
      const long long h = std::min(r1, (br + 1) * bn) - std::max(r0, br * bn);
      for (int bc = bc0; bc < blocks.cols && bc * bn < c1; ++bc) {
        const long long w = std::min(c1, (bc + 1) * bn) - std::max(c0, bc * bn);
        covered += h * w;
        if (blocks.at(br, bc)) fg += h * w;
      }
    }
    if (covered > 0 && 2 * fg >= covered) kept.push_back(t);
  }
  return kept;
}

std::vector<std::pair<TileSpec, RgbImage>> extract_tiles(const RgbImage& aligned, const BlockMask& blocks,
                                                         const std::vector<TileSpec>& plan) {
  std::vector<std::pair<TileSpec, RgbImage>> out;
  for (const auto& t : select_tiles(blocks, plan)) {
    out.emplace_back(t, crop_with_fill(aligned, BBox{t.row0, t.col0, t.row0 + t.size, t.col0 + t.size}));
  }
  return out;
}

namespace {

void check_part(const std::string& part, const char* what, bool allow_underscore) {
  if (part.empty()) fail(ErrorCode::kInvalidName, std::string(what) + " is empty");
  for (char ch : part) {
    if (ch == '/' || ch == '\\' || ch == '\0') {
      fail(ErrorCode::kInvalidName, std::string(what) + " contains a path separator");
    }
    if (!allow_underscore && ch == '_') fail(ErrorCode::kInvalidName, std::string(what) + " contains '_'");
  }
}

}  // namespace

std::string encode_tile_name(const std::string& stain, const std::string& slide, int grid_row, int grid_col) {
  check_part(stain, "stain", false);
  check_part(slide, "slide", true);
  if (grid_row < 0 || grid_row > 999 || grid_col < 0 || grid_col > 999) {
    fail(ErrorCode::kInvalidName, "grid index outside 0..999");
  }
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_r%03d_c%03d.png", grid_row, grid_col);
  return stain + "_" + slide + suffix;
}

TileName decode_tile_name(const std::string& name) {
  static const std::regex pattern(R"(^([^_/\\]+)_([^/\\]+)_r(\d{3})_c(\d{3})\.png$)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) fail(ErrorCode::kInvalidName, "not a tile name: " + name);
  return {m[1].str(), m[2].str(), std::stoi(m[3].str()), std::stoi(m[4].str())};
}

}  // namespace star
