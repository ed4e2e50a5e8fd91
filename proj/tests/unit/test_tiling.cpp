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

#include <random>
#include <set>

#include "doctest.h"
#include "expect.hpp"
#include "star/error.hpp"
#include "star/foreground.hpp"
#include "star/tiling.hpp"
#include "synth.hpp"

using namespace star;
using star::testing::code_of;

namespace {

std::set<int> row_starts(const std::vector<TileSpec>& plan) {
  std::set<int> s;
  for (const auto& t : plan) s.insert(t.row0);
  return s;
}

BlockMask uniform_blocks(int rows, int cols, int block, int scale, std::uint8_t v) {
  BlockMask b;
  b.block_size = block;
  b.scale = scale;
  b.rows = rows;
  b.cols = cols;
  b.grid.assign(static_cast<std::size_t>(rows) * cols, v);
  return b;
}

// Pixel-by-pixel majority vote over the tile's footprint on the block grid.
bool oracle_keep(const BlockMask& b, const TileSpec& t) {
  const int bn = b.block_size * b.scale;
  long long covered = 0, fg = 0;
  for (int r = t.row0; r < t.row0 + t.size; ++r) {
    for (int c = t.col0; c < t.col0 + t.size; ++c) {
      if (r / bn >= b.rows || c / bn >= b.cols) continue;
      ++covered;
      fg += b.at(r / bn, c / bn) != 0;
    }
  }
  return covered > 0 && 2 * fg >= covered;
}

}  // namespace

TEST_SUITE("tiling") {
  TEST_CASE("plan with overlap") {
    CHECK(tile_stride(256, 0.2) == 205);
    const auto plan = plan_tiles({512, 512}, 256, 0.2);
    CHECK(plan.size() == 9);
    CHECK(row_starts(plan) == std::set<int>{0, 205, 256});
    CHECK(plan[4] == TileSpec{205, 205, 256, 1, 1});
    CHECK(plan[8] == TileSpec{256, 256, 256, 2, 2});
  }

  TEST_CASE("plan without overlap partitions") {
    const auto plan = plan_tiles({512, 512}, 256, 0.0);
    REQUIRE(plan.size() == 4);
    CHECK(row_starts(plan) == std::set<int>{0, 256});
    CHECK(plan_tiles({256, 256}, 256, 0.2) == std::vector<TileSpec>{TileSpec{0, 0, 256, 0, 0}});
    const auto wide = plan_tiles({300, 700}, 256, 0.5);
    CHECK(wide.size() == 2 * 5);
    CHECK(wide.back().col0 == 700 - 256);
  }

  TEST_CASE("plan errors") {
    CHECK(code_of([] { plan_tiles({255, 512}, 256, 0.2); }) == ErrorCode::kExtentTooSmall);
    CHECK(code_of([] { plan_tiles({512, 100}, 256, 0.2); }) == ErrorCode::kExtentTooSmall);
    CHECK(code_of([] { plan_tiles({512, 512}, 256, 1.0); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { plan_tiles({512, 512}, 256, -0.1); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { plan_tiles({512, 512}, 0, 0.2); }) == ErrorCode::kInvalidArgument);
    CHECK(tile_stride(4, 0.99) == 1);
  }

  TEST_CASE("tiles cover the extent") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const int size = std::uniform_int_distribution<int>(1, 64)(rng);
      const int rows = size + std::uniform_int_distribution<int>(0, 200)(rng);
      const int cols = size + std::uniform_int_distribution<int>(0, 200)(rng);
      const double overlap = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
      const auto plan = plan_tiles({rows, cols}, size, overlap);
      std::vector<char> hit(static_cast<std::size_t>(rows) * cols, 0);
      for (const auto& t : plan) {
        CHECK(t.row0 + t.size <= rows);
        CHECK(t.col0 + t.size <= cols);
        for (int r = t.row0; r < t.row0 + size; ++r)
          for (int c = t.col0; c < t.col0 + size; ++c) hit[static_cast<std::size_t>(r) * cols + c] = 1;
      }
      CHECK(std::count(hit.begin(), hit.end(), 1) == static_cast<long>(hit.size()));
    }
  }

  TEST_CASE("block selection") {
    const auto plan = plan_tiles({512, 512}, 256, 0.2);
    CHECK(select_tiles(uniform_blocks(16, 16, 4, 8, 1), plan) == plan);
    CHECK(select_tiles(uniform_blocks(16, 16, 4, 8, 0), plan).empty());

    // Left half foreground: the middle column only overlaps it by 51 of 256 px.
    BlockMask half = uniform_blocks(16, 16, 4, 8, 0);
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 8; ++c) half.grid[static_cast<std::size_t>(r) * 16 + c] = 1;
    const auto kept = select_tiles(half, plan);
    CHECK(kept.size() == 3);
    for (const auto& t : kept) CHECK(t.col0 == 0);
    // An exact half split is kept.
    const auto tie = select_tiles(half, std::vector<TileSpec>{TileSpec{0, 128, 256, 0, 0}});
    CHECK(tie.size() == 1);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      BlockMask b = uniform_blocks(13, 11, 3, 4, 0);
      for (auto& v : b.grid) v = static_cast<std::uint8_t>(rng() % 2);
      const auto p = plan_tiles({13 * 12, 11 * 12}, 40, 0.3);
      std::vector<TileSpec> expect;
      for (const auto& t : p)
        if (oracle_keep(b, t)) expect.push_back(t);
      CHECK(select_tiles(b, p) == expect);
    }
  }

  TEST_CASE("extract crops the planned windows") {
    std::mt19937_64 rng(10);
    const RgbImage img = testing::random_rgb(100, 120, rng);
    const auto plan = plan_tiles({100, 120}, 40, 0.25);
    const auto tiles = extract_tiles(img, uniform_blocks(10, 12, 10, 1, 1), plan);
    REQUIRE(tiles.size() == plan.size());
    for (const auto& [spec, tile] : tiles) {
      CHECK(dims_of(tile) == Dims{40, 40});
      CHECK(tile.at(0, 0, 1) == img.at(spec.row0, spec.col0, 1));
      CHECK(tile.at(39, 39, 2) == img.at(spec.row0 + 39, spec.col0 + 39, 2));
    }
  }

  TEST_CASE("tile names") {
    CHECK(encode_tile_name("CD31", "slide12", 3, 7) == "CD31_slide12_r003_c007.png");
    CHECK(decode_tile_name("CD31_slide12_r003_c007.png") == TileName{"CD31", "slide12", 3, 7});
    CHECK(decode_tile_name(encode_tile_name("HE", "case_4_b", 999, 0)) == TileName{"HE", "case_4_b", 999, 0});
    std::mt19937_64 rng(12);
    const std::string alphabet = "ABCxyz019-.";
    for (int i = 0; i < 200; ++i) {
      TileName n;
      for (int k = 0; k < 1 + static_cast<int>(rng() % 6); ++k) n.stain += alphabet[rng() % alphabet.size()];
      for (int k = 0; k < 1 + static_cast<int>(rng() % 8); ++k) n.slide += (alphabet + "_")[rng() % 12];
      n.grid_row = static_cast<int>(rng() % 1000);
      n.grid_col = static_cast<int>(rng() % 1000);
      CHECK(decode_tile_name(encode_tile_name(n.stain, n.slide, n.grid_row, n.grid_col)) == n);
    }
    CHECK(code_of([] { encode_tile_name("CD/31", "s", 0, 0); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { encode_tile_name("CD31", "a\\b", 0, 0); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { encode_tile_name("CD_31", "s", 0, 0); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { encode_tile_name("", "s", 0, 0); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { encode_tile_name("a", "s", 1000, 0); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { encode_tile_name("a", "s", 0, -1); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { decode_tile_name("CD31_slide12_r3_c007.png"); }) == ErrorCode::kInvalidName);
    CHECK(code_of([] { decode_tile_name("x/CD31_s_r003_c007.png"); }) == ErrorCode::kInvalidName);
  }
}
