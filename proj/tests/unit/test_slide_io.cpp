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

#include <fstream>
#include <random>

#include "doctest.h"
#include "expect.hpp"
#include "star/error.hpp"
#include "star/slide_io.hpp"
#include "synth.hpp"

using namespace star;
using star::testing::code_of;
namespace fs = std::filesystem;

namespace {

// Independent area average over the clipped source span.
RgbImage area_oracle(const RgbImage& src, int f) {
  const int rows = (src.rows + f - 1) / f, cols = (src.cols + f - 1) / f;
  RgbImage out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        long sum = 0, n = 0;
        for (int y = r * f; y < std::min(src.rows, (r + 1) * f); ++y) {
          for (int x = c * f; x < std::min(src.cols, (c + 1) * f); ++x) {
            sum += src.at(y, x, ch);
            ++n;
          }
        }
        out.at(r, c, ch) = static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("slide_io") {
  TEST_CASE("flat png metadata and identity thumbnail") {
    const auto dir = testing::scratch_dir("slide_png");
    std::mt19937_64 rng(1);
    const RgbImage img = testing::random_rgb(512, 512, rng);
    write_image(dir / "a.png", img);
    const SlideSource s = open_slide(dir / "a.png");
    CHECK(s.format() == SlideFormat::kPng);
    CHECK(s.width() == 512);
    CHECK(s.height() == 512);
    CHECK(s.level_count() == 1);
    CHECK(s.level_downsamples() == std::vector<int>{1});
    CHECK(read_thumbnail(s, 1) == img);
    CHECK(read_region_native(s, BBox{0, 0, 512, 512}) == img);
  }

  TEST_CASE("thumbnail dims use ceiling division") {
    const auto dir = testing::scratch_dir("slide_ceil");
    std::mt19937_64 rng(2);
    const RgbImage img = testing::random_rgb(100, 100, rng);
    write_image(dir / "a.png", img);
    const auto s = open_slide(dir / "a.png");
    const RgbImage t = read_thumbnail(s, 32);
    CHECK(t.rows == 4);
    CHECK(t.cols == 4);
    CHECK(t == area_oracle(img, 32));
    for (int f : {1, 2, 3, 7, 13, 64, 150}) {
      const RgbImage u = read_thumbnail(s, f);
      CHECK(u.rows == (100 + f - 1) / f);
      CHECK(u == area_oracle(img, f));
    }
  }

  TEST_CASE("4096 square slide at factor 32") {
    const auto dir = testing::scratch_dir("slide_4096");
    RgbImage img(4096, 4096, 200);
    for (int r = 0; r < 4096; r += 7) img.at(r, r, 0) = 3;
    write_strip_tiff(dir / "big.tiff", img, 64);
    const RgbImage t = read_thumbnail(open_slide(dir / "big.tiff"), 32);
    CHECK(t.rows == 128);
    CHECK(t.cols == 128);
    CHECK(t == area_oracle(img, 32));
  }

  TEST_CASE("pyramidal tiff levels and level choice") {
    const auto dir = testing::scratch_dir("slide_pyr");
    std::mt19937_64 rng(3);
    const RgbImage l0 = testing::random_rgb(256, 320, rng);
    const RgbImage l1 = area_oracle(l0, 2);
    const RgbImage l2 = area_oracle(l0, 4);
    write_pyramid_tiff(dir / "p.tiff", {l0, l1, l2}, 64);
    const auto s = open_slide(dir / "p.tiff");
    CHECK(s.format() == SlideFormat::kTiff);
    CHECK(s.level_count() == 3);
    CHECK(s.level_downsamples() == std::vector<int>{1, 2, 4});
    CHECK(read_region_native(s, BBox{0, 0, 256, 320}) == l0);
    // Factor 4 reads level 2 directly.
    CHECK(read_thumbnail(s, 4) == l2);
    // Factor 8 averages level 2 by 2.
    CHECK(read_thumbnail(s, 8) == area_oracle(l2, 2));
    // Factor 3 only divides by level 0.
    CHECK(read_thumbnail(s, 3) == area_oracle(l0, 3));
  }

  TEST_CASE("tiled and strip tiff agree with the source") {
    const auto dir = testing::scratch_dir("slide_tiff");
    std::mt19937_64 rng(4);
    const RgbImage img = testing::random_rgb(150, 170, rng);
    write_tiff(dir / "t.tiff", img, 32);
    write_strip_tiff(dir / "s.tiff", img, 7);
    for (const char* name : {"t.tiff", "s.tiff"}) {
      const auto s = open_slide(dir / name);
      CHECK(s.width() == 170);
      CHECK(s.height() == 150);
      CHECK(read_region_native(s, BBox{0, 0, 150, 170}) == img);
      const BBox box{33, 41, 97, 160};
      CHECK(read_region_native(s, box) == crop_with_fill(img, box));
      CHECK(read_thumbnail(s, 5) == area_oracle(img, 5));
    }
  }

  TEST_CASE("gray tiff reads as rgb") {
    const auto dir = testing::scratch_dir("slide_gray");
    std::mt19937_64 rng(5);
    const GrayImage g = testing::random_gray(40, 30, rng);
    write_strip_tiff(dir / "g.tiff", g, 8);
    const auto s = open_slide(dir / "g.tiff");
    CHECK(read_region_native(s, BBox{0, 0, 40, 30}) == gray_to_rgb(g));
  }

  TEST_CASE("region reads") {
    const auto dir = testing::scratch_dir("slide_region");
    std::mt19937_64 rng(6);
    const RgbImage img = testing::random_rgb(64, 48, rng);
    write_image(dir / "a.png", img);
    const auto s = open_slide(dir / "a.png");
    const RgbImage px = read_region_native(s, BBox{0, 0, 1, 1});
    CHECK(px.rows == 1);
    CHECK(px.data == std::vector<std::uint8_t>{img.at(0, 0, 0), img.at(0, 0, 1), img.at(0, 0, 2)});
    CHECK(code_of([&] { read_region_native(s, BBox{0, 0, 65, 10}); }) == ErrorCode::kOutOfBounds);
    CHECK(code_of([&] { read_region_native(s, BBox{-1, 0, 5, 10}); }) == ErrorCode::kOutOfBounds);
    const BBox over{-3, 40, 5, 52};
    CHECK(read_region_native_padded(s, over, 9) == crop_with_fill(img, over, 9));
    CHECK(code_of([&] { read_region_native_padded(s, BBox{70, 0, 80, 5}); }) == ErrorCode::kOutOfBounds);
  }

  TEST_CASE("open errors") {
    const auto dir = testing::scratch_dir("slide_err");
    CHECK(code_of([&] { open_slide(dir / "missing.png"); }) == ErrorCode::kFileNotFound);
    std::ofstream(dir / "junk.png") << "not an image at all";
    CHECK(code_of([&] { open_slide(dir / "junk.png"); }) == ErrorCode::kUnsupportedFormat);
  }

  TEST_CASE("corrupt tiff pixel data is a decode error") {
    const auto dir = testing::scratch_dir("slide_corrupt");
    RgbImage img(64, 64, 120);
    write_tiff(dir / "t.tiff", img, 32);
    // Truncate well into the pixel data but keep the header.
    const auto size = fs::file_size(dir / "t.tiff");
    std::string bytes(size, '\0');
    std::ifstream(dir / "t.tiff", std::ios::binary).read(bytes.data(), static_cast<std::streamsize>(size));
    for (std::size_t i = 16; i < std::min<std::size_t>(size, 200); ++i) bytes[i] = static_cast<char>(0xA5);
    std::ofstream(dir / "bad.tiff", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(size));
    bool raised = false;
    try {
      const auto s = open_slide(dir / "bad.tiff");
      read_region_native(s, BBox{0, 0, 64, 64});
    } catch (const Error& e) {
      raised = e.code() == ErrorCode::kDecodeError || e.code() == ErrorCode::kUnsupportedFormat;
    }
    CHECK(raised);
  }

  TEST_CASE("png round trips") {
    const auto dir = testing::scratch_dir("slide_png_rt");
    std::mt19937_64 rng(7);
    const GrayImage g = testing::random_gray(64, 64, rng);
    write_image(dir / "g.png", g);
    CHECK(std::get<GrayImage>(read_image(dir / "g.png")) == g);
    RgbImage one(1, 1);
    one.data = {7, 8, 9};
    write_image(dir / "one.png", one);
    CHECK(read_image_rgb(dir / "one.png").data == std::vector<std::uint8_t>{7, 8, 9});
    CHECK(code_of([&] { write_image(dir / "no" / "such" / "dir.png", g); }) == ErrorCode::kIoError);
  }
}
