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

#include "doctest.h"
#include "oracles.hpp"
#include "star/error.hpp"
#include "star/preprocess.hpp"
#include "synth.hpp"

using namespace star;

namespace {

GrayImage gray_of(int rows, int cols, std::vector<std::uint8_t> v) {
  GrayImage g(rows, cols);
  g.data = std::move(v);
  return g;
}

RgbImage flip_h(const RgbImage& in) {
  RgbImage out(in.rows, in.cols);
  for (int r = 0; r < in.rows; ++r)
    for (int c = 0; c < in.cols; ++c)
      for (int ch = 0; ch < 3; ++ch) out.at(r, in.cols - 1 - c, ch) = in.at(r, c, ch);
  return out;
}

GrayImage flip_h(const GrayImage& in) {
  GrayImage out(in.rows, in.cols);
  for (int r = 0; r < in.rows; ++r)
    for (int c = 0; c < in.cols; ++c) out.at(r, in.cols - 1 - c) = in.at(r, c);
  return out;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("grayscale conversion") {
    CHECK(gray_value(255, 255, 255) == 255);
    CHECK(gray_value(255, 0, 0) == 76);
    CHECK(gray_value(0, 0, 0) == 0);
    CHECK(gray_value(0, 255, 0) == 150);  // 149.685
    CHECK(gray_value(0, 0, 255) == 29);   // 29.07
  }

  TEST_CASE("histogram equalization") {
    const GrayImage flat(4, 4, 100);
    CHECK(histogram_equalize(flat) == flat);
    const GrayImage two = gray_of(2, 2, {0, 0, 255, 255});
    CHECK(histogram_equalize(two) == two);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const GrayImage g = testing::random_gray(8, 8, rng, 0, 40 + i);
      const GrayImage e = histogram_equalize(g);
      CHECK(e == oracle::equalize(g));
      const bool distinct = *std::max_element(g.data.begin(), g.data.end()) !=
                            *std::min_element(g.data.begin(), g.data.end());
      if (distinct) {
        CHECK(*std::min_element(e.data.begin(), e.data.end()) == 0);
        CHECK(*std::max_element(e.data.begin(), e.data.end()) == 255);
      }
    }
  }

  TEST_CASE("invert and rescale") {
    CHECK(invert(gray_of(1, 2, {0, 255})).data == std::vector<std::uint8_t>{255, 0});
    std::mt19937_64 rng(12);
    const GrayImage g = testing::random_gray(9, 9, rng);
    CHECK(invert(invert(g)) == g);
    CHECK(rescale_minmax(gray_of(1, 3, {10, 60, 110})).data == std::vector<std::uint8_t>{0, 128, 255});
    CHECK(rescale_minmax(gray_of(1, 2, {0, 255})).data == std::vector<std::uint8_t>{0, 255});
    CHECK(rescale_minmax(GrayImage(3, 3, 77)) == GrayImage(3, 3, 0));
  }

  TEST_CASE("reference pipeline edge cases") {
    const RgbImage crop(6, 6, 140);
    CHECK(preprocess_reference(crop, BinaryMask(6, 6, 0)).image == GrayImage(6, 6, 0));
    CHECK(preprocess_reference(crop, BinaryMask(6, 6, 1)).image == GrayImage(6, 6, 0));
    CHECK_THROWS_AS(preprocess_reference(crop, BinaryMask(5, 6, 1)), Error);
  }

  TEST_CASE("reference pipeline on a two-tone crop") {
    RgbImage crop(4, 4, 230);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) crop.at(r, c, 0) = crop.at(r, c, 1) = crop.at(r, c, 2) = 90;
    const BinaryMask full(4, 4, 1);
    const auto out = preprocess_reference(crop, full);
    std::vector<std::uint8_t> all_ones(16, 1);
    CHECK(out.image == oracle::reference_steps(crop, all_ones));
    // Dark half becomes bright, light half dark.
    CHECK(out.image.at(0, 0) == 255);
    CHECK(out.image.at(3, 3) == 0);
    CHECK(out.kind == PreprocessKind::kReference);
  }

  TEST_CASE("reference output is zero outside the mask") {
    std::mt19937_64 rng(13);
    const RgbImage crop = testing::random_rgb(20, 24, rng);
    BinaryMask mask(20, 24);
    std::bernoulli_distribution coin(0.6);
    for (auto& v : mask.data) v = coin(rng);
    const auto out = preprocess_reference(crop, mask);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
      if (!mask.data[i]) CHECK(out.image.data[i] == 0);
    }
    CHECK(out.image == oracle::reference_steps(crop, mask.data));
    CHECK(preprocess_reference(crop, mask).image == out.image);
  }

  TEST_CASE("target pipeline") {
    CHECK(preprocess_target(RgbImage(5, 5, 100)).image == GrayImage(5, 5, 155));
    CHECK(preprocess_target(RgbImage(5, 5, 10)).image == GrayImage(5, 5, 0));
    RgbImage dot(5, 5, 200);
    dot.at(2, 2, 0) = dot.at(2, 2, 1) = dot.at(2, 2, 2) = 0;
    const auto out = preprocess_target(dot).image;
    // (255 + 8*200)/9 = 206.1 -> 206, inverted 49.
    CHECK(out.at(2, 2) == 49);
    CHECK(out.at(0, 0) == 55);
  }

  TEST_CASE("target pipeline commutes with flips") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 10; ++i) {
      const RgbImage img = testing::random_rgb(13, 17, rng);
      CHECK(flip_h(preprocess_target(img).image) == preprocess_target(flip_h(img)).image);
      CHECK(preprocess_target(img).image == oracle::target_steps(img));
    }
  }

  TEST_CASE("blur of a constant is constant") {
    CHECK(box_blur3(GrayImage(4, 7, 33)) == GrayImage(4, 7, 33));
  }
}
