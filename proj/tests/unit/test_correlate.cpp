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
#include "star/correlate.hpp"
#include "star/error.hpp"
#include "synth.hpp"

using namespace star;

namespace {

void check_against_oracle(const CorrelationMap& m, const std::vector<std::vector<long long>>& want) {
  REQUIRE(m.rows == static_cast<int>(want.size()));
  REQUIRE(m.cols == static_cast<int>(want[0].size()));
  for (int p = 0; p < m.rows; ++p)
    for (int q = 0; q < m.cols; ++q) CHECK(m.at(p, q) == static_cast<double>(want[p][q]));
}

}  // namespace

TEST_SUITE("correlate") {
  TEST_CASE("unit kernel reproduces the target") {
    std::mt19937_64 rng(31);
    const GrayImage t = testing::random_gray(9, 11, rng);
    const GrayImage one(1, 1, 1);
    for (auto method : {CorrelationMethod::kDirect, CorrelationMethod::kSpectral}) {
      const auto m = correlate(t, one, 1, method);
      REQUIRE(m.rows == 9);
      REQUIRE(m.cols == 11);
      for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 11; ++c) CHECK(m.at(r, c) == t.at(r, c));
    }
  }

  TEST_CASE("diagonal kernel on ones") {
    GrayImage k(2, 2);
    k.data = {1, 0, 0, 1};
    for (auto method : {CorrelationMethod::kDirect, CorrelationMethod::kSpectral}) {
      const auto m = correlate(GrayImage(3, 3, 1), k, 1, method);
      CHECK(m.rows == 2);
      CHECK(m.cols == 2);
      CHECK(m.scores == std::vector<double>(4, 2.0));
    }
  }

  TEST_CASE("random inputs match the nested-loop oracle") {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> dim(1, 9), stride(1, 4);
    for (int i = 0; i < 30; ++i) {
      const GrayImage t = testing::random_gray(16, 16, rng);
      const GrayImage k = testing::random_gray(5, 5, rng);
      const int s = i == 0 ? 3 : stride(rng);
      const auto want = oracle::correlation(t, k, s);
      check_against_oracle(correlate(t, k, s, CorrelationMethod::kDirect), want);
      check_against_oracle(correlate(t, k, s, CorrelationMethod::kSpectral), want);
      check_against_oracle(correlate(t, k, s, CorrelationMethod::kAuto), want);
      const GrayImage k2 = testing::random_gray(dim(rng), dim(rng), rng);
      check_against_oracle(correlate(t, k2, s), oracle::correlation(t, k2, s));
    }
  }

  TEST_CASE("map dims follow the stride rule") {
    std::mt19937_64 rng(33);
    const GrayImage t = testing::random_gray(37, 23, rng);
    const GrayImage k = testing::random_gray(10, 4, rng);
    for (int s = 1; s <= 12; ++s) {
      const auto m = correlate(t, k, s);
      CHECK(m.rows == (37 - 10) / s + 1);
      CHECK(m.cols == (23 - 4) / s + 1);
      CHECK(m.stride == s);
    }
  }

  TEST_CASE("spectral raw output is within tolerance of the exact sums") {
    std::mt19937_64 rng(34);
    const GrayImage t = testing::random_gray(120, 130, rng);
    const GrayImage k = testing::random_gray(40, 33, rng);
    const auto exact = correlate(t, k, 2, CorrelationMethod::kDirect);
    const auto raw = correlate_spectral_raw(t, k, 2);
    REQUIRE(raw.scores.size() == exact.scores.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < raw.scores.size(); ++i) worst = std::max(worst, std::abs(raw.scores[i] - exact.scores[i]));
    CHECK(worst <= 1e-3);
  }

  TEST_CASE("single placement") {
    std::mt19937_64 rng(35);
    const GrayImage t = testing::random_gray(20, 20, rng);
    const GrayImage k = testing::random_gray(6, 7, rng);
    const auto want = oracle::correlation(t, k, 1);
    CHECK(correlate_at(t, k, 3, 11) == want[3][11]);
  }

  TEST_CASE("oversized kernel is rejected") {
    CHECK_THROWS_AS(correlate(GrayImage(5, 5, 1), GrayImage(6, 2, 1), 1), Error);
    try {
      correlate(GrayImage(5, 5, 1), GrayImage(2, 6, 1), 1);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kKernelTooLarge);
    }
  }

  TEST_CASE("cached target spectrum gives the same maps") {
    std::mt19937_64 rng(36);
    const GrayImage t = testing::random_gray(64, 50, rng);
    TargetCorrelator tc(t);
    for (int i = 0; i < 4; ++i) {
      const GrayImage k = testing::random_gray(9 + i, 12, rng);
      CHECK(tc.correlate(k, 1 + i, CorrelationMethod::kSpectral).scores ==
            correlate(t, k, 1 + i, CorrelationMethod::kDirect).scores);
    }
  }

  TEST_CASE("fft friendly sizes") {
    CHECK(fft_friendly_size(1) == 1);
    CHECK(fft_friendly_size(11) == 12);
    CHECK(fft_friendly_size(97) == 98);
    CHECK(fft_friendly_size(1024) == 1024);
    CHECK(fft_friendly_size(1031) == 1050);
  }
}
