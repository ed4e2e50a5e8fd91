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

#include <memory>
#include <mutex>
#include <vector>

#include "star/image.hpp"

namespace star {

enum class CorrelationMethod { kAuto, kDirect, kSpectral };

/// Valid-mode cross-correlation responses sampled at `stride`.
/// scores(p, q) is the response for placing the kernel's top-left corner at
/// target pixel (origin_row + p*stride, origin_col + q*stride).
struct CorrelationMap {
  int stride = 1;
  int rows = 0;
  int cols = 0;
  int origin_row = 0;
  int origin_col = 0;
  std::vector<double> scores;

  double at(int p, int q) const {
    return scores[static_cast<std::size_t>(p) * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(q)];
  }
};

/// Raw (unnormalised) correlation of 8-bit data. Both paths produce exact
/// integer sums: the spectral path rounds its output to the nearest integer,
/// which is exact while the FFT error stays below 0.5.
/// Throws KernelTooLarge when the kernel does not fit the target.
CorrelationMap correlate(const GrayImage& target, const GrayImage& kernel, int stride,
                         CorrelationMethod method = CorrelationMethod::kAuto);

/// Spectral path without the final integer rounding, for accuracy checks.
CorrelationMap correlate_spectral_raw(const GrayImage& target, const GrayImage& kernel, int stride);

/// Exact response of one placement.
std::int64_t correlate_at(const GrayImage& target, const GrayImage& kernel, int row, int col);

/// Correlates many kernels against one target, caching the target spectrum
/// so a rotation bank costs one forward FFT of the target in total.
/// Safe to call correlate() concurrently.
class TargetCorrelator {
 public:
  explicit TargetCorrelator(const GrayImage& target);
  ~TargetCorrelator();
  TargetCorrelator(const TargetCorrelator&) = delete;
  TargetCorrelator& operator=(const TargetCorrelator&) = delete;

  CorrelationMap correlate(const GrayImage& kernel, int stride,
                           CorrelationMethod method = CorrelationMethod::kAuto) const;

  const GrayImage& target() const { return target_; }

 private:
  struct Spectrum;
  const Spectrum& spectrum() const;

  const GrayImage& target_;
  mutable std::once_flag spectrum_once_;
  mutable std::unique_ptr<Spectrum> spectrum_;
};

/// Smallest n' >= n whose only prime factors are 2, 3, 5, 7.
int fft_friendly_size(int n);

}  // namespace star
