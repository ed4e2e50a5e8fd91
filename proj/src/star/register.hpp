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
#include <vector>

#include "star/correlate.hpp"
#include "star/image.hpp"
#include "star/preprocess.hpp"

namespace star {

/// Rotates about the image centre ((cols-1)/2, (rows-1)/2); positive angles
/// turn counterclockwise on screen. Bilinear, same canvas, zero fill.
GrayImage rotate_image(const GrayImage& img, double theta_deg);

/// Maps any angle into [0, 360).
double normalize_angle(double theta_deg);

struct RotationBank {
  std::vector<double> angles_deg;
  std::vector<GrayImage> templates;

  std::size_t size() const { return angles_deg.size(); }
};

/// Rotated copies of phi_r at {start, start+step, ...} below `stop`.
/// Throws InvalidStep unless step divides (stop - start).
RotationBank build_rotation_bank(const PreprocessedImage& phi_r, double start = 0.0,
                                 double stop = 360.0, double step = 10.0);

/// Kernel dims after oversize handling: unchanged when the kernel fits,
/// otherwise scaled by s = min((ih-1)/kh, (iw-1)/kw) with floor.
Dims adaptive_kernel_dims(Dims kernel, Dims input);
GrayImage adaptive_scale_kernel(const GrayImage& kernel, Dims input);

struct CoarseResult {
  int row_c = 0;
  int col_c = 0;
  double theta_c_deg = 0.0;
  double score = 0.0;
  int angle_index = 0;
};

struct RigidResult {
  int row = 0;
  int col = 0;
  double theta_deg = 0.0;
  double score = 0.0;
  int downsample = 1;
  /// Footprint of the matched template in target coordinates. Equals the
  /// reference dims unless the kernel had to be shrunk to fit the target.
  int template_rows = 0;
  int template_cols = 0;
};

struct FineParams {
  double step_deg = 1.0;
  double span_deg = 10.0;
  int stride = 1;
  int slack = 50;
};

struct SearchConfig {
  double coarse_angle = 10.0;
  int coarse_stride = 10;
  double fine_angle = 1.0;
  int fine_stride = 1;
  int slack = 50;
  CorrelationMethod method = CorrelationMethod::kAuto;
  int threads = 1;

  FineParams fine() const { return {fine_angle, coarse_angle, fine_stride, slack}; }
};

/// Global argmax over bank angles and stride-sampled placements. Ties go to
/// the smaller angle index, then the smaller row, then the smaller column.
CoarseResult coarse_search(const PreprocessedImage& phi_t, const RotationBank& bank, int stride = 10,
                           CorrelationMethod method = CorrelationMethod::kAuto, int threads = 1);

/// Re-searches +-span around the coarse angle at `step` inside a window of
/// the template footprint plus `slack` pixels per side.
RigidResult fine_search(const PreprocessedImage& phi_t, const PreprocessedImage& phi_r,
                        const CoarseResult& coarse, const FineParams& params = {},
                        CorrelationMethod method = CorrelationMethod::kAuto, int threads = 1);

RigidResult register_pair(const PreprocessedImage& phi_r, const PreprocessedImage& phi_t,
                          const SearchConfig& config = {});

/// Same as register_pair with a caller-owned coarse bank, so one bank can
/// serve many targets.
RigidResult register_with_bank(const PreprocessedImage& phi_r, const RotationBank& bank,
                               const PreprocessedImage& phi_t, const SearchConfig& config = {});

/// Exact correlation of the rotated (and, if needed, shrunk) reference at
/// the result's placement.
std::int64_t score_at(const PreprocessedImage& phi_t, const PreprocessedImage& phi_r,
                      int row, int col, double theta_deg);

}  // namespace star
