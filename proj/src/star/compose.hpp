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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "star/image.hpp"
#include "star/preprocess.hpp"
#include "star/register.hpp"
#include "star/slide_io.hpp"

namespace star {

struct GridShift {
  int d_rows = 0;
  int d_cols = 0;
  bool operator==(const GridShift&) const = default;
};

/// Persisted registration parameters and refinement state for one
/// reference/target pair (params.json).
struct Sidecar {
  static constexpr int kVersion = 1;

  int version = kVersion;
  std::string reference_id;
  std::string target_id;
  int downsample = 32;
  double theta_deg = 0.0;
  int row = 0;
  int col = 0;
  int template_rows = 0;
  int template_cols = 0;
  double score = 0.0;
  double qa = 0.0;
  bool refined = false;
  GridShift grid_shift{};

  bool operator==(const Sidecar&) const = default;
};

Sidecar make_sidecar(const RigidResult& result, std::string reference_id, std::string target_id,
                     double qa);
RigidResult rigid_from_sidecar(const Sidecar& sidecar);

nlohmann::ordered_json sidecar_to_json(const Sidecar& sidecar);
/// Strict parse: every field required, no extras, invariants enforced.
/// Throws SchemaError.
Sidecar sidecar_from_json(const nlohmann::json& j);
void write_sidecar(const Sidecar& sidecar, const std::filesystem::path& path);
Sidecar read_sidecar(const std::filesystem::path& path);

struct OverlaySpec {
  int grid_spacing = 16;
  std::uint8_t line_value = 0;
};

/// Resamples `source` (a raster at `source_downsample`, whose pixel (0,0)
/// sits at `source_origin` in that raster's full grid) into the reference
/// frame: the template footprint at (row, col) is rotated by -theta about
/// its centre. Output covers template_dims lifted from result.downsample
/// to source_downsample; samples outside the source are 0.
template <int C>
Raster<C> apply_rigid_scaled(const Raster<C>& source, int source_downsample, const RigidResult& result,
                             Dims template_dims, Dims source_origin = {0, 0});

/// Thumbnail-scale alignment: source is at the registration downsample.
GrayImage apply_rigid_thumbnail(const GrayImage& target_thumb, const RigidResult& result, Dims template_dims);
RgbImage apply_rigid_thumbnail(const RgbImage& target_thumb, const RigidResult& result, Dims template_dims);

/// Native-resolution alignment reading only the padded footprint region.
/// Throws OutOfBounds when that region misses the slide.
RgbImage apply_rigid_native(const SlideSource& slide, const RigidResult& result, Dims template_dims);

RgbImage render_divider_overlay(const RgbImage& img, const OverlaySpec& spec);
RgbImage render_divider_overlay(const GrayImage& img, const OverlaySpec& spec);

/// Pearson correlation over the reference mask support; 0 when either side
/// is constant there. Throws DimMismatch.
double qa_score(const PreprocessedImage& phi_r, const GrayImage& aligned_phi_t);

}  // namespace star
