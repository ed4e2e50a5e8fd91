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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "star/correlate.hpp"
#include "star/register.hpp"

namespace star {

struct RunConfig {
  std::string reference_path;
  std::vector<std::string> target_paths;
  std::string out_dir;
  int downsample = 32;
  int vis_downsample = 16;
  double coarse_angle = 10.0;
  double fine_angle = 1.0;
  int coarse_stride = 10;
  int fine_stride = 1;
  int white = 230;
  int black = 20;
  int patch = 256;
  int patch_stride = 64;
  double coverage = 0.98;
  int tile_size = 256;
  double tile_overlap = 0.2;
  double qa_threshold = 0.2;
  bool do_tiling = false;
  int workers = 1;
  CorrelationMethod method = CorrelationMethod::kAuto;
};

/// Throws InvalidArgument / InvalidStep on inconsistent settings.
void validate(const RunConfig& config);

/// Missing keys keep their defaults; unknown keys or wrong types throw
/// SchemaError. `base` supplies the defaults.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

enum class TargetStatus { kOk, kLowQa, kFailed };
const char* target_status_name(TargetStatus status);

struct TargetReport {
  std::string target_id;
  std::string target_path;
  TargetStatus status = TargetStatus::kFailed;
  std::optional<RigidResult> result;
  double qa = 0.0;
  double wall_time = 0.0;
  int tiles = -1;  // -1 when tiling was not requested
  std::string error;
};

struct RunReport {
  std::string reference_id;
  std::optional<BBox> roi;  // thumbnail coordinates at the registration downsample
  bool foreground_cached = false;
  double foreground_wall_time = 0.0;
  int reference_tiles = -1;
  std::vector<TargetReport> targets;
  double wall_time = 0.0;

  int count(TargetStatus status) const;
};

nlohmann::ordered_json report_to_json(const RunReport& report);

/// Full pipeline for one reference and many targets. Per-target failures
/// are recorded, never thrown; a reference failure marks every target
/// failed. Writes <out>/report.json.
RunReport run_batch(const RunConfig& config);

/// Tiles an exported case directory (aligned_native.tiff + mask_blocks.png)
/// into <case>/tiles with a manifest. Returns the number of tiles written.
int tile_case(const std::filesystem::path& case_dir, std::optional<int> tile_size = std::nullopt,
              std::optional<double> overlap = std::nullopt);

/// Slug used for ids and tile names: [A-Za-z0-9.-], other bytes become '-'.
std::string sanitize_id(const std::string& text);

}  // namespace star
