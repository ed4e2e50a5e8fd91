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
#include "star/compose.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "star/error.hpp"

namespace fs = std::filesystem;

namespace star {

Sidecar make_sidecar(const RigidResult& result, std::string reference_id, std::string target_id, double qa) {
  Sidecar s;
  s.reference_id = std::move(reference_id);
  s.target_id = std::move(target_id);
  s.downsample = result.downsample;
  s.theta_deg = result.theta_deg;
  s.row = result.row;
  s.col = result.col;
  s.template_rows = result.template_rows;
  s.template_cols = result.template_cols;
  s.score = result.score;
  s.qa = qa;
  return s;
}

RigidResult rigid_from_sidecar(const Sidecar& sidecar) {
  RigidResult r;
  r.row = sidecar.row;
  r.col = sidecar.col;
  r.theta_deg = sidecar.theta_deg;
  r.score = sidecar.score;
  r.downsample = sidecar.downsample;
  r.template_rows = sidecar.template_rows;
  r.template_cols = sidecar.template_cols;
  return r;
}

nlohmann::ordered_json sidecar_to_json(const Sidecar& s) {
  nlohmann::ordered_json j;
  j["version"] = s.version;
  j["reference_id"] = s.reference_id;
  j["target_id"] = s.target_id;
  j["downsample"] = s.downsample;
  j["theta_deg"] = s.theta_deg;
  j["row"] = s.row;
  j["col"] = s.col;
  j["template_rows"] = s.template_rows;
  j["template_cols"] = s.template_cols;
  j["score"] = s.score;
  j["qa"] = s.qa;
  j["refined"] = s.refined;
  j["grid_shift"] = {{"d_rows", s.grid_shift.d_rows}, {"d_cols", s.grid_shift.d_cols}};
  return j;
}

namespace {

[[noreturn]] void schema(const std::string& what) { fail(ErrorCode::kSchemaError, what); }

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) schema(std::string("field '") + key + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) schema(std::string("field '") + key + "' out of range");
  return static_cast<int>(x);
}

double number_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) schema(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) schema(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) schema(std::string("unknown field '") + it.key() + "' in " + where);
  }
}

}  // namespace

Sidecar sidecar_from_json(const nlohmann::json& j) {
  if (!j.is_object()) schema("sidecar must be a JSON object");
  reject_unknown(j,
                 {"version", "reference_id", "target_id", "downsample", "theta_deg", "row", "col",
                  "template_rows", "template_cols", "score", "qa", "refined", "grid_shift"},
                 "sidecar");
  Sidecar s;
  s.version = int_field(j, "version");
  if (s.version != Sidecar::kVersion) schema("unsupported sidecar version " + std::to_string(s.version));
  s.reference_id = string_field(j, "reference_id");
  s.target_id = string_field(j, "target_id");
  s.downsample = int_field(j, "downsample");
  if (s.downsample < 1) schema("downsample must be >= 1");
  s.theta_deg = number_field(j, "theta_deg");
  if (!(s.theta_deg >= 0.0 && s.theta_deg < 360.0)) schema("theta_deg must lie in [0, 360)");
  s.row = int_field(j, "row");
  s.col = int_field(j, "col");
  s.template_rows = int_field(j, "template_rows");
  s.template_cols = int_field(j, "template_cols");
  if (s.template_rows < 1 || s.template_cols < 1) schema("template dims must be positive");
  s.score = number_field(j, "score");
  s.qa = number_field(j, "qa");
  if (!(s.qa >= -1.0 && s.qa <= 1.0)) schema("qa must lie in [-1, 1]");
  const auto& refined = field(j, "refined");
  if (!refined.is_boolean()) schema("field 'refined' must be a boolean");
  s.refined = refined.get<bool>();
  const auto& shift = field(j, "grid_shift");
  if (!shift.is_object()) schema("field 'grid_shift' must be an object");
  reject_unknown(shift, {"d_rows", "d_cols"}, "grid_shift");
  s.grid_shift.d_rows = int_field(shift, "d_rows");
  s.grid_shift.d_cols = int_field(shift, "d_cols");
  if (!s.refined && !(s.grid_shift == GridShift{})) schema("grid_shift must be zero unless refined");
  return s;
}

void write_sidecar(const Sidecar& sidecar, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << sidecar_to_json(sidecar).dump(2) << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

Sidecar read_sidecar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
  return sidecar_from_json(j);
}

namespace {

// Native-unit geometry of the lifted template footprint.
struct WarpGeometry {
  double cos_t = 1.0;
  double sin_t = 0.0;
  double centre_x = 0.0;  // native units, footprint centre
  double centre_y = 0.0;
  double half_w = 0.0;  // (d*k - 1)/2
  double half_h = 0.0;
  int out_rows = 0;
  int out_cols = 0;
  int s = 1;

  // Source pixel index (in the s-grid) for output pixel (r, c).
  void source_of(int r, int c, double& x, double& y) const {
    const double dx = s * c + (s - 1) / 2.0 - half_w;
    const double dy = s * r + (s - 1) / 2.0 - half_h;
    const double nx = centre_x + cos_t * dx + sin_t * dy;
    const double ny = centre_y - sin_t * dx + cos_t * dy;
    x = (nx - (s - 1) / 2.0) / s;
    y = (ny - (s - 1) / 2.0) / s;
  }
};

WarpGeometry make_geometry(const RigidResult& result, Dims template_dims, int source_downsample) {
  const int d = result.downsample;
  if (d < 1 || source_downsample < 1 || d % source_downsample != 0) {
    fail(ErrorCode::kInvalidArgument, "source downsample must divide the registration downsample");
  }
  if (template_dims.rows < 1 || template_dims.cols < 1) fail(ErrorCode::kInvalidArgument, "empty template");
  WarpGeometry g;
  const double rad = normalize_angle(result.theta_deg) * std::numbers::pi / 180.0;
  const double t = normalize_angle(result.theta_deg);
  if (t == 0.0) {
    g.cos_t = 1.0;
    g.sin_t = 0.0;
  } else if (t == 90.0) {
    g.cos_t = 0.0;
    g.sin_t = 1.0;
  } else if (t == 180.0) {
    g.cos_t = -1.0;
    g.sin_t = 0.0;
  } else if (t == 270.0) {
    g.cos_t = 0.0;
    g.sin_t = -1.0;
  } else {
    g.cos_t = std::cos(rad);
    g.sin_t = std::sin(rad);
  }
  g.half_w = (static_cast<double>(d) * template_dims.cols - 1.0) / 2.0;
  g.half_h = (static_cast<double>(d) * template_dims.rows - 1.0) / 2.0;
  g.centre_x = static_cast<double>(d) * result.col + g.half_w;
  g.centre_y = static_cast<double>(d) * result.row + g.half_h;
  g.s = source_downsample;
  const int scale = d / source_downsample;
  g.out_rows = template_dims.rows * scale;
  g.out_cols = template_dims.cols * scale;
  return g;
}

}  // namespace

template <int C>
Raster<C> apply_rigid_scaled(const Raster<C>& source, int source_downsample, const RigidResult& result,
                             Dims template_dims, Dims source_origin) {
  const WarpGeometry g = make_geometry(result, template_dims, source_downsample);
  Raster<C> out(g.out_rows, g.out_cols);
  for (int r = 0; r < g.out_rows; ++r) {
    for (int c = 0; c < g.out_cols; ++c) {
      double x = 0.0;
      double y = 0.0;
      g.source_of(r, c, x, y);
      x -= source_origin.cols;
      y -= source_origin.rows;
      for (int ch = 0; ch < C; ++ch) {
        out.at(r, c, ch) = round_to_u8(sample_bilinear(source.data.data(), source.rows, source.cols, C, ch, x, y));
      }
    }
  }
  return out;
}

template GrayImage apply_rigid_scaled(const GrayImage&, int, const RigidResult&, Dims, Dims);
template RgbImage apply_rigid_scaled(const RgbImage&, int, const RigidResult&, Dims, Dims);

GrayImage apply_rigid_thumbnail(const GrayImage& target_thumb, const RigidResult& result, Dims template_dims) {
  return apply_rigid_scaled(target_thumb, result.downsample, result, template_dims);
}

RgbImage apply_rigid_thumbnail(const RgbImage& target_thumb, const RigidResult& result, Dims template_dims) {
  return apply_rigid_scaled(target_thumb, result.downsample, result, template_dims);
}

RgbImage apply_rigid_native(const SlideSource& slide, const RigidResult& result, Dims template_dims) {
  const int d = result.downsample;
  if (normalize_angle(result.theta_deg) == 0.0) {
    const BBox footprint{d * result.row, d * result.col, d * (result.row + template_dims.rows),
                         d * (result.col + template_dims.cols)};
    if (footprint.valid() && footprint.row1 <= slide.height() && footprint.col1 <= slide.width()) {
      return read_region_native(slide, footprint);
    }
    return read_region_native_padded(slide, footprint, 0);
  }

  const WarpGeometry g = make_geometry(result, template_dims, 1);
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool first = true;
  for (int r : {0, g.out_rows - 1}) {
    for (int c : {0, g.out_cols - 1}) {
      double x = 0.0;
      double y = 0.0;
      g.source_of(r, c, x, y);
      if (first) {
        min_x = max_x = x;
        min_y = max_y = y;
        first = false;
      }
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  // One pixel of margin covers the bilinear neighbourhood.
  const BBox needed{static_cast<int>(std::floor(min_y)) - 1, static_cast<int>(std::floor(min_x)) - 1,
                    static_cast<int>(std::ceil(max_y)) + 2, static_cast<int>(std::ceil(max_x)) + 2};
  const BBox inside{std::max(needed.row0, 0), std::max(needed.col0, 0), std::min(needed.row1, slide.height()),
                    std::min(needed.col1, slide.width())};
  if (inside.row0 >= inside.row1 || inside.col0 >= inside.col1) {
    fail(ErrorCode::kOutOfBounds, "transformed footprint lies outside the slide");
  }
  const RgbImage region = read_region_native(slide, inside);
  return apply_rigid_scaled(region, 1, result, template_dims, {inside.row0, inside.col0});
}

RgbImage render_divider_overlay(const RgbImage& img, const OverlaySpec& spec) {
  if (spec.grid_spacing < 2) fail(ErrorCode::kInvalidArgument, "grid spacing must be >= 2");
  RgbImage out = img;
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      if (r % spec.grid_spacing == 0 || c % spec.grid_spacing == 0) {
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = spec.line_value;
      }
    }
  }
  return out;
}

RgbImage render_divider_overlay(const GrayImage& img, const OverlaySpec& spec) {
  return render_divider_overlay(gray_to_rgb(img), spec);
}

double qa_score(const PreprocessedImage& phi_r, const GrayImage& aligned_phi_t) {
  const GrayImage& ref = phi_r.image;
  if (ref.rows != aligned_phi_t.rows || ref.cols != aligned_phi_t.cols) {
    fail(ErrorCode::kDimMismatch, "qa inputs differ in size");
  }
  const bool masked = !phi_r.mask.empty();
  if (masked && (phi_r.mask.rows != ref.rows || phi_r.mask.cols != ref.cols)) {
    fail(ErrorCode::kDimMismatch, "reference mask differs in size");
  }
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < ref.data.size(); ++i) {
    if (masked && !phi_r.mask.data[i]) continue;
    n += 1.0;
    sa += ref.data[i];
    sb += aligned_phi_t.data[i];
  }
  if (n < 2.0) return 0.0;
  const double ma = sa / n;
  const double mb = sb / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ref.data.size(); ++i) {
    if (masked && !phi_r.mask.data[i]) continue;
    const double a = ref.data[i] - ma;
    const double b = aligned_phi_t.data[i] - mb;
    cov += a * b;
    va += a * a;
    vb += b * b;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

}  // namespace star
