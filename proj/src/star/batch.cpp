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

#include "star/batch.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "star/compose.hpp"
#include "star/error.hpp"
#include "star/foreground.hpp"
#include "star/hash.hpp"
#include "star/preprocess.hpp"
#include "star/slide_io.hpp"
#include "star/tiling.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace star {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  // Never report exactly zero.
  return std::max(1e-9, std::chrono::duration<double>(Clock::now() - start).count());
}

[[noreturn]] void bad_config(const std::string& what) { fail(ErrorCode::kInvalidArgument, what); }

bool divides(double step, double range) {
  if (!(step > 0.0)) return false;
  const double n = range / step;
  return std::abs(n - std::round(n)) < 1e-9;
}

const char* method_name(CorrelationMethod m) {
  switch (m) {
    case CorrelationMethod::kDirect: return "direct";
    case CorrelationMethod::kSpectral: return "spectral";
    case CorrelationMethod::kAuto: break;
  }
  return "auto";
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

ojson bbox_json(const BBox& b) {
  return ojson{{"row0", b.row0}, {"col0", b.col0}, {"row1", b.row1}, {"col1", b.col1}};
}

ojson rigid_json(const RigidResult& r) {
  return ojson{{"row", r.row},
               {"col", r.col},
               {"theta_deg", r.theta_deg},
               {"score", r.score},
               {"downsample", r.downsample},
               {"template_rows", r.template_rows},
               {"template_cols", r.template_cols}};
}

}  // namespace

std::string sanitize_id(const std::string& text) {
  std::string out;
  for (unsigned char ch : text) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                      ch == '.' || ch == '-';
    out += keep ? static_cast<char>(ch) : '-';
  }
  if (out.empty() || out == "." || out == "..") out = "slide";
  return out;
}

void validate(const RunConfig& c) {
  if (c.reference_path.empty()) bad_config("reference_path is required");
  if (c.target_paths.empty()) bad_config("at least one target is required");
  if (c.out_dir.empty()) bad_config("out_dir is required");
  if (c.downsample < 1 || c.vis_downsample < 1) bad_config("downsample factors must be >= 1");
  if (c.downsample % c.vis_downsample != 0) bad_config("vis_downsample must divide downsample");
  if (!divides(c.coarse_angle, 360.0)) fail(ErrorCode::kInvalidStep, "coarse_angle must divide 360");
  if (!(c.fine_angle > 0.0) || c.fine_angle > c.coarse_angle) {
    fail(ErrorCode::kInvalidStep, "fine_angle must lie in (0, coarse_angle]");
  }
  if (c.coarse_stride < 1 || c.fine_stride < 1) bad_config("strides must be >= 1");
  if (c.black < 0 || c.white > 255 || c.black >= c.white) bad_config("gates need 0 <= black < white <= 255");
  if (c.patch_stride < 1 || c.patch < c.patch_stride) bad_config("need patch >= patch_stride >= 1");
  if (!(c.coverage > 0.0 && c.coverage <= 1.0)) bad_config("coverage must lie in (0, 1]");
  if (c.tile_size < 1 || c.tile_size % c.downsample != 0) {
    bad_config("tile_size must be a positive multiple of downsample");
  }
  if (!(c.tile_overlap >= 0.0 && c.tile_overlap < 1.0)) bad_config("tile_overlap must lie in [0, 1)");
  if (!(c.qa_threshold >= -1.0 && c.qa_threshold <= 1.0)) bad_config("qa_threshold must lie in [-1, 1]");
  if (c.workers < 1) bad_config("workers must be >= 1");
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) fail(ErrorCode::kSchemaError, "config must be a JSON object");
  static const std::set<std::string> known = {
      "reference_path", "target_paths", "out_dir",   "downsample",  "vis_downsample", "coarse_angle",
      "fine_angle",     "coarse_stride", "fine_stride", "white",      "black",          "patch",
      "patch_stride",   "coverage",     "tile_size", "tile_overlap", "qa_threshold",  "do_tiling",
      "workers",        "method"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) fail(ErrorCode::kSchemaError, "unknown config key '" + it.key() + "'");
  }
  auto get = [&](const char* key, auto& dst) {
    auto it = j.find(key);
    if (it == j.end()) return;
    using T = std::decay_t<decltype(dst)>;
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = it->is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = it->is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = it->is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = it->is_string();
    } else {
      ok = it->is_array() && std::all_of(it->begin(), it->end(), [](const json& e) { return e.is_string(); });
    }
    if (!ok) fail(ErrorCode::kSchemaError, std::string("config key '") + key + "' has the wrong type");
    dst = it->template get<T>();
  };
  get("reference_path", c.reference_path);
  get("target_paths", c.target_paths);
  get("out_dir", c.out_dir);
  get("downsample", c.downsample);
  get("vis_downsample", c.vis_downsample);
  get("coarse_angle", c.coarse_angle);
  get("fine_angle", c.fine_angle);
  get("coarse_stride", c.coarse_stride);
  get("fine_stride", c.fine_stride);
  get("white", c.white);
  get("black", c.black);
  get("patch", c.patch);
  get("patch_stride", c.patch_stride);
  get("coverage", c.coverage);
  get("tile_size", c.tile_size);
  get("tile_overlap", c.tile_overlap);
  get("qa_threshold", c.qa_threshold);
  get("do_tiling", c.do_tiling);
  get("workers", c.workers);
  std::string method = method_name(c.method);
  get("method", method);
  if (method == "auto") {
    c.method = CorrelationMethod::kAuto;
  } else if (method == "direct") {
    c.method = CorrelationMethod::kDirect;
  } else if (method == "spectral") {
    c.method = CorrelationMethod::kSpectral;
  } else {
    fail(ErrorCode::kSchemaError, "method must be auto, direct or spectral");
  }
  return c;
}

ojson run_config_to_json(const RunConfig& c) {
  return ojson{{"reference_path", c.reference_path},
               {"target_paths", c.target_paths},
               {"out_dir", c.out_dir},
               {"downsample", c.downsample},
               {"vis_downsample", c.vis_downsample},
               {"coarse_angle", c.coarse_angle},
               {"fine_angle", c.fine_angle},
               {"coarse_stride", c.coarse_stride},
               {"fine_stride", c.fine_stride},
               {"white", c.white},
               {"black", c.black},
               {"patch", c.patch},
               {"patch_stride", c.patch_stride},
               {"coverage", c.coverage},
               {"tile_size", c.tile_size},
               {"tile_overlap", c.tile_overlap},
               {"qa_threshold", c.qa_threshold},
               {"do_tiling", c.do_tiling},
               {"workers", c.workers},
               {"method", method_name(c.method)}};
}

const char* target_status_name(TargetStatus status) {
  switch (status) {
    case TargetStatus::kOk: return "ok";
    case TargetStatus::kLowQa: return "low_qa";
    case TargetStatus::kFailed: break;
  }
  return "failed";
}

int RunReport::count(TargetStatus status) const {
  return static_cast<int>(
      std::count_if(targets.begin(), targets.end(), [&](const TargetReport& t) { return t.status == status; }));
}

ojson report_to_json(const RunReport& report) {
  ojson j;
  j["version"] = 1;
  j["reference_id"] = report.reference_id;
  j["roi"] = report.roi ? bbox_json(*report.roi) : ojson(nullptr);
  j["foreground"] = {{"cached", report.foreground_cached}, {"wall_time", report.foreground_wall_time}};
  if (report.reference_tiles >= 0) j["reference_tiles"] = report.reference_tiles;
  ojson targets = ojson::array();
  for (const auto& t : report.targets) {
    ojson e;
    e["target_id"] = t.target_id;
    e["target_path"] = t.target_path;
    e["status"] = target_status_name(t.status);
    e["result"] = t.result ? rigid_json(*t.result) : ojson(nullptr);
    e["qa"] = t.qa;
    if (t.tiles >= 0) e["tiles"] = t.tiles;
    if (!t.error.empty()) e["error"] = t.error;
    e["wall_time"] = t.wall_time;
    targets.push_back(std::move(e));
  }
  j["targets"] = std::move(targets);
  j["totals"] = {{"targets", report.targets.size()},
                 {"ok", report.count(TargetStatus::kOk)},
                 {"low_qa", report.count(TargetStatus::kLowQa)},
                 {"failed", report.count(TargetStatus::kFailed)},
                 {"wall_time", report.wall_time}};
  return j;
}

namespace {

struct Foreground {
  BinaryMask mask;  // full registration thumbnail
  BBox roi;
  bool cached = false;
};

std::string foreground_key(const RgbImage& thumb, const RunConfig& c) {
  Sha256 h;
  h.update("star-foreground-v1\n");
  h.update(std::to_string(thumb.rows) + "x" + std::to_string(thumb.cols) + "\n");
  h.update(std::span<const std::uint8_t>(thumb.data));
  char params[160];
  std::snprintf(params, sizeof params, "\nwhite=%d black=%d patch=%d stride=%d coverage=%.17g", c.white, c.black,
                c.patch, c.patch_stride, c.coverage);
  h.update(params);
  return h.hex();
}

std::optional<Foreground> load_cached(const fs::path& mask_png, const fs::path& meta_path, const std::string& thumb_hash,
                                      const RgbImage& thumb) {
  if (!fs::exists(mask_png) || !fs::exists(meta_path)) return std::nullopt;
  try {
    const json meta = read_json(meta_path);
    if (meta.at("thumb_sha256").get<std::string>() != thumb_hash) return std::nullopt;
    const auto& b = meta.at("roi");
    Foreground fg;
    fg.roi = {b.at("row0").get<int>(), b.at("col0").get<int>(), b.at("row1").get<int>(), b.at("col1").get<int>()};
    fg.mask = mask_from_image(read_image_gray(mask_png));
    if (fg.mask.rows != thumb.rows || fg.mask.cols != thumb.cols) return std::nullopt;
    if (!fg.roi.valid() || fg.roi.row1 > thumb.rows || fg.roi.col1 > thumb.cols) return std::nullopt;
    fg.cached = true;
    return fg;
  } catch (const std::exception&) {
    // A damaged cache entry is recomputed.
    return std::nullopt;
  }
}

Foreground reference_foreground(const RgbImage& thumb, const RunConfig& c, const fs::path& cache_dir) {
  const std::string key = foreground_key(thumb, c);
  const std::string thumb_hash = sha256_hex(thumb.data);
  const fs::path mask_png = cache_dir / (key + ".mask.png");
  const fs::path meta_path = cache_dir / (key + ".json");
  if (auto hit = load_cached(mask_png, meta_path, thumb_hash, thumb)) return *hit;

  const GateThresholds gate{static_cast<std::uint8_t>(c.white), static_cast<std::uint8_t>(c.black)};
  Foreground fg;
  const BinaryMask passes = gate_mask(thumb, gate);
  fg.mask = classify_patches(thumb, passes, DefaultClassifier{gate}, c.patch, c.patch_stride);
  fg.roi = extract_roi(fg.mask, c.coverage);

  fs::create_directories(cache_dir);
  const fs::path tmp_png = cache_dir / (key + ".mask.png.tmp");
  write_image(tmp_png, mask_to_image(fg.mask));
  fs::rename(tmp_png, mask_png);
  ojson meta{{"thumb_sha256", thumb_hash},
             {"rows", thumb.rows},
             {"cols", thumb.cols},
             {"roi", bbox_json(fg.roi)}};
  write_text(meta_path, meta.dump(2) + "\n");
  return fg;
}

// Shared, read-only state prepared once per run.
struct ReferenceState {
  std::string id;
  std::string path;
  Foreground fg;
  PreprocessedImage phi_r;
  RotationBank bank;
  GrayImage blocks_image;  // one pixel per tile-grid block over the ROI
  RgbImage vis_crop;       // reference ROI at the visualisation scale
};

int write_tiles(const fs::path& dir, const RgbImage& aligned, const BlockMask& blocks, int tile_size,
                double overlap, const std::string& stain, const std::string& slide) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  ojson manifest;
  manifest["tile_size"] = tile_size;
  manifest["overlap"] = overlap;
  manifest["stride"] = tile_stride(tile_size, overlap);
  manifest["extent"] = {{"rows", aligned.rows}, {"cols", aligned.cols}};
  ojson tiles = ojson::array();
  int written = 0;
  if (aligned.rows >= tile_size && aligned.cols >= tile_size) {
    const auto plan = plan_tiles(dims_of(aligned), tile_size, overlap);
    for (const auto& [spec, tile] : extract_tiles(aligned, blocks, plan)) {
      const std::string name = encode_tile_name(stain, slide, spec.grid_row, spec.grid_col);
      write_image(dir / name, tile);
      tiles.push_back(ojson{{"name", name},
                            {"grid_row", spec.grid_row},
                            {"grid_col", spec.grid_col},
                            {"row0", spec.row0},
                            {"col0", spec.col0},
                            {"size", spec.size}});
      ++written;
    }
  }
  manifest["tiles"] = std::move(tiles);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return written;
}

TargetReport process_target(const RunConfig& c, const ReferenceState& ref, const std::string& target_id,
                            const std::string& target_path, const fs::path& out_dir) {
  TargetReport rep;
  rep.target_id = target_id;
  rep.target_path = target_path;
  const auto start = Clock::now();
  try {
    const SlideSource slide = open_slide(target_path);
    const RgbImage thumb = read_thumbnail(slide, c.downsample);
    const PreprocessedImage phi_t = preprocess_target(thumb);

    SearchConfig search;
    search.coarse_angle = c.coarse_angle;
    search.coarse_stride = c.coarse_stride;
    search.fine_angle = c.fine_angle;
    search.fine_stride = c.fine_stride;
    search.method = c.method;
    RigidResult result = register_with_bank(ref.phi_r, ref.bank, phi_t, search);
    result.downsample = c.downsample;
    const Dims dims{result.template_rows, result.template_cols};

    // QA in the space of the matched template.
    PreprocessedImage phi_r_eff = ref.phi_r;
    if (dims != dims_of(ref.phi_r.image)) {
      phi_r_eff.image = resize_bilinear(ref.phi_r.image, dims.rows, dims.cols);
      GrayImage m = resize_bilinear(static_cast<const GrayImage&>(ref.phi_r.mask), dims.rows, dims.cols);
      phi_r_eff.mask = BinaryMask(dims.rows, dims.cols);
      phi_r_eff.mask.data = std::move(m.data);
    }
    const double qa = qa_score(phi_r_eff, apply_rigid_thumbnail(phi_t.image, result, dims));

    const fs::path case_dir = out_dir / target_id;
    fs::create_directories(case_dir);
    const RgbImage target_vis = read_thumbnail(slide, c.vis_downsample);
    const RgbImage aligned_vis = apply_rigid_scaled(target_vis, c.vis_downsample, result, dims);
    const OverlaySpec overlay{std::max(2, c.tile_size / c.vis_downsample), 0};
    write_image(case_dir / "target_thumb.png", target_vis);
    write_image(case_dir / "aligned_thumb.png", aligned_vis);
    write_image(case_dir / "overlay.png", render_divider_overlay(aligned_vis, overlay));
    write_image(case_dir / "reference_thumb.png", ref.vis_crop);
    write_image(case_dir / "mask_blocks.png", ref.blocks_image);
    write_sidecar(make_sidecar(result, ref.id, target_id, qa), case_dir / "params.json");

    const RgbImage native = apply_rigid_native(slide, result, dims);
    write_tiff(case_dir / "aligned_native.tiff", native);

    ojson case_info{{"reference_path", ref.path},
                    {"target_path", target_path},
                    {"downsample", c.downsample},
                    {"vis_downsample", c.vis_downsample},
                    {"tile_size", c.tile_size},
                    {"tile_overlap", c.tile_overlap},
                    {"qa_threshold", c.qa_threshold},
                    {"target_rows", thumb.rows},
                    {"target_cols", thumb.cols},
                    {"stain", target_id},
                    {"slide", ref.id},
                    {"state", "clean"}};
    write_text(case_dir / "case.json", case_info.dump(2) + "\n");

    if (c.do_tiling) rep.tiles = tile_case(case_dir);

    rep.result = result;
    rep.qa = qa;
    rep.status = qa < c.qa_threshold ? TargetStatus::kLowQa : TargetStatus::kOk;
  } catch (const std::exception& e) {
    rep.status = TargetStatus::kFailed;
    rep.error = e.what();
  }
  rep.wall_time = seconds_since(start);
  return rep;
}

std::vector<std::string> assign_ids(const std::vector<std::string>& paths) {
  std::set<std::string> used = {"reference", "cache"};
  std::vector<std::string> ids;
  for (const auto& p : paths) {
    const std::string base = sanitize_id(fs::path(p).stem().string());
    std::string id = base;
    for (int n = 2; used.count(id); ++n) id = base + "-" + std::to_string(n);
    used.insert(id);
    ids.push_back(id);
  }
  return ids;
}

}  // namespace

RunReport run_batch(const RunConfig& c) {
  validate(c);
  const auto start = Clock::now();
  const fs::path out_dir = c.out_dir;
  fs::create_directories(out_dir);

  RunReport report;
  ReferenceState ref;
  ref.path = c.reference_path;
  ref.id = sanitize_id(fs::path(c.reference_path).stem().string());
  report.reference_id = ref.id;
  const auto ids = assign_ids(c.target_paths);

  std::string reference_error;
  try {
    const SlideSource slide = open_slide(c.reference_path);
    const RgbImage thumb = read_thumbnail(slide, c.downsample);
    const auto fg_start = Clock::now();
    ref.fg = reference_foreground(thumb, c, out_dir / "cache");
    report.foreground_wall_time = seconds_since(fg_start);
    report.foreground_cached = ref.fg.cached;
    report.roi = ref.fg.roi;

    const BBox& b = ref.fg.roi;
    const RgbImage crop = crop_with_fill(thumb, b);
    ref.phi_r = preprocess_reference(crop, crop_mask(dilate_mask(ref.fg.mask), b));
    ref.bank = build_rotation_bank(ref.phi_r, 0.0, 360.0, c.coarse_angle);

    const BlockMask blocks = block_mask(crop_mask(ref.fg.mask, b), c.tile_size / c.downsample);
    ref.blocks_image = block_mask_to_image(blocks);

    const int k = c.downsample / c.vis_downsample;
    const RgbImage vis = read_thumbnail(slide, c.vis_downsample);
    ref.vis_crop = crop_with_fill(vis, BBox{k * b.row0, k * b.col0, k * b.row1, k * b.col1});

    const fs::path ref_dir = out_dir / "reference";
    fs::create_directories(ref_dir);
    write_image(ref_dir / "reference_thumb.png", ref.vis_crop);
    write_image(ref_dir / "mask.png", mask_to_image(crop_mask(ref.fg.mask, b)));
    write_image(ref_dir / "mask_blocks.png", ref.blocks_image);
    if (c.do_tiling) {
      const int d = c.downsample;
      const RgbImage native =
          read_region_native_padded(slide, BBox{d * b.row0, d * b.col0, d * b.row1, d * b.col1}, 0);
      BlockMask scaled = blocks;
      scaled.scale = d;
      report.reference_tiles =
          write_tiles(ref_dir / "tiles", native, scaled, c.tile_size, c.tile_overlap, ref.id, ref.id);
    }
  } catch (const std::exception& e) {
    reference_error = std::string("reference: ") + e.what();
  }

  report.targets.resize(c.target_paths.size());
  if (!reference_error.empty()) {
    for (std::size_t i = 0; i < c.target_paths.size(); ++i) {
      auto& t = report.targets[i];
      t.target_id = ids[i];
      t.target_path = c.target_paths[i];
      t.status = TargetStatus::kFailed;
      t.error = reference_error;
      t.wall_time = 1e-9;
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < c.target_paths.size(); i = next++) {
        report.targets[i] = process_target(c, ref, ids[i], c.target_paths[i], out_dir);
      }
    };
    const int n = std::min<int>(c.workers, static_cast<int>(c.target_paths.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  report.wall_time = seconds_since(start);
  write_text(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  return report;
}

int tile_case(const fs::path& case_dir, std::optional<int> tile_size, std::optional<double> overlap) {
  const json info = read_json(case_dir / "case.json");
  const Sidecar sidecar = read_sidecar(case_dir / "params.json");
  int size = 0, d = 0;
  double ov = 0.0;
  std::string stain, slide_id;
  try {
    size = tile_size.value_or(info.at("tile_size").get<int>());
    ov = overlap.value_or(info.at("tile_overlap").get<double>());
    d = info.at("downsample").get<int>();
    stain = info.at("stain").get<std::string>();
    slide_id = info.at("slide").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("case.json: ") + e.what());
  }
  if (d != sidecar.downsample) fail(ErrorCode::kSchemaError, "case.json and params.json disagree on downsample");
  const int grid_block = info.at("tile_size").get<int>() / d;
  const SlideSource aligned_src = open_slide(case_dir / "aligned_native.tiff");
  const RgbImage aligned =
      read_region_native(aligned_src, BBox{0, 0, aligned_src.height(), aligned_src.width()});
  const BlockMask blocks = block_mask_from_image(read_image_gray(case_dir / "mask_blocks.png"), grid_block, d);
  return write_tiles(case_dir / "tiles", aligned, blocks, size, ov, stain, slide_id);
}

}  // namespace star
