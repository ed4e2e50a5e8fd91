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

#include "star/star.h"

#include <cstring>
#include <string>

#include "star/batch.hpp"
#include "star/error.hpp"
#include "star/preprocess.hpp"
#include "star/refine.hpp"
#include "star/register.hpp"
#include "star/slide_io.hpp"

struct StarSlide {
  star::SlideSource source;
};

struct StarImage {
  int channels = 0;
  star::GrayImage gray;
  star::RgbImage rgb;

  int rows() const { return channels == 1 ? gray.rows : rgb.rows; }
  int cols() const { return channels == 1 ? gray.cols : rgb.cols; }
  const std::uint8_t* data() const { return channels == 1 ? gray.data.data() : rgb.data.data(); }
};

namespace {

thread_local std::string g_last_error;

StarStatus set_error(StarStatus status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
StarStatus guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return STAR_OK;
  } catch (const star::Error& e) {
    return set_error(static_cast<StarStatus>(static_cast<int>(e.code())), e.what());
  } catch (const std::exception& e) {
    return set_error(STAR_INTERNAL, e.what());
  } catch (...) {
    return set_error(STAR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) star::fail(star::ErrorCode::kInvalidArgument, what);
}

StarImage* wrap(star::GrayImage img) {
  auto* out = new StarImage;
  out->channels = 1;
  out->gray = std::move(img);
  return out;
}

StarImage* wrap(star::RgbImage img) {
  auto* out = new StarImage;
  out->channels = 3;
  out->rgb = std::move(img);
  return out;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

star::SearchConfig search_config(const StarSearchConfig* c) {
  star::SearchConfig cfg;
  if (!c) return cfg;
  cfg.coarse_angle = c->coarse_angle;
  cfg.coarse_stride = c->coarse_stride;
  cfg.fine_angle = c->fine_angle;
  cfg.fine_stride = c->fine_stride;
  cfg.threads = c->threads < 1 ? 1 : c->threads;
  return cfg;
}

}  // namespace

extern "C" {

const char* star_version(void) { return "0.1.0"; }

const char* star_status_string(StarStatus status) {
  if (status == STAR_OK) return "Ok";
  if (status == STAR_INTERNAL) return "Internal";
  if (status < STAR_INVALID_ARGUMENT || status > STAR_NOT_FOUND) return "Unknown";
  return star::error_code_name(static_cast<star::ErrorCode>(status));
}

const char* star_last_error(void) { return g_last_error.c_str(); }

void star_string_free(char* s) { std::free(s); }

StarStatus star_slide_open(const char* path, StarSlide** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto slide = std::make_unique<StarSlide>(StarSlide{star::open_slide(path)});
    *out = slide.release();
  });
}

void star_slide_close(StarSlide* slide) { delete slide; }

StarStatus star_slide_dims(const StarSlide* slide, int32_t* width, int32_t* height) {
  return guard([&] {
    require(slide && width && height, "null argument");
    *width = slide->source.width();
    *height = slide->source.height();
  });
}

StarStatus star_slide_levels(const StarSlide* slide, int32_t* count) {
  return guard([&] {
    require(slide && count, "null argument");
    *count = slide->source.level_count();
  });
}

StarStatus star_slide_thumbnail(const StarSlide* slide, int32_t factor, StarImage** out) {
  return guard([&] {
    require(slide && out, "null argument");
    *out = wrap(star::read_thumbnail(slide->source, factor));
  });
}

StarStatus star_slide_read_region(const StarSlide* slide, int32_t row0, int32_t col0, int32_t rows, int32_t cols,
                                  StarImage** out) {
  return guard([&] {
    require(slide && out, "null argument");
    require(rows > 0 && cols > 0, "region must be non-empty");
    *out = wrap(star::read_region_native(slide->source, star::BBox{row0, col0, row0 + rows, col0 + cols}));
  });
}

StarStatus star_image_create(int32_t rows, int32_t cols, int32_t channels, const uint8_t* data, StarImage** out) {
  return guard([&] {
    require(out != nullptr, "null argument");
    require(rows > 0 && cols > 0, "image dims must be positive");
    require(channels == 1 || channels == 3, "channels must be 1 or 3");
    StarImage* img = channels == 1 ? wrap(star::GrayImage(rows, cols)) : wrap(star::RgbImage(rows, cols));
    if (data) {
      auto& dst = channels == 1 ? img->gray.data : img->rgb.data;
      std::memcpy(dst.data(), data, dst.size());
    }
    *out = img;
  });
}

void star_image_free(StarImage* image) { delete image; }

StarStatus star_image_info(const StarImage* image, int32_t* rows, int32_t* cols, int32_t* channels) {
  return guard([&] {
    require(image != nullptr, "null image");
    if (rows) *rows = image->rows();
    if (cols) *cols = image->cols();
    if (channels) *channels = image->channels;
  });
}

const uint8_t* star_image_data(const StarImage* image) { return image ? image->data() : nullptr; }

StarStatus star_image_write_png(const StarImage* image, const char* path) {
  return guard([&] {
    require(image && path, "null argument");
    if (image->channels == 1) {
      star::write_image(path, image->gray);
    } else {
      star::write_image(path, image->rgb);
    }
  });
}

StarStatus star_image_read_png(const char* path, StarImage** out) {
  return guard([&] {
    require(path && out, "null argument");
    auto any = star::read_image(path);
    if (auto* g = std::get_if<star::GrayImage>(&any)) {
      *out = wrap(std::move(*g));
    } else {
      *out = wrap(std::move(std::get<star::RgbImage>(any)));
    }
  });
}

void star_search_config_default(StarSearchConfig* config) {
  if (!config) return;
  const star::SearchConfig d;
  config->coarse_angle = d.coarse_angle;
  config->coarse_stride = d.coarse_stride;
  config->fine_angle = d.fine_angle;
  config->fine_stride = d.fine_stride;
  config->threads = d.threads;
}

StarStatus star_preprocess_reference(const StarImage* crop, const StarImage* mask, StarImage** out) {
  return guard([&] {
    require(crop && mask && out, "null argument");
    require(crop->channels == 3, "reference crop must be RGB");
    require(mask->channels == 1, "mask must be single channel");
    star::BinaryMask m(mask->gray.rows, mask->gray.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = mask->gray.data[i] ? 1 : 0;
    *out = wrap(star::preprocess_reference(crop->rgb, m).image);
  });
}

StarStatus star_preprocess_target(const StarImage* thumb, StarImage** out) {
  return guard([&] {
    require(thumb && out, "null argument");
    require(thumb->channels == 3, "target thumbnail must be RGB");
    *out = wrap(star::preprocess_target(thumb->rgb).image);
  });
}

StarStatus star_register_pair(const StarImage* phi_r, const StarImage* phi_t, const StarSearchConfig* config,
                              StarRigidResult* out) {
  return guard([&] {
    require(phi_r && phi_t && out, "null argument");
    require(phi_r->channels == 1 && phi_t->channels == 1, "registration inputs must be gray");
    const auto r = star::register_pair(star::as_reference(phi_r->gray), star::as_target(phi_t->gray),
                                       search_config(config));
    *out = StarRigidResult{r.row, r.col, r.theta_deg, r.score, r.downsample, r.template_rows, r.template_cols};
  });
}

StarStatus star_run_batch(const char* config_json, char** report_json) {
  return guard([&] {
    require(config_json != nullptr, "null config");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      star::fail(star::ErrorCode::kSchemaError, std::string("config: ") + e.what());
    }
    const star::RunReport report = star::run_batch(star::run_config_from_json(j));
    if (report_json) *report_json = dup_string(star::report_to_json(report).dump(2));
  });
}

StarStatus star_tile_case(const char* case_dir, int32_t* tiles_written) {
  return guard([&] {
    require(case_dir != nullptr, "null case dir");
    const int n = star::tile_case(case_dir);
    if (tiles_written) *tiles_written = n;
  });
}

StarStatus star_serve(const char* cases_dir, const char* host, int32_t port) {
  return guard([&] {
    require(cases_dir != nullptr, "null cases dir");
    require(port >= 0 && port <= 65535, "port out of range");
    star::serve(cases_dir, host ? host : "127.0.0.1", port);
  });
}

}  // extern "C"
