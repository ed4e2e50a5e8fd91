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

/* Public C interface to the slide registration engine. All functions are
 * thread-safe unless noted; the last error message is per thread. */
#ifndef STAR_STAR_H_
#define STAR_STAR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(STAR_BUILDING_LIBRARY)
#define STAR_API __declspec(dllexport)
#else
#define STAR_API __declspec(dllimport)
#endif
#else
#define STAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum StarStatus {
  STAR_OK = 0,
  STAR_INVALID_ARGUMENT = 1,
  STAR_FILE_NOT_FOUND = 2,
  STAR_UNSUPPORTED_FORMAT = 3,
  STAR_DECODE_ERROR = 4,
  STAR_OUT_OF_BOUNDS = 5,
  STAR_IO_ERROR = 6,
  STAR_DIM_MISMATCH = 7,
  STAR_INVALID_STEP = 8,
  STAR_DEGENERATE_KERNEL = 9,
  STAR_KERNEL_TOO_LARGE = 10,
  STAR_EMPTY_MASK = 11,
  STAR_SCHEMA_ERROR = 12,
  STAR_INVALID_NAME = 13,
  STAR_EXTENT_TOO_SMALL = 14,
  STAR_OUT_OF_CANVAS = 15,
  STAR_CONFLICT = 16,
  STAR_NOT_FOUND = 17,
  STAR_INTERNAL = 99
} StarStatus;

typedef struct StarSlide StarSlide;
typedef struct StarImage StarImage;

typedef struct StarRigidResult {
  int32_t row;
  int32_t col;
  double theta_deg;
  double score;
  int32_t downsample;
  int32_t template_rows;
  int32_t template_cols;
} StarRigidResult;

typedef struct StarSearchConfig {
  double coarse_angle;
  int32_t coarse_stride;
  double fine_angle;
  int32_t fine_stride;
  int32_t threads;
} StarSearchConfig;

STAR_API const char* star_version(void);
STAR_API const char* star_status_string(StarStatus status);
/* Message of the last failed call on this thread; "" if none. */
STAR_API const char* star_last_error(void);
STAR_API void star_string_free(char* s);

/* Slides */
STAR_API StarStatus star_slide_open(const char* path, StarSlide** out);
STAR_API void star_slide_close(StarSlide* slide);
STAR_API StarStatus star_slide_dims(const StarSlide* slide, int32_t* width, int32_t* height);
STAR_API StarStatus star_slide_levels(const StarSlide* slide, int32_t* count);
STAR_API StarStatus star_slide_thumbnail(const StarSlide* slide, int32_t factor, StarImage** out);
STAR_API StarStatus star_slide_read_region(const StarSlide* slide, int32_t row0, int32_t col0, int32_t rows,
                                           int32_t cols, StarImage** out);

/* Images: 8-bit, interleaved, 1 or 3 channels. NULL data gives a zeroed image. */
STAR_API StarStatus star_image_create(int32_t rows, int32_t cols, int32_t channels, const uint8_t* data,
                                      StarImage** out);
STAR_API void star_image_free(StarImage* image);
STAR_API StarStatus star_image_info(const StarImage* image, int32_t* rows, int32_t* cols, int32_t* channels);
/* Borrowed pointer, valid until star_image_free. */
STAR_API const uint8_t* star_image_data(const StarImage* image);
STAR_API StarStatus star_image_write_png(const StarImage* image, const char* path);
STAR_API StarStatus star_image_read_png(const char* path, StarImage** out);

/* Registration */
STAR_API void star_search_config_default(StarSearchConfig* config);
/* Reference pipeline on an RGB crop with a 0/non-zero mask of equal dims. */
STAR_API StarStatus star_preprocess_reference(const StarImage* crop, const StarImage* mask, StarImage** out);
STAR_API StarStatus star_preprocess_target(const StarImage* thumb, StarImage** out);
/* Both inputs are preprocessed gray images. config may be NULL. */
STAR_API StarStatus star_register_pair(const StarImage* phi_r, const StarImage* phi_t,
                                       const StarSearchConfig* config, StarRigidResult* out);

/* Batch / tiling / service. JSON strings returned through char** must be
 * released with star_string_free. */
STAR_API StarStatus star_run_batch(const char* config_json, char** report_json);
STAR_API StarStatus star_tile_case(const char* case_dir, int32_t* tiles_written);
/* Blocks serving HTTP until the process ends. */
STAR_API StarStatus star_serve(const char* cases_dir, const char* host, int32_t port);

#ifdef __cplusplus
}
#endif

#endif /* STAR_STAR_H_ */
