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

#include "star/image.hpp"

#include <algorithm>
#include <cmath>

#include "star/error.hpp"

namespace star {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kInvalidStep: return "InvalidStep";
    case ErrorCode::kDegenerateKernel: return "DegenerateKernel";
    case ErrorCode::kKernelTooLarge: return "KernelTooLarge";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInvalidName: return "InvalidName";
    case ErrorCode::kExtentTooSmall: return "ExtentTooSmall";
    case ErrorCode::kOutOfCanvas: return "OutOfCanvas";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

namespace {

// Coordinates within this distance of an integer are treated as exact so
// that rotations by multiples of 90 degrees reproduce pixels bit-for-bit.
constexpr double kSnap = 1e-9;

void split_coord(double v, int& base, double& frac) {
  double fl = std::floor(v);
  double f = v - fl;
  if (f < kSnap) {
    f = 0.0;
  } else if (f > 1.0 - kSnap) {
    fl += 1.0;
    f = 0.0;
  }
  base = static_cast<int>(fl);
  frac = f;
}

}  // namespace

double sample_bilinear(const std::uint8_t* data, int rows, int cols, int channels,
                       int channel, double x, double y) {
  int x0 = 0;
  int y0 = 0;
  double fx = 0.0;
  double fy = 0.0;
  split_coord(x, x0, fx);
  split_coord(y, y0, fy);
  if (x0 < -1 || y0 < -1 || x0 >= cols || y0 >= rows) return 0.0;

  auto px = [&](int r, int c) -> double {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return 0.0;
    return data[(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)) * static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(channel)];
  };

  double v = (1.0 - fx) * (1.0 - fy) * px(y0, x0);
  if (fx > 0.0) v += fx * (1.0 - fy) * px(y0, x0 + 1);
  if (fy > 0.0) v += (1.0 - fx) * fy * px(y0 + 1, x0);
  if (fx > 0.0 && fy > 0.0) v += fx * fy * px(y0 + 1, x0 + 1);
  return v;
}

template <int C>
Raster<C> resize_bilinear(const Raster<C>& img, int out_rows, int out_cols) {
  if (out_rows < 1 || out_cols < 1) fail(ErrorCode::kInvalidArgument, "resize to empty dims");
  if (img.empty()) fail(ErrorCode::kInvalidArgument, "resize of empty image");
  Raster<C> out(out_rows, out_cols);
  const double sy = static_cast<double>(img.rows) / out_rows;
  const double sx = static_cast<double>(img.cols) / out_cols;
  for (int r = 0; r < out_rows; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.rows - 1));
    for (int c = 0; c < out_cols; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.cols - 1));
      for (int ch = 0; ch < C; ++ch) {
        out.at(r, c, ch) =
            round_to_u8(sample_bilinear(img.data.data(), img.rows, img.cols, C, ch, x, y));
      }
    }
  }
  return out;
}

template GrayImage resize_bilinear(const GrayImage&, int, int);
template RgbImage resize_bilinear(const RgbImage&, int, int);

RgbImage gray_to_rgb(const GrayImage& img) {
  RgbImage out(img.rows, img.cols);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = img.data[i];
  }
  return out;
}

std::vector<int> clamped_starts(int extent, int size, int stride) {
  if (size < 1 || size > extent || stride < 1) {
    fail(ErrorCode::kInvalidArgument, "window does not fit extent");
  }
  std::vector<int> starts;
  for (long long s = 0; s < extent; s += stride) {
    const int start = static_cast<int>(std::min<long long>(s, extent - size));
    if (starts.empty() || starts.back() != start) starts.push_back(start);
  }
  return starts;
}

}  // namespace star
