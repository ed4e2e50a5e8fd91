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

#include "star/slide_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>

#include "star/error.hpp"

namespace fs = std::filesystem;

namespace star {

namespace {

// ---------------------------------------------------------------------------
// libtiff plumbing

thread_local std::string g_tiff_error;

void tiff_error_handler(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  g_tiff_error = std::string(module ? module : "tiff") + ": " + buf;
}

void tiff_warning_handler(const char*, const char*, va_list) {}

void install_tiff_handlers() {
  static std::once_flag once;
  std::call_once(once, [] {
    TIFFSetErrorHandler(tiff_error_handler);
    TIFFSetWarningHandler(tiff_warning_handler);
  });
}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

TiffPtr tiff_open(const fs::path& path, const char* mode) {
  install_tiff_handlers();
  g_tiff_error.clear();
  return TiffPtr(TIFFOpen(path.c_str(), mode));
}

struct TiffLayout {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint16_t spp = 1;
  std::uint16_t bps = 8;
  std::uint16_t planar = PLANARCONFIG_CONTIG;
  std::uint16_t photometric = PHOTOMETRIC_MINISBLACK;
  std::uint16_t compression = COMPRESSION_NONE;
  bool tiled = false;
  std::uint32_t subfile_type = 0;
};

TiffLayout read_layout(TIFF* tif) {
  TiffLayout l;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &l.width);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &l.height);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &l.spp);
  TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &l.bps);
  TIFFGetFieldDefaulted(tif, TIFFTAG_PLANARCONFIG, &l.planar);
  TIFFGetFieldDefaulted(tif, TIFFTAG_COMPRESSION, &l.compression);
  if (!TIFFGetField(tif, TIFFTAG_PHOTOMETRIC, &l.photometric)) {
    l.photometric = l.spp >= 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK;
  }
  TIFFGetFieldDefaulted(tif, TIFFTAG_SUBFILETYPE, &l.subfile_type);
  l.tiled = TIFFIsTiled(tif) != 0;
  return l;
}

bool layout_supported(const TiffLayout& l) {
  if (l.width == 0 || l.height == 0 || l.bps != 8) return false;
  if (l.width > static_cast<std::uint32_t>(INT32_MAX) ||
      l.height > static_cast<std::uint32_t>(INT32_MAX)) {
    return false;
  }
  if (l.spp == 1) {
    return l.photometric == PHOTOMETRIC_MINISBLACK || l.photometric == PHOTOMETRIC_MINISWHITE;
  }
  if (l.spp == 3 && l.planar == PLANARCONFIG_CONTIG) {
    if (l.photometric == PHOTOMETRIC_RGB) return true;
    return l.photometric == PHOTOMETRIC_YCBCR && l.compression == COMPRESSION_JPEG;
  }
  return false;
}

// Converts decoded TIFF samples to RGB triples.
inline void put_pixel(const TiffLayout& l, const std::uint8_t* src, std::uint8_t* dst) {
  if (l.spp == 1) {
    const std::uint8_t v = l.photometric == PHOTOMETRIC_MINISWHITE ? 255 - src[0] : src[0];
    dst[0] = dst[1] = dst[2] = v;
  } else {
    dst[0] = src[0];
    dst[1] = src[1];
    dst[2] = src[2];
  }
}

RgbImage read_tiff_region(const fs::path& path, int directory, const BBox& box) {
  TiffPtr tif = tiff_open(path, "r");
  if (!tif) fail(ErrorCode::kDecodeError, "cannot reopen " + path.string());
  if (!TIFFSetDirectory(tif.get(), static_cast<tdir_t>(directory))) {
    fail(ErrorCode::kDecodeError, "missing directory in " + path.string());
  }
  const TiffLayout l = read_layout(tif.get());
  if (l.photometric == PHOTOMETRIC_YCBCR) {
    TIFFSetField(tif.get(), TIFFTAG_JPEGCOLORMODE, JPEGCOLORMODE_RGB);
  }

  RgbImage out(box.rows(), box.cols());
  const std::size_t spp = l.spp;

  if (l.tiled) {
    std::uint32_t tw = 0;
    std::uint32_t th = 0;
    TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
    if (tw == 0 || th == 0) fail(ErrorCode::kDecodeError, "bad tile geometry");
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(TIFFTileSize(tif.get())));
    const int ty0 = box.row0 / static_cast<int>(th);
    const int ty1 = (box.row1 - 1) / static_cast<int>(th);
    const int tx0 = box.col0 / static_cast<int>(tw);
    const int tx1 = (box.col1 - 1) / static_cast<int>(tw);
    for (int ty = ty0; ty <= ty1; ++ty) {
      for (int tx = tx0; tx <= tx1; ++tx) {
        const auto tile_row0 = static_cast<std::uint32_t>(ty) * th;
        const auto tile_col0 = static_cast<std::uint32_t>(tx) * tw;
        const ttile_t idx = TIFFComputeTile(tif.get(), tile_col0, tile_row0, 0, 0);
        if (TIFFReadEncodedTile(tif.get(), idx, buf.data(), static_cast<tmsize_t>(buf.size())) < 0) {
          fail(ErrorCode::kDecodeError, "tile decode failed: " + g_tiff_error);
        }
        const int r_begin = std::max(box.row0, static_cast<int>(tile_row0));
        const int r_end = std::min(box.row1, static_cast<int>(tile_row0 + th));
        const int c_begin = std::max(box.col0, static_cast<int>(tile_col0));
        const int c_end = std::min(box.col1, static_cast<int>(tile_col0 + tw));
        for (int r = r_begin; r < r_end; ++r) {
          const std::size_t src_row = static_cast<std::size_t>(r - static_cast<int>(tile_row0)) * tw;
          for (int c = c_begin; c < c_end; ++c) {
            const std::size_t s = (src_row + static_cast<std::size_t>(c - static_cast<int>(tile_col0))) * spp;
            put_pixel(l, &buf[s], &out.data[out.index(r - box.row0, c - box.col0)]);
          }
        }
      }
    }
    return out;
  }

  std::uint32_t rps = 0;
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_ROWSPERSTRIP, &rps);
  if (rps == 0 || rps > l.height) rps = l.height;
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(TIFFStripSize(tif.get())));
  const int s0 = box.row0 / static_cast<int>(rps);
  const int s1 = (box.row1 - 1) / static_cast<int>(rps);
  for (int s = s0; s <= s1; ++s) {
    if (TIFFReadEncodedStrip(tif.get(), static_cast<tstrip_t>(s), buf.data(),
                             static_cast<tmsize_t>(buf.size())) < 0) {
      fail(ErrorCode::kDecodeError, "strip decode failed: " + g_tiff_error);
    }
    const int strip_row0 = s * static_cast<int>(rps);
    const int r_begin = std::max(box.row0, strip_row0);
    const int r_end = std::min(box.row1, strip_row0 + static_cast<int>(rps));
    for (int r = r_begin; r < r_end; ++r) {
      const std::size_t src_row = static_cast<std::size_t>(r - strip_row0) * l.width;
      for (int c = box.col0; c < box.col1; ++c) {
        put_pixel(l, &buf[(src_row + static_cast<std::size_t>(c)) * spp],
                  &out.data[out.index(r - box.row0, c - box.col0)]);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// libpng simplified API

struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

template <int C>
Raster<C> decode_png(const fs::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    fail(ErrorCode::kDecodeError, path.string() + ": " + png.image.message);
  }
  png.image.format = C == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (png.image.width > static_cast<png_uint_32>(INT32_MAX) ||
      png.image.height > static_cast<png_uint_32>(INT32_MAX)) {
    fail(ErrorCode::kDecodeError, "PNG too large");
  }
  Raster<C> out(static_cast<int>(png.image.height), static_cast<int>(png.image.width));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&png.image, &background, out.data.data(), 0, nullptr)) {
    fail(ErrorCode::kDecodeError, path.string() + ": " + png.image.message);
  }
  return out;
}

template <int C>
void encode_png(const fs::path& path, const Raster<C>& img) {
  if (img.empty()) fail(ErrorCode::kInvalidArgument, "cannot write empty image");
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.cols);
  png.image.height = static_cast<png_uint_32>(img.rows);
  png.image.format = C == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
    fail(ErrorCode::kIoError, path.string() + ": " + png.image.message);
  }
}

std::array<unsigned char, 8> read_magic(const fs::path& path) {
  std::array<unsigned char, 8> magic{};
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, path.string());
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  return magic;
}

bool is_png_magic(const std::array<unsigned char, 8>& m) {
  static constexpr std::array<unsigned char, 8> kSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return m == kSig;
}

bool is_tiff_magic(const std::array<unsigned char, 8>& m) {
  const bool le = m[0] == 'I' && m[1] == 'I' && (m[2] == 42 || m[2] == 43) && m[3] == 0;
  const bool be = m[0] == 'M' && m[1] == 'M' && m[2] == 0 && (m[3] == 42 || m[3] == 43);
  return le || be;
}

RgbImage read_level_region(const SlideSource& slide, int level, const BBox& box) {
  if (slide.format() == SlideFormat::kPng) {
    RgbImage full = decode_png<3>(slide.path());
    if (full.rows != slide.height() || full.cols != slide.width()) {
      fail(ErrorCode::kDecodeError, "PNG dimensions changed since open");
    }
    if (box.row0 == 0 && box.col0 == 0 && box.row1 == full.rows && box.col1 == full.cols) {
      return full;
    }
    return crop_with_fill(full, box);
  }
  return read_tiff_region(slide.path(), slide.level(level).directory, box);
}

}  // namespace

std::vector<int> SlideSource::level_downsamples() const {
  std::vector<int> out;
  out.reserve(levels_.size());
  for (const auto& l : levels_) out.push_back(l.downsample);
  return out;
}

SlideSource open_slide(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec) || fs::is_directory(path, ec)) {
    fail(ErrorCode::kFileNotFound, path.string());
  }
  const auto magic = read_magic(path);

  SlideSource slide;
  slide.path_ = path;

  if (is_png_magic(magic)) {
    PngImage png;
    if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
      fail(ErrorCode::kUnsupportedFormat, path.string() + ": " + png.image.message);
    }
    if (png.image.width == 0 || png.image.height == 0 ||
        png.image.width > static_cast<png_uint_32>(INT32_MAX) ||
        png.image.height > static_cast<png_uint_32>(INT32_MAX)) {
      fail(ErrorCode::kUnsupportedFormat, path.string() + ": bad dimensions");
    }
    slide.format_ = SlideFormat::kPng;
    slide.levels_.push_back({static_cast<int>(png.image.width),
                             static_cast<int>(png.image.height), 1, 0});
    return slide;
  }

  if (!is_tiff_magic(magic)) {
    fail(ErrorCode::kUnsupportedFormat, path.string() + ": not a PNG or TIFF file");
  }

  TiffPtr tif = tiff_open(path, "r");
  if (!tif) fail(ErrorCode::kUnsupportedFormat, path.string() + ": " + g_tiff_error);
  slide.format_ = SlideFormat::kTiff;

  int dir = 0;
  do {
    const TiffLayout l = read_layout(tif.get());
    if (dir == 0) {
      if (!layout_supported(l)) {
        fail(ErrorCode::kUnsupportedFormat,
             path.string() + ": only 8-bit gray or RGB TIFF is supported");
      }
      slide.levels_.push_back(
          {static_cast<int>(l.width), static_cast<int>(l.height), 1, 0});
    } else if (layout_supported(l)) {
      // Reduced-resolution subfiles become pyramid levels when their
      // downsample is an integer and keeps increasing; other directories
      // (labels, macros) are ignored.
      const SlideLevel& base = slide.levels_.front();
      const SlideLevel& prev = slide.levels_.back();
      const double ratio = static_cast<double>(base.width) / l.width;
      const int ds = static_cast<int>(std::lround(ratio));
      const bool integral = std::abs(ratio - ds) * l.width <= 1.0;
      const bool height_ok =
          std::abs(static_cast<double>(base.height) / ds - l.height) <= 1.0;
      if (integral && height_ok && ds > prev.downsample) {
        slide.levels_.push_back({static_cast<int>(l.width), static_cast<int>(l.height), ds, dir});
      }
    }
    ++dir;
  } while (TIFFReadDirectory(tif.get()));

  return slide;
}

RgbImage read_thumbnail(const SlideSource& slide, int factor) {
  if (factor < 1) fail(ErrorCode::kInvalidArgument, "thumbnail factor must be >= 1");

  int level = 0;
  for (int i = 0; i < slide.level_count(); ++i) {
    const int ds = slide.level(i).downsample;
    if (ds <= factor && factor % ds == 0) level = i;
  }
  const SlideLevel& lv = slide.level(level);
  const int ratio = factor / lv.downsample;
  const int out_rows = (slide.height() + factor - 1) / factor;
  const int out_cols = (slide.width() + factor - 1) / factor;

  // Footprint of output index i on the chosen level, clamped so the last
  // output row/col always owns at least one source pixel.
  auto span_of = [ratio](int i, int extent) {
    const int begin = std::min(i * ratio, extent - 1);
    const int end = std::max(begin + 1, std::min((i + 1) * ratio, extent));
    return std::pair{begin, end};
  };

  RgbImage out(out_rows, out_cols);
  if (ratio == 1 && lv.height == out_rows && lv.width == out_cols) {
    return read_level_region(slide, level, {0, 0, lv.height, lv.width});
  }

  // PNG is decoded in one pass; TIFF levels are streamed in row bands.
  const int band_out_rows =
      slide.format() == SlideFormat::kPng ? out_rows : std::max(1, 512 / ratio);
  for (int ob = 0; ob < out_rows; ob += band_out_rows) {
    const int oe = std::min(out_rows, ob + band_out_rows);
    const int src_r0 = span_of(ob, lv.height).first;
    const int src_r1 = span_of(oe - 1, lv.height).second;
    const RgbImage band = read_level_region(slide, level, {src_r0, 0, src_r1, lv.width});
    for (int orow = ob; orow < oe; ++orow) {
      const auto [rb, re] = span_of(orow, lv.height);
      for (int ocol = 0; ocol < out_cols; ++ocol) {
        const auto [cb, ce] = span_of(ocol, lv.width);
        std::uint64_t acc[3] = {0, 0, 0};
        for (int r = rb; r < re; ++r) {
          const std::uint8_t* p = &band.data[band.index(r - src_r0, cb)];
          for (int c = cb; c < ce; ++c, p += 3) {
            acc[0] += p[0];
            acc[1] += p[1];
            acc[2] += p[2];
          }
        }
        const std::uint64_t n = static_cast<std::uint64_t>(re - rb) * static_cast<std::uint64_t>(ce - cb);
        for (int ch = 0; ch < 3; ++ch) {
          out.at(orow, ocol, ch) = static_cast<std::uint8_t>((2 * acc[ch] + n) / (2 * n));
        }
      }
    }
  }
  return out;
}

RgbImage read_region_native(const SlideSource& slide, const BBox& box) {
  if (!box.valid() || box.row1 > slide.height() || box.col1 > slide.width()) {
    fail(ErrorCode::kOutOfBounds,
         "region [" + std::to_string(box.row0) + "," + std::to_string(box.row1) + ")x[" +
             std::to_string(box.col0) + "," + std::to_string(box.col1) + ") outside " +
             std::to_string(slide.height()) + "x" + std::to_string(slide.width()));
  }
  return read_level_region(slide, 0, box);
}

RgbImage read_region_native_padded(const SlideSource& slide, const BBox& box, std::uint8_t fill) {
  if (box.rows() <= 0 || box.cols() <= 0) fail(ErrorCode::kInvalidArgument, "empty region");
  const BBox inside{std::max(box.row0, 0), std::max(box.col0, 0),
                    std::min(box.row1, slide.height()), std::min(box.col1, slide.width())};
  if (inside.row0 >= inside.row1 || inside.col0 >= inside.col1) {
    fail(ErrorCode::kOutOfBounds, "region lies entirely outside the slide");
  }
  const RgbImage part = read_level_region(slide, 0, inside);
  if (inside == box) return part;
  RgbImage out(box.rows(), box.cols(), fill);
  for (int r = 0; r < part.rows; ++r) {
    std::copy_n(&part.data[part.index(r, 0)], static_cast<std::size_t>(part.cols) * 3,
                &out.data[out.index(r + inside.row0 - box.row0, inside.col0 - box.col0)]);
  }
  return out;
}

void write_image(const fs::path& path, const GrayImage& image) { encode_png(path, image); }
void write_image(const fs::path& path, const RgbImage& image) { encode_png(path, image); }

AnyImage read_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kFileNotFound, path.string());
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    fail(ErrorCode::kUnsupportedFormat, path.string() + ": " + png.image.message);
  }
  if (png.image.format & PNG_FORMAT_FLAG_COLOR) return decode_png<3>(path);
  return decode_png<1>(path);
}

RgbImage read_image_rgb(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kFileNotFound, path.string());
  return decode_png<3>(path);
}

GrayImage read_image_gray(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kFileNotFound, path.string());
  return decode_png<1>(path);
}

namespace {

void write_tiled_directory(TIFF* tif, const RgbImage& img, int tile, bool reduced) {
  TIFFSetField(tif, TIFFTAG_SUBFILETYPE, reduced ? FILETYPE_REDUCEDIMAGE : 0);
  TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.cols));
  TIFFSetField(tif, TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.rows));
  TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, 3);
  TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
  TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif, TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
  TIFFSetField(tif, TIFFTAG_TILEWIDTH, static_cast<std::uint32_t>(tile));
  TIFFSetField(tif, TIFFTAG_TILELENGTH, static_cast<std::uint32_t>(tile));

  std::vector<std::uint8_t> buf(static_cast<std::size_t>(tile) * tile * 3);
  for (int ty = 0; ty < img.rows; ty += tile) {
    for (int tx = 0; tx < img.cols; tx += tile) {
      std::fill(buf.begin(), buf.end(), 0);
      const int h = std::min(tile, img.rows - ty);
      const int w = std::min(tile, img.cols - tx);
      for (int r = 0; r < h; ++r) {
        std::copy_n(&img.data[img.index(ty + r, tx)], static_cast<std::size_t>(w) * 3,
                    &buf[static_cast<std::size_t>(r) * tile * 3]);
      }
      const ttile_t idx = TIFFComputeTile(tif, static_cast<std::uint32_t>(tx),
                                          static_cast<std::uint32_t>(ty), 0, 0);
      if (TIFFWriteEncodedTile(tif, idx, buf.data(), static_cast<tmsize_t>(buf.size())) < 0) {
        fail(ErrorCode::kIoError, "tile write failed: " + g_tiff_error);
      }
    }
  }
  if (!TIFFWriteDirectory(tif)) fail(ErrorCode::kIoError, "directory write failed: " + g_tiff_error);
}

template <int C>
void write_strip_tiff_impl(const fs::path& path, const Raster<C>& img, int rows_per_strip) {
  if (img.empty()) fail(ErrorCode::kInvalidArgument, "cannot write empty image");
  TiffPtr tif = tiff_open(path, "w");
  if (!tif) fail(ErrorCode::kIoError, path.string() + ": " + g_tiff_error);
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.cols));
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.rows));
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, C);
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, C == 1 ? PHOTOMETRIC_MINISBLACK : PHOTOMETRIC_RGB);
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_LZW);
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(rows_per_strip));
  for (int r = 0; r < img.rows; ++r) {
    auto* row = const_cast<std::uint8_t*>(&img.data[img.index(r, 0)]);
    if (TIFFWriteScanline(tif.get(), row, static_cast<std::uint32_t>(r), 0) < 0) {
      fail(ErrorCode::kIoError, "scanline write failed: " + g_tiff_error);
    }
  }
}

}  // namespace

void write_tiff(const fs::path& path, const RgbImage& image, int tile) {
  write_pyramid_tiff(path, {image}, tile);
}

void write_pyramid_tiff(const fs::path& path, const std::vector<RgbImage>& levels, int tile) {
  if (levels.empty()) fail(ErrorCode::kInvalidArgument, "no levels to write");
  if (tile < 16 || tile % 16 != 0) fail(ErrorCode::kInvalidArgument, "tile size must be a multiple of 16");
  for (const auto& l : levels) {
    if (l.empty()) fail(ErrorCode::kInvalidArgument, "cannot write empty level");
  }
  TiffPtr tif = tiff_open(path, "w");
  if (!tif) fail(ErrorCode::kIoError, path.string() + ": " + g_tiff_error);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    write_tiled_directory(tif.get(), levels[i], tile, i > 0);
  }
}

void write_strip_tiff(const fs::path& path, const RgbImage& image, int rows_per_strip) {
  write_strip_tiff_impl(path, image, rows_per_strip);
}

void write_strip_tiff(const fs::path& path, const GrayImage& image, int rows_per_strip) {
  write_strip_tiff_impl(path, image, rows_per_strip);
}

}  // namespace star
