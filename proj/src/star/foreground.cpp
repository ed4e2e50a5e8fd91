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
#include "star/foreground.hpp"

#include <algorithm>

#include "star/error.hpp"
#include "star/preprocess.hpp"

namespace star {

namespace {

bool passes(std::uint8_t g, GateThresholds gate) { return gate.black < g && g < gate.white; }

struct AxisWindow {
  int begin = 0;
  int end = 0;
};

// Smallest contiguous window whose mass reaches `need`; among equally short
// windows the heavier one wins, then the earlier one.
AxisWindow smallest_window(const std::vector<std::uint64_t>& hist, double need) {
  const int n = static_cast<int>(hist.size());
  AxisWindow best{0, n};
  std::uint64_t best_mass = 0;
  bool found = false;
  std::uint64_t mass = 0;
  int a = 0;
  for (int b = 0; b < n; ++b) {
    mass += hist[static_cast<std::size_t>(b)];
    while (a < b && static_cast<double>(mass - hist[static_cast<std::size_t>(a)]) >= need) {
      mass -= hist[static_cast<std::size_t>(a)];
      ++a;
    }
    if (static_cast<double>(mass) >= need) {
      const int len = b + 1 - a;
      if (!found || len < best.end - best.begin || (len == best.end - best.begin && mass > best_mass)) {
        best = {a, b + 1};
        best_mass = mass;
        found = true;
      }
    }
  }
  return best;
}

AxisWindow percentile_window(const std::vector<std::uint64_t>& hist, std::uint64_t total) {
  const double lo_need = 0.01 * static_cast<double>(total);
  const double hi_need = 0.99 * static_cast<double>(total);
  AxisWindow w{0, static_cast<int>(hist.size())};
  std::uint64_t cum = 0;
  bool have_lo = false;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    cum += hist[i];
    if (!have_lo && cum > 0 && static_cast<double>(cum) >= lo_need) {
      w.begin = static_cast<int>(i);
      have_lo = true;
    }
    if (cum > 0 && static_cast<double>(cum) >= hi_need) {
      w.end = static_cast<int>(i) + 1;
      break;
    }
  }
  return w;
}

}  // namespace

BinaryMask gate_mask(const RgbImage& thumb, GateThresholds gate) {
  BinaryMask out(thumb.rows, thumb.cols);
  for (std::size_t i = 0; i < thumb.pixel_count(); ++i) {
    const std::uint8_t g = gray_value(thumb.data[3 * i], thumb.data[3 * i + 1], thumb.data[3 * i + 2]);
    out.data[i] = passes(g, gate) ? 1 : 0;
  }
  return out;
}

PatchLabel DefaultClassifier::operator()(const RgbImage& patch) const {
  if (patch.rows != kClassifierInput || patch.cols != kClassifierInput) {
    fail(ErrorCode::kInvalidArgument, "classifier expects a 256x256 patch");
  }
  std::size_t pass = 0;
  for (std::size_t i = 0; i < patch.pixel_count(); ++i) {
    pass += passes(gray_value(patch.data[3 * i], patch.data[3 * i + 1], patch.data[3 * i + 2]), gate);
  }
  return static_cast<double>(pass) >= min_fraction * static_cast<double>(patch.pixel_count())
             ? PatchLabel::kTissue
             : PatchLabel::kBackground;
}

PatchLabel default_classifier(const RgbImage& patch) { return DefaultClassifier{}(patch); }

BinaryMask classify_patches(const RgbImage& thumb, const BinaryMask& gate,
                            const PatchClassifier& classifier, int patch, int stride) {
  if (thumb.empty()) fail(ErrorCode::kInvalidArgument, "empty thumbnail");
  if (gate.rows != thumb.rows || gate.cols != thumb.cols) {
    fail(ErrorCode::kDimMismatch, "gate mask does not match thumbnail");
  }
  if (stride < 1 || patch < stride) fail(ErrorCode::kInvalidArgument, "need patch >= stride >= 1");

  BinaryMask out(thumb.rows, thumb.cols);
  auto to_input = [](const RgbImage& window) {
    if (window.rows == kClassifierInput && window.cols == kClassifierInput) return window;
    return resize_bilinear(window, kClassifierInput, kClassifierInput);
  };

  if (thumb.rows < patch || thumb.cols < patch) {
    // Thumbnail smaller than one patch: a single window covering everything.
    if (gate.count() == 0) return out;
    if (classifier(to_input(thumb)) == PatchLabel::kTissue) {
      std::fill(out.data.begin(), out.data.end(), 1);
    }
    return out;
  }

  // Summed-area table of gate passes for O(1) per-window skip tests.
  const std::size_t w = static_cast<std::size_t>(thumb.cols) + 1;
  std::vector<std::uint32_t> sat((static_cast<std::size_t>(thumb.rows) + 1) * w, 0);
  for (int r = 0; r < thumb.rows; ++r) {
    for (int c = 0; c < thumb.cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r + 1) * w + static_cast<std::size_t>(c + 1);
      sat[i] = gate.at(r, c) + sat[i - 1] + sat[i - w] - sat[i - w - 1];
    }
  }
  auto window_sum = [&](int r0, int c0) {
    const std::size_t a = static_cast<std::size_t>(r0) * w + static_cast<std::size_t>(c0);
    const std::size_t b = static_cast<std::size_t>(r0 + patch) * w + static_cast<std::size_t>(c0);
    return sat[b + static_cast<std::size_t>(patch)] - sat[b] - sat[a + static_cast<std::size_t>(patch)] + sat[a];
  };

  for (int r0 : clamped_starts(thumb.rows, patch, stride)) {
    for (int c0 : clamped_starts(thumb.cols, patch, stride)) {
      if (window_sum(r0, c0) == 0) continue;
      const RgbImage window = crop_with_fill(thumb, {r0, c0, r0 + patch, c0 + patch});
      if (classifier(to_input(window)) != PatchLabel::kTissue) continue;
      for (int r = r0; r < r0 + patch; ++r) {
        std::fill_n(&out.data[out.index(r, c0)], patch, 1);
      }
    }
  }
  return out;
}

BBox extract_roi(const BinaryMask& mask, double coverage) {
  std::vector<std::uint64_t> row_hist(static_cast<std::size_t>(mask.rows), 0);
  std::vector<std::uint64_t> col_hist(static_cast<std::size_t>(mask.cols), 0);
  std::uint64_t total = 0;
  for (int r = 0; r < mask.rows; ++r) {
    for (int c = 0; c < mask.cols; ++c) {
      if (mask.at(r, c)) {
        ++row_hist[static_cast<std::size_t>(r)];
        ++col_hist[static_cast<std::size_t>(c)];
        ++total;
      }
    }
  }
  if (total == 0) fail(ErrorCode::kEmptyMask, "mask has no foreground pixel");

  const double need = coverage * static_cast<double>(total);
  AxisWindow rows = smallest_window(row_hist, need);
  AxisWindow cols = smallest_window(col_hist, need);
  constexpr int kMinWindow = 8;
  if (rows.end - rows.begin < kMinWindow || cols.end - cols.begin < kMinWindow) {
    rows = percentile_window(row_hist, total);
    cols = percentile_window(col_hist, total);
  }
  return {rows.begin, cols.begin, rows.end, cols.end};
}

BinaryMask dilate_mask(const BinaryMask& mask, int size) {
  if (size < 1 || size % 2 == 0) fail(ErrorCode::kInvalidArgument, "dilation size must be odd");
  const int half = size / 2;
  BinaryMask horiz(mask.rows, mask.cols);
  for (int r = 0; r < mask.rows; ++r) {
    for (int c = 0; c < mask.cols; ++c) {
      if (!mask.at(r, c)) continue;
      const int c0 = std::max(0, c - half);
      const int c1 = std::min(mask.cols - 1, c + half);
      for (int cc = c0; cc <= c1; ++cc) horiz.at(r, cc) = 1;
    }
  }
  BinaryMask out(mask.rows, mask.cols);
  for (int r = 0; r < mask.rows; ++r) {
    const int r0 = std::max(0, r - half);
    const int r1 = std::min(mask.rows - 1, r + half);
    for (int c = 0; c < mask.cols; ++c) {
      if (!horiz.at(r, c)) continue;
      for (int rr = r0; rr <= r1; ++rr) out.at(rr, c) = 1;
    }
  }
  return out;
}

BlockMask block_mask(const BinaryMask& mask, int block) {
  if (block < 1) fail(ErrorCode::kInvalidArgument, "block size must be >= 1");
  BlockMask out;
  out.block_size = block;
  out.rows = (mask.rows + block - 1) / block;
  out.cols = (mask.cols + block - 1) / block;
  out.grid.assign(static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols), 0);
  for (int br = 0; br < out.rows; ++br) {
    const int r0 = br * block;
    const int r1 = std::min(mask.rows, r0 + block);
    for (int bc = 0; bc < out.cols; ++bc) {
      const int c0 = bc * block;
      const int c1 = std::min(mask.cols, c0 + block);
      std::size_t fg = 0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) fg += mask.at(r, c) != 0;
      }
      const std::size_t area = static_cast<std::size_t>(r1 - r0) * static_cast<std::size_t>(c1 - c0);
      out.grid[static_cast<std::size_t>(br) * static_cast<std::size_t>(out.cols) +
               static_cast<std::size_t>(bc)] = 2 * fg >= area ? 1 : 0;
    }
  }
  return out;
}

BinaryMask crop_mask(const BinaryMask& mask, const BBox& box) {
  BinaryMask out(box.rows(), box.cols());
  static_cast<GrayImage&>(out) = crop_with_fill(static_cast<const GrayImage&>(mask), box);
  return out;
}

GrayImage mask_to_image(const BinaryMask& mask) {
  GrayImage out(mask.rows, mask.cols);
  for (std::size_t i = 0; i < mask.data.size(); ++i) out.data[i] = mask.data[i] ? 255 : 0;
  return out;
}

BinaryMask mask_from_image(const GrayImage& img) {
  BinaryMask out(img.rows, img.cols);
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] >= 128 ? 1 : 0;
  return out;
}

GrayImage block_mask_to_image(const BlockMask& blocks) {
  GrayImage out(blocks.rows, blocks.cols);
  for (std::size_t i = 0; i < blocks.grid.size(); ++i) out.data[i] = blocks.grid[i] ? 255 : 0;
  return out;
}

BlockMask block_mask_from_image(const GrayImage& img, int block_size, int scale) {
  BlockMask out;
  out.block_size = block_size;
  out.scale = scale;
  out.rows = img.rows;
  out.cols = img.cols;
  out.grid.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) out.grid[i] = img.data[i] >= 128 ? 1 : 0;
  return out;
}

}  // namespace star
