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
#include "star/register.hpp"

#include <cmath>
#include <numbers>
#include <thread>

#include "star/error.hpp"

namespace star {

namespace {

void cos_sin(double theta_deg, double& c, double& s) {
  const double t = normalize_angle(theta_deg);
  if (t == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (t == 90.0) {
    c = 0.0;
    s = 1.0;
  } else if (t == 180.0) {
    c = -1.0;
    s = 0.0;
  } else if (t == 270.0) {
    c = 0.0;
    s = -1.0;
  } else {
    const double rad = t * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
  }
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct Peak {
  int p = 0;
  int q = 0;
  double score = 0.0;
};

// First maximum in row-major scan order.
Peak map_argmax(const CorrelationMap& map) {
  Peak best{0, 0, map.scores.empty() ? 0.0 : map.scores.front()};
  for (int p = 0; p < map.rows; ++p) {
    for (int q = 0; q < map.cols; ++q) {
      const double v = map.at(p, q);
      if (v > best.score) best = {p, q, v};
    }
  }
  return best;
}

}  // namespace

double normalize_angle(double theta_deg) {
  double t = std::fmod(theta_deg, 360.0);
  if (t < 0.0) t += 360.0;
  if (t >= 360.0) t = 0.0;
  return t;
}

GrayImage rotate_image(const GrayImage& img, double theta_deg) {
  double c = 1.0;
  double s = 0.0;
  cos_sin(theta_deg, c, s);
  if (c == 1.0 && s == 0.0) return img;

  GrayImage out(img.rows, img.cols);
  const double cx = (img.cols - 1) / 2.0;
  const double cy = (img.rows - 1) / 2.0;
  for (int r = 0; r < img.rows; ++r) {
    const double dy = r - cy;
    for (int col = 0; col < img.cols; ++col) {
      const double dx = col - cx;
      const double sx = c * dx - s * dy + cx;
      const double sy = s * dx + c * dy + cy;
      out.at(r, col) = round_to_u8(sample_bilinear(img.data.data(), img.rows, img.cols, 1, 0, sx, sy));
    }
  }
  return out;
}

RotationBank build_rotation_bank(const PreprocessedImage& phi_r, double start, double stop, double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidStep, "angle step must be positive");
  const double span = stop - start;
  const double count_f = span / step;
  const long count = std::lround(count_f);
  if (count < 1 || std::abs(count_f - static_cast<double>(count)) > 1e-9) {
    fail(ErrorCode::kInvalidStep, "step does not divide the angular range");
  }
  RotationBank bank;
  bank.angles_deg.reserve(static_cast<std::size_t>(count));
  bank.templates.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const double angle = start + static_cast<double>(k) * step;
    bank.angles_deg.push_back(angle);
    bank.templates.push_back(rotate_image(phi_r.image, angle));
  }
  return bank;
}

Dims adaptive_kernel_dims(Dims kernel, Dims input) {
  if (input.rows < 2 || input.cols < 2) {
    fail(ErrorCode::kDegenerateKernel, "input must be at least 2x2");
  }
  if (kernel.rows < 1 || kernel.cols < 1) fail(ErrorCode::kDegenerateKernel, "empty kernel");
  if (kernel.rows <= input.rows && kernel.cols <= input.cols) return kernel;

  // s = min(num_h/kh, num_w/kw), compared exactly by cross-multiplication.
  std::int64_t num = input.rows - 1;
  std::int64_t den = kernel.rows;
  if (static_cast<std::int64_t>(input.cols - 1) * kernel.rows < num * kernel.cols) {
    num = input.cols - 1;
    den = kernel.cols;
  }
  const Dims scaled{static_cast<int>(kernel.rows * num / den),
                    static_cast<int>(kernel.cols * num / den)};
  if (scaled.rows < 1 || scaled.cols < 1) {
    fail(ErrorCode::kDegenerateKernel, "scaled kernel would be empty");
  }
  return scaled;
}

GrayImage adaptive_scale_kernel(const GrayImage& kernel, Dims input) {
  const Dims d = adaptive_kernel_dims(dims_of(kernel), input);
  if (d == dims_of(kernel)) return kernel;
  return resize_bilinear(kernel, d.rows, d.cols);
}

CoarseResult coarse_search(const PreprocessedImage& phi_t, const RotationBank& bank, int stride,
                           CorrelationMethod method, int threads) {
  if (bank.size() == 0) fail(ErrorCode::kInvalidArgument, "empty rotation bank");
  const GrayImage& target = phi_t.image;
  TargetCorrelator correlator(target);

  std::vector<Peak> peaks(bank.size());
  parallel_for(static_cast<int>(bank.size()), threads, [&](int k) {
    const GrayImage kernel = adaptive_scale_kernel(bank.templates[static_cast<std::size_t>(k)], dims_of(target));
    peaks[static_cast<std::size_t>(k)] = map_argmax(correlator.correlate(kernel, stride, method));
  });

  // Reduce in angle order so the earliest angle wins ties.
  std::size_t best = 0;
  for (std::size_t k = 1; k < peaks.size(); ++k) {
    if (peaks[k].score > peaks[best].score) best = k;
  }
  CoarseResult out;
  out.row_c = peaks[best].p * stride;
  out.col_c = peaks[best].q * stride;
  out.theta_c_deg = bank.angles_deg[best];
  out.score = peaks[best].score;
  out.angle_index = static_cast<int>(best);
  return out;
}

RigidResult fine_search(const PreprocessedImage& phi_t, const PreprocessedImage& phi_r,
                        const CoarseResult& coarse, const FineParams& params,
                        CorrelationMethod method, int threads) {
  if (!(params.step_deg > 0.0) || params.span_deg < 0.0) {
    fail(ErrorCode::kInvalidStep, "fine step must be positive");
  }
  if (params.slack < 0) fail(ErrorCode::kInvalidArgument, "slack must be >= 0");
  const GrayImage& target = phi_t.image;
  const Dims eff = adaptive_kernel_dims(dims_of(phi_r.image), dims_of(target));
  if (coarse.row_c < 0 || coarse.col_c < 0 || coarse.row_c + eff.rows > target.rows ||
      coarse.col_c + eff.cols > target.cols) {
    fail(ErrorCode::kInvalidArgument, "coarse placement outside target");
  }

  const BBox window{std::max(0, coarse.row_c - params.slack), std::max(0, coarse.col_c - params.slack),
                    std::min(target.rows, coarse.row_c + eff.rows + params.slack),
                    std::min(target.cols, coarse.col_c + eff.cols + params.slack)};
  const GrayImage crop = crop_with_fill(target, window);
  TargetCorrelator correlator(crop);

  const double steps_f = 2.0 * params.span_deg / params.step_deg;
  const int steps = static_cast<int>(std::lround(steps_f));
  if (std::abs(steps_f - steps) > 1e-9) fail(ErrorCode::kInvalidStep, "fine step does not divide the window");
  const int n = steps + 1;

  std::vector<Peak> peaks(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int j) {
    const double angle = coarse.theta_c_deg - params.span_deg + j * params.step_deg;
    const GrayImage kernel = adaptive_scale_kernel(rotate_image(phi_r.image, angle), dims_of(target));
    peaks[static_cast<std::size_t>(j)] = map_argmax(correlator.correlate(kernel, params.stride, method));
  });

  std::size_t best = 0;
  for (std::size_t j = 1; j < peaks.size(); ++j) {
    if (peaks[j].score > peaks[best].score) best = j;
  }
  RigidResult out;
  out.row = window.row0 + peaks[best].p * params.stride;
  out.col = window.col0 + peaks[best].q * params.stride;
  out.theta_deg =
      normalize_angle(coarse.theta_c_deg - params.span_deg + static_cast<double>(best) * params.step_deg);
  out.score = peaks[best].score;
  out.template_rows = eff.rows;
  out.template_cols = eff.cols;
  return out;
}

RigidResult register_with_bank(const PreprocessedImage& phi_r, const RotationBank& bank,
                               const PreprocessedImage& phi_t, const SearchConfig& config) {
  if (phi_r.image.empty() || phi_t.image.empty()) {
    fail(ErrorCode::kInvalidArgument, "registration inputs must be non-empty");
  }
  const CoarseResult coarse = coarse_search(phi_t, bank, config.coarse_stride, config.method, config.threads);
  return fine_search(phi_t, phi_r, coarse, config.fine(), config.method, config.threads);
}

RigidResult register_pair(const PreprocessedImage& phi_r, const PreprocessedImage& phi_t,
                          const SearchConfig& config) {
  if (phi_r.image.empty() || phi_t.image.empty()) {
    fail(ErrorCode::kInvalidArgument, "registration inputs must be non-empty");
  }
  const RotationBank bank = build_rotation_bank(phi_r, 0.0, 360.0, config.coarse_angle);
  return register_with_bank(phi_r, bank, phi_t, config);
}

std::int64_t score_at(const PreprocessedImage& phi_t, const PreprocessedImage& phi_r, int row, int col,
                      double theta_deg) {
  const GrayImage kernel = adaptive_scale_kernel(rotate_image(phi_r.image, theta_deg), dims_of(phi_t.image));
  return correlate_at(phi_t.image, kernel, row, col);
}

}  // namespace star
