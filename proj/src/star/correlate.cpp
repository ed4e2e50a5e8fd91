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
#include "star/correlate.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>

#include "star/error.hpp"

namespace star {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n) {
  return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}
ComplexBuffer alloc_complex(std::size_t n) {
  return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

void check_fit(const GrayImage& target, const GrayImage& kernel, int stride) {
  if (stride < 1) fail(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (kernel.empty() || target.empty()) fail(ErrorCode::kInvalidArgument, "empty correlation operand");
  if (kernel.rows > target.rows || kernel.cols > target.cols) {
    fail(ErrorCode::kKernelTooLarge,
         "kernel " + std::to_string(kernel.rows) + "x" + std::to_string(kernel.cols) +
             " exceeds target " + std::to_string(target.rows) + "x" + std::to_string(target.cols));
  }
}

CorrelationMap empty_map(const GrayImage& target, const GrayImage& kernel, int stride) {
  CorrelationMap map;
  map.stride = stride;
  map.rows = (target.rows - kernel.rows) / stride + 1;
  map.cols = (target.cols - kernel.cols) / stride + 1;
  map.scores.assign(static_cast<std::size_t>(map.rows) * static_cast<std::size_t>(map.cols), 0.0);
  return map;
}

CorrelationMap correlate_direct(const GrayImage& target, const GrayImage& kernel, int stride) {
  CorrelationMap map = empty_map(target, kernel, stride);
  const int kh = kernel.rows;
  const int kw = kernel.cols;
  for (int p = 0; p < map.rows; ++p) {
    for (int q = 0; q < map.cols; ++q) {
      const int r0 = p * stride;
      const int c0 = q * stride;
      std::int64_t total = 0;
      for (int u = 0; u < kh; ++u) {
        const std::uint8_t* t = &target.data[target.index(r0 + u, c0)];
        const std::uint8_t* k = &kernel.data[kernel.index(u, 0)];
        std::int64_t row_sum = 0;
        for (int v = 0; v < kw; ++v) row_sum += static_cast<std::int32_t>(t[v]) * k[v];
        total += row_sum;
      }
      map.scores[static_cast<std::size_t>(p) * static_cast<std::size_t>(map.cols) +
                 static_cast<std::size_t>(q)] = static_cast<double>(total);
    }
  }
  return map;
}

bool prefer_direct(const GrayImage& target, const GrayImage& kernel, int stride) {
  const double positions = static_cast<double>((target.rows - kernel.rows) / stride + 1) *
                           static_cast<double>((target.cols - kernel.cols) / stride + 1);
  const double direct = positions * static_cast<double>(kernel.pixel_count());
  const double n = static_cast<double>(fft_friendly_size(target.rows)) *
                   static_cast<double>(fft_friendly_size(target.cols));
  const double spectral = 12.0 * n * std::log2(n);
  return direct <= spectral;
}

}  // namespace

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int v = m;
    for (int f : {2, 3, 5, 7}) {
      while (v % f == 0) v /= f;
    }
    if (v == 1) return m;
  }
}

struct TargetCorrelator::Spectrum {
  int rows = 0;
  int cols = 0;
  int half_cols = 0;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ComplexBuffer target_hat;

  std::size_t real_size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  std::size_t complex_size() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(half_cols);
  }

  ~Spectrum() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

TargetCorrelator::TargetCorrelator(const GrayImage& target) : target_(target) {}
TargetCorrelator::~TargetCorrelator() = default;

const TargetCorrelator::Spectrum& TargetCorrelator::spectrum() const {
  std::call_once(spectrum_once_, [this] {
    auto s = std::make_unique<Spectrum>();
    s->rows = fft_friendly_size(target_.rows);
    s->cols = fft_friendly_size(target_.cols);
    s->half_cols = s->cols / 2 + 1;
    RealBuffer real = alloc_real(s->real_size());
    s->target_hat = alloc_complex(s->complex_size());
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      s->forward = fftw_plan_dft_r2c_2d(s->rows, s->cols, real.get(), s->target_hat.get(), FFTW_ESTIMATE);
      s->inverse = fftw_plan_dft_c2r_2d(s->rows, s->cols, s->target_hat.get(), real.get(), FFTW_ESTIMATE);
    }
    std::fill_n(real.get(), s->real_size(), 0.0);
    for (int r = 0; r < target_.rows; ++r) {
      for (int c = 0; c < target_.cols; ++c) {
        real[static_cast<std::size_t>(r) * static_cast<std::size_t>(s->cols) + static_cast<std::size_t>(c)] =
            target_.at(r, c);
      }
    }
    fftw_execute_dft_r2c(s->forward, real.get(), s->target_hat.get());
    spectrum_ = std::move(s);
  });
  return *spectrum_;
}

namespace {

// Circular correlation via the spectrum; valid placements never wrap because
// the transform is at least as large as the target.
CorrelationMap spectral_map(const GrayImage& target, const GrayImage& kernel, int stride,
                            const fftw_complex* target_hat, fftw_plan forward, fftw_plan inverse,
                            int rows, int cols, bool round_to_integer) {
  const int half_cols = cols / 2 + 1;
  const std::size_t real_n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t complex_n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(half_cols);
  RealBuffer real = alloc_real(real_n);
  ComplexBuffer kernel_hat = alloc_complex(complex_n);

  std::fill_n(real.get(), real_n, 0.0);
  for (int r = 0; r < kernel.rows; ++r) {
    for (int c = 0; c < kernel.cols; ++c) {
      real[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] =
          kernel.at(r, c);
    }
  }
  fftw_execute_dft_r2c(forward, real.get(), kernel_hat.get());
  for (std::size_t i = 0; i < complex_n; ++i) {
    const double tr = target_hat[i][0];
    const double ti = target_hat[i][1];
    const double kr = kernel_hat[i][0];
    const double ki = kernel_hat[i][1];
    // T * conj(K)
    kernel_hat[i][0] = tr * kr + ti * ki;
    kernel_hat[i][1] = ti * kr - tr * ki;
  }
  fftw_execute_dft_c2r(inverse, kernel_hat.get(), real.get());

  CorrelationMap map = empty_map(target, kernel, stride);
  const double norm = 1.0 / static_cast<double>(real_n);
  for (int p = 0; p < map.rows; ++p) {
    for (int q = 0; q < map.cols; ++q) {
      double v = real[static_cast<std::size_t>(p * stride) * static_cast<std::size_t>(cols) +
                      static_cast<std::size_t>(q * stride)] * norm;
      if (round_to_integer) v = std::round(v);
      map.scores[static_cast<std::size_t>(p) * static_cast<std::size_t>(map.cols) +
                 static_cast<std::size_t>(q)] = v;
    }
  }
  return map;
}

}  // namespace

CorrelationMap TargetCorrelator::correlate(const GrayImage& kernel, int stride,
                                           CorrelationMethod method) const {
  check_fit(target_, kernel, stride);
  if (method == CorrelationMethod::kAuto) {
    method = prefer_direct(target_, kernel, stride) ? CorrelationMethod::kDirect
                                                    : CorrelationMethod::kSpectral;
  }
  if (method == CorrelationMethod::kDirect) return correlate_direct(target_, kernel, stride);
  const Spectrum& s = spectrum();
  return spectral_map(target_, kernel, stride, s.target_hat.get(), s.forward, s.inverse, s.rows,
                      s.cols, true);
}

CorrelationMap correlate(const GrayImage& target, const GrayImage& kernel, int stride,
                         CorrelationMethod method) {
  return TargetCorrelator(target).correlate(kernel, stride, method);
}

CorrelationMap correlate_spectral_raw(const GrayImage& target, const GrayImage& kernel, int stride) {
  check_fit(target, kernel, stride);
  const int rows = fft_friendly_size(target.rows);
  const int cols = fft_friendly_size(target.cols);
  const std::size_t real_n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t complex_n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols / 2 + 1);
  RealBuffer real = alloc_real(real_n);
  ComplexBuffer target_hat = alloc_complex(complex_n);
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_2d(rows, cols, real.get(), target_hat.get(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_2d(rows, cols, target_hat.get(), real.get(), FFTW_ESTIMATE);
  }
  std::fill_n(real.get(), real_n, 0.0);
  for (int r = 0; r < target.rows; ++r) {
    for (int c = 0; c < target.cols; ++c) {
      real[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] =
          target.at(r, c);
    }
  }
  fftw_execute_dft_r2c(forward, real.get(), target_hat.get());
  CorrelationMap map =
      spectral_map(target, kernel, stride, target_hat.get(), forward, inverse, rows, cols, false);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  return map;
}

std::int64_t correlate_at(const GrayImage& target, const GrayImage& kernel, int row, int col) {
  if (row < 0 || col < 0 || row + kernel.rows > target.rows || col + kernel.cols > target.cols) {
    fail(ErrorCode::kOutOfBounds, "placement outside target");
  }
  std::int64_t total = 0;
  for (int u = 0; u < kernel.rows; ++u) {
    const std::uint8_t* t = &target.data[target.index(row + u, col)];
    const std::uint8_t* k = &kernel.data[kernel.index(u, 0)];
    for (int v = 0; v < kernel.cols; ++v) total += static_cast<std::int32_t>(t[v]) * k[v];
  }
  return total;
}

}  // namespace star
