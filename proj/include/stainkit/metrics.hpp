// Copyright 2026 The stainkit Authors. All Rights Reserved.
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

#include <cstddef>
#include <span>
#include <vector>

#include "stainkit/image.hpp"

namespace stainkit {

/// Constants of the structural similarity index. Defaults are the standard
/// Gaussian-window settings.
struct SsimParams {
  std::size_t window_size = 11;
  double gaussian_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  /// Throws kInvalidArgument unless the window is odd and >= 3 and every
  /// constant is positive.
  void validate() const;
};

/// Per-window SSIM values over the valid region, interleaved by channel:
/// rows x cols x 3.
struct SsimMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return values[(y * cols + x) * 3 + c];
  }
};

struct SsimResult {
  double value = 0.0;
  SsimMap map;
};

struct MetricReport {
  double ssim = 0.0;
  /// +infinity when the images are identical.
  double psnr_db = 0.0;
  double mae = 0.0;
};

namespace metrics {

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(std::size_t window_size, double sigma);

/// Mean SSIM over channels and valid window positions.
double ssim(const RgbImage& a, const RgbImage& b, const SsimParams& params = {});

/// As ssim(), also returning the per-window map.
SsimResult ssim_with_map(const RgbImage& a, const RgbImage& b, const SsimParams& params = {});

/// 10 log10(L^2 / MSE); +infinity for identical inputs.
double psnr(const RgbImage& a, const RgbImage& b, double dynamic_range = 1.0);

double mae(std::span<const double> a, std::span<const double> b);
double mae(const RgbImage& a, const RgbImage& b);

MetricReport evaluate(const RgbImage& a, const RgbImage& b, const SsimParams& params = {});

}  // namespace metrics
}  // namespace stainkit
