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

#include "stainkit/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stainkit/error.hpp"

namespace stainkit {

void SsimParams::validate() const {
  if (window_size < 3 || window_size % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM window size must be odd and >= 3");
  }
  if (!(gaussian_sigma > 0.0) || !(k1 > 0.0) || !(k2 > 0.0) || !(dynamic_range > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM sigma, k1, k2 and dynamic range must be positive");
  }
}

namespace metrics {

namespace {

void require_same_shape(const RgbImage& a, const RgbImage& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

// Valid-mode separable filtering of one interleaved channel.
std::vector<double> filter_valid(std::span<const double> src, std::size_t height, std::size_t width,
                                 std::size_t channel, std::span<const double> taps) {
  const std::size_t win = taps.size();
  const std::size_t out_h = height - win + 1;
  const std::size_t out_w = width - win + 1;

  std::vector<double> horizontal(height * out_w);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < win; ++k) acc += taps[k] * src[(y * width + x + k) * 3 + channel];
      horizontal[y * out_w + x] = acc;
    }
  }
  std::vector<double> out(out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < win; ++k) acc += taps[k] * horizontal[(y + k) * out_w + x];
      out[y * out_w + x] = acc;
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_taps(std::size_t window_size, double sigma) {
  std::vector<double> taps(window_size);
  const double center = static_cast<double>(window_size / 2);
  double total = 0.0;
  for (std::size_t i = 0; i < window_size; ++i) {
    const double d = static_cast<double>(i) - center;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

SsimResult ssim_with_map(const RgbImage& a, const RgbImage& b, const SsimParams& params) {
  params.validate();
  require_same_shape(a, b);
  const std::size_t win = params.window_size;
  if (a.height() < win || a.width() < win) {
    throw Error(ErrorCode::kInvalidArgument, "image smaller than the SSIM window");
  }

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  const auto taps = gaussian_taps(win, params.gaussian_sigma);
  const std::size_t h = a.height();
  const std::size_t w = a.width();

  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = da[i] * da[i];
    bb[i] = db[i] * db[i];
    ab[i] = da[i] * db[i];
  }

  SsimResult result;
  result.map.rows = h - win + 1;
  result.map.cols = w - win + 1;
  const std::size_t positions = result.map.rows * result.map.cols;
  result.map.values.resize(positions * 3);

  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto mu_a = filter_valid(da, h, w, c, taps);
    const auto mu_b = filter_valid(db, h, w, c, taps);
    const auto e_aa = filter_valid(aa, h, w, c, taps);
    const auto e_bb = filter_valid(bb, h, w, c, taps);
    const auto e_ab = filter_valid(ab, h, w, c, taps);
    for (std::size_t i = 0; i < positions; ++i) {
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
      const double s = num / den;
      result.map.values[i * 3 + c] = s;
      total += s;
    }
  }
  result.value = total / static_cast<double>(positions * 3);
  return result;
}

double ssim(const RgbImage& a, const RgbImage& b, const SsimParams& params) {
  return ssim_with_map(a, b, params).value;
}

double psnr(const RgbImage& a, const RgbImage& b, double dynamic_range) {
  require_same_shape(a, b);
  if (!(dynamic_range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dynamic range must be positive");
  if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "PSNR of empty images");
  const auto da = a.data();
  const auto db = b.data();
  double sse = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(da.size());
  return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

double mae(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " elements");
  }
  if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "MAE of empty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double mae(const RgbImage& a, const RgbImage& b) {
  require_same_shape(a, b);
  return mae(a.data(), b.data());
}

MetricReport evaluate(const RgbImage& a, const RgbImage& b, const SsimParams& params) {
  return MetricReport{ssim(a, b, params), psnr(a, b, params.dynamic_range), mae(a, b)};
}

}  // namespace metrics
}  // namespace stainkit
