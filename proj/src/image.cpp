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

#include "stainkit/image.hpp"

#include <algorithm>
#include <cmath>

#include "stainkit/error.hpp"

namespace stainkit {

namespace detail {

bool FinitePolicy::admits(double v) { return std::isfinite(v); }

void throw_invalid_image(const char* type, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, std::string(type) + ": " + why);
}

}  // namespace detail

RgbImage clamp_for_od(const RgbImage& img, double eps) {
  if (!(eps > 0.0 && eps <= 0.01)) {
    throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 0.01]");
  }
  std::vector<double> out(img.data().begin(), img.data().end());
  for (double& v : out) v = std::max(v, eps);
  return RgbImage(img.height(), img.width(), std::move(out));
}

RgbImage clip_to_unit(const LinearRgbImage& img) {
  std::vector<double> out(img.data().begin(), img.data().end());
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return RgbImage(img.height(), img.width(), std::move(out));
}

unsigned char quantize_8bit(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace stainkit
