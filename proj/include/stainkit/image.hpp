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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stainkit {

/// Default floor applied before any logarithm of pixel intensities.
inline constexpr double kDefaultOdEpsilon = 1e-6;

namespace detail {

struct UnitIntervalPolicy {
  static constexpr const char* kName = "RgbImage";
  static bool admits(double v) { return v >= 0.0 && v <= 1.0; }
};

struct FinitePolicy {
  static constexpr const char* kName = "HedImage";
  static bool admits(double v);
};

struct UnclippedPolicy {
  static constexpr const char* kName = "LinearRgbImage";
  static bool admits(double v) { return FinitePolicy::admits(v); }
};

[[noreturn]] void throw_invalid_image(const char* type, const std::string& why);

}  // namespace detail

/// Row-major H x W x 3 interleaved image whose element domain is fixed by
/// `Policy`. Instances are immutable once constructed.
template <typename Policy>
class BasicImage {
 public:
  static constexpr std::size_t kChannels = 3;

  BasicImage() = default;

  BasicImage(std::size_t height, std::size_t width, std::vector<double> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_ * kChannels) {
      detail::throw_invalid_image(Policy::kName,
                                  "data length " + std::to_string(data_.size()) +
                                      " != height*width*3 = " +
                                      std::to_string(height_ * width_ * kChannels));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!Policy::admits(data_[i])) {
        detail::throw_invalid_image(Policy::kName,
                                    "element " + std::to_string(i) + " out of domain");
      }
    }
  }

  static BasicImage filled(std::size_t height, std::size_t width, double value) {
    return BasicImage(height, width, std::vector<double>(height * width * kChannels, value));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * kChannels + c];
  }

  std::span<const double, kChannels> pixel(std::size_t index) const {
    return std::span<const double, kChannels>(data_.data() + index * kChannels, kChannels);
  }

  bool same_shape(std::size_t height, std::size_t width) const noexcept {
    return height_ == height && width_ == width;
  }

  template <typename Other>
  bool same_shape(const BasicImage<Other>& other) const noexcept {
    return same_shape(other.height(), other.width());
  }

  friend bool operator==(const BasicImage&, const BasicImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Intensities in [0, 1].
using RgbImage = BasicImage<detail::UnitIntervalPolicy>;
/// Stain concentrations; any finite value.
using HedImage = BasicImage<detail::FinitePolicy>;
/// RGB-ordered intensities before the final [0, 1] clip.
using LinearRgbImage = BasicImage<detail::UnclippedPolicy>;

/// Floors every element at `eps` so the image can go through a logarithm.
/// Requires eps in (0, 0.01].
RgbImage clamp_for_od(const RgbImage& img, double eps = kDefaultOdEpsilon);

/// Clips a linear image into the unit interval.
RgbImage clip_to_unit(const LinearRgbImage& img);

/// Reads an 8- or 16-bit PNG. Alpha is dropped with a warning on stderr;
/// grayscale inputs are rejected.
RgbImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG, quantizing with round(v * 255).
void save_image(const RgbImage& img, const std::filesystem::path& path);

/// The 8-bit sample save_image writes for `v`.
unsigned char quantize_8bit(double v);

}  // namespace stainkit
