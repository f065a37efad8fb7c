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

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "stainkit/image.hpp"

namespace stainkit {

using Matrix3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

enum class Stain : std::uint8_t { kHematoxylin = 0, kEosin = 1, kDab = 2 };

/// Moore-Penrose inverse of a 3x3 matrix. Exact inverse when |det| > 1e-9,
/// SVD-based pseudo-inverse otherwise.
Matrix3 pseudo_inverse(const Matrix3& p);

/// Optical-density basis. Row i of `p()` is the OD vector of stain i
/// (Hematoxylin, Eosin, DAB); pixels are row vectors multiplied on the right.
class StainBasis {
 public:
  /// H / E / DAB rows used unless overridden.
  static const Matrix3& default_matrix();
  static const StainBasis& standard();

  explicit StainBasis(const Matrix3& p);

  /// Reads 9 numbers (row-major P) from a JSON file, either a flat array or
  /// an array of three rows.
  static StainBasis from_json_file(const std::filesystem::path& path);
  static StainBasis from_json_text(std::string_view text);

  const Matrix3& p() const noexcept { return p_; }
  const Matrix3& p_inv() const noexcept { return p_inv_; }
  Eigen::RowVector3d row(Stain stain) const { return p_.row(static_cast<int>(stain)); }

 private:
  Matrix3 p_;
  Matrix3 p_inv_;
};

/// Set of HED channels kept by an isolation; the diagonal of Q.
class ChannelSelector {
 public:
  static constexpr ChannelSelector none() { return ChannelSelector(0); }
  static constexpr ChannelSelector all() { return ChannelSelector(0b111); }
  static constexpr ChannelSelector only(Stain s) {
    return ChannelSelector(static_cast<std::uint8_t>(1u << static_cast<unsigned>(s)));
  }

  /// Accepts H, E, DAB, HE, HDAB, ALL (case-insensitive).
  static ChannelSelector parse(std::string_view name);

  constexpr ChannelSelector with(Stain s) const {
    return ChannelSelector(static_cast<std::uint8_t>(mask_ | only(s).mask_));
  }
  constexpr bool retains(Stain s) const { return (mask_ >> static_cast<unsigned>(s)) & 1u; }
  constexpr bool empty() const { return mask_ == 0; }

  Matrix3 q() const;
  std::string name() const;

  friend constexpr bool operator==(ChannelSelector, ChannelSelector) = default;

 private:
  constexpr explicit ChannelSelector(std::uint8_t mask) : mask_(mask) {}
  std::uint8_t mask_;
};

/// P^dagger * Q * P: maps a log-intensity row vector onto the retained stains.
Matrix3 projection_matrix(const StainBasis& basis, ChannelSelector sel);

/// log(max(rgb, eps)) * P^dagger per pixel.
HedImage rgb_to_hed(const RgbImage& img, const StainBasis& basis = StainBasis::standard(),
                    double eps = kDefaultOdEpsilon);

/// exp(hed * P) per pixel, before clipping.
LinearRgbImage hed_to_rgb_unclipped(const HedImage& hed,
                                    const StainBasis& basis = StainBasis::standard());

/// exp(hed * P) per pixel, clipped to [0, 1].
RgbImage hed_to_rgb(const HedImage& hed, const StainBasis& basis = StainBasis::standard());

/// exp(log(max(rgb, eps)) * P^dagger Q P) per pixel, before clipping. Throws
/// on an empty selector.
LinearRgbImage isolate_channel_unclipped(const RgbImage& img, ChannelSelector sel,
                                         const StainBasis& basis = StainBasis::standard(),
                                         double eps = kDefaultOdEpsilon);

RgbImage isolate_channel(const RgbImage& img, ChannelSelector sel,
                         const StainBasis& basis = StainBasis::standard(),
                         double eps = kDefaultOdEpsilon);

/// Hematoxylin-only rendering with the default basis.
RgbImage destain(const RgbImage& img);

/// DAB-only rendering with the default basis.
RgbImage extract_dab(const RgbImage& img);

}  // namespace stainkit
