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

#include "stainkit/stain.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "stainkit/error.hpp"

namespace stainkit {

namespace {

constexpr double kSingularDeterminant = 1e-9;

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void require_finite(const Matrix3& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
}

// Applies `pre` to each sample, multiplies the pixel row vector by `m` on
// the right, then applies `post`.
template <typename OutPolicy, typename InPolicy, typename Pre, typename Post>
BasicImage<OutPolicy> map_pixels(const BasicImage<InPolicy>& img, const Matrix3& m, Pre pre,
                                 Post post) {
  const auto src = img.data();
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const std::size_t base = i * 3;
    const Eigen::RowVector3d v(pre(src[base]), pre(src[base + 1]), pre(src[base + 2]));
    const Eigen::RowVector3d r = v * m;
    for (int c = 0; c < 3; ++c) out[base + c] = post(r[c]);
  }
  return BasicImage<OutPolicy>(img.height(), img.width(), std::move(out));
}

auto clamped_log(double eps) {
  return [eps](double v) { return std::log(std::max(v, eps)); };
}
constexpr auto kIdentity = [](double v) { return v; };
constexpr auto kExp = [](double v) { return std::exp(v); };
constexpr auto kExpClipped = [](double v) { return std::min(std::exp(v), 1.0); };

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 0.01)) throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 0.01]");
}

}  // namespace

Matrix3 pseudo_inverse(const Matrix3& p) {
  if (p.hasNaN()) throw Error(ErrorCode::kInvalidArgument, "matrix contains NaN");
  if (std::abs(p.determinant()) > kSingularDeterminant) return p.inverse();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double tol = std::numeric_limits<double>::epsilon() * 3.0 * sigma.maxCoeff();
  Eigen::Vector3d inv_sigma = Eigen::Vector3d::Zero();
  for (int i = 0; i < 3; ++i) {
    if (sigma[i] > tol) inv_sigma[i] = 1.0 / sigma[i];
  }
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

const Matrix3& StainBasis::default_matrix() {
  static const Matrix3 m = (Matrix3() << 0.65, 0.70, 0.29,  //
                            0.07, 0.99, 0.11,                //
                            0.27, 0.57, 0.78)
                               .finished();
  return m;
}

const StainBasis& StainBasis::standard() {
  static const StainBasis basis(default_matrix());
  return basis;
}

StainBasis::StainBasis(const Matrix3& p) : p_(p) {
  require_finite(p_, "stain basis");
  p_inv_ = pseudo_inverse(p_);
}

StainBasis StainBasis::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("stain basis: ") + e.what());
  }
  std::vector<double> values;
  auto collect = [&values](const nlohmann::json& node) {
    if (!node.is_number()) throw Error(ErrorCode::kParseError, "stain basis entries must be numbers");
    values.push_back(node.get<double>());
  };
  if (!doc.is_array()) throw Error(ErrorCode::kParseError, "stain basis must be a JSON array");
  for (const auto& item : doc) {
    if (item.is_array()) {
      if (item.size() != 3) throw Error(ErrorCode::kParseError, "stain basis rows must have 3 entries");
      for (const auto& v : item) collect(v);
    } else {
      collect(item);
    }
  }
  if (values.size() != 9) {
    throw Error(ErrorCode::kParseError,
                "stain basis needs 9 numbers, got " + std::to_string(values.size()));
  }
  return StainBasis(Eigen::Map<const Matrix3>(values.data()));
}

StainBasis StainBasis::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

ChannelSelector ChannelSelector::parse(std::string_view name) {
  const std::string key = upper(name);
  if (key == "H") return only(Stain::kHematoxylin);
  if (key == "E") return only(Stain::kEosin);
  if (key == "DAB") return only(Stain::kDab);
  if (key == "HE") return only(Stain::kHematoxylin).with(Stain::kEosin);
  if (key == "HDAB") return only(Stain::kHematoxylin).with(Stain::kDab);
  if (key == "ALL") return all();
  throw Error(ErrorCode::kInvalidArgument,
              "unknown channel '" + std::string(name) + "' (expected H, E, DAB, HE, HDAB or ALL)");
}

Matrix3 ChannelSelector::q() const {
  Matrix3 q = Matrix3::Zero();
  for (int i = 0; i < 3; ++i) q(i, i) = retains(static_cast<Stain>(i)) ? 1.0 : 0.0;
  return q;
}

std::string ChannelSelector::name() const {
  if (*this == all()) return "ALL";
  std::string out;
  if (retains(Stain::kHematoxylin)) out += "H";
  if (retains(Stain::kEosin)) out += "E";
  if (retains(Stain::kDab)) out += "DAB";
  return out.empty() ? "NONE" : out;
}

Matrix3 projection_matrix(const StainBasis& basis, ChannelSelector sel) {
  return basis.p_inv() * sel.q() * basis.p();
}

HedImage rgb_to_hed(const RgbImage& img, const StainBasis& basis, double eps) {
  check_eps(eps);
  return map_pixels<detail::FinitePolicy>(img, basis.p_inv(), clamped_log(eps), kIdentity);
}

LinearRgbImage hed_to_rgb_unclipped(const HedImage& hed, const StainBasis& basis) {
  return map_pixels<detail::UnclippedPolicy>(hed, basis.p(), kIdentity, kExp);
}

RgbImage hed_to_rgb(const HedImage& hed, const StainBasis& basis) {
  return map_pixels<detail::UnitIntervalPolicy>(hed, basis.p(), kIdentity, kExpClipped);
}

LinearRgbImage isolate_channel_unclipped(const RgbImage& img, ChannelSelector sel,
                                         const StainBasis& basis, double eps) {
  if (sel.empty()) throw Error(ErrorCode::kInvalidArgument, "channel selector retains no stain");
  check_eps(eps);
  return map_pixels<detail::UnclippedPolicy>(img, projection_matrix(basis, sel), clamped_log(eps),
                                             kExp);
}

RgbImage isolate_channel(const RgbImage& img, ChannelSelector sel, const StainBasis& basis,
                         double eps) {
  if (sel.empty()) throw Error(ErrorCode::kInvalidArgument, "channel selector retains no stain");
  check_eps(eps);
  return map_pixels<detail::UnitIntervalPolicy>(img, projection_matrix(basis, sel),
                                                clamped_log(eps), kExpClipped);
}

RgbImage destain(const RgbImage& img) {
  return isolate_channel(img, ChannelSelector::only(Stain::kHematoxylin));
}

RgbImage extract_dab(const RgbImage& img) {
  return isolate_channel(img, ChannelSelector::only(Stain::kDab));
}

}  // namespace stainkit
