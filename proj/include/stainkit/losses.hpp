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
#include <optional>
#include <span>
#include <vector>

#include "stainkit/image.hpp"
#include "stainkit/metrics.hpp"
#include "stainkit/stain.hpp"

namespace stainkit {

inline constexpr std::size_t kHer2Levels = 4;

/// Weights of the two-level loss hierarchy. Defaults are the published
/// training constants.
struct LossWeights {
  double stain = 2.0;
  double content = 13.0;
  double level = 5.0;
  double gan = 1.0;
  double h = 1.0;
  double dab = 1.0;
  double ssim = 1.0;
  double mae = 10.0;
  double cmp = 2.0;

  void validate() const;
};

/// Unweighted component losses. A missing component contributes nothing to
/// the total.
struct LossComponents {
  std::optional<double> h;
  std::optional<double> dab;
  std::optional<double> ssim;
  std::optional<double> mae;
  std::optional<double> cmp;
  std::optional<double> level;
  std::optional<double> gan;
};

struct LossBreakdown {
  double total = 0.0;
  double stain = 0.0;
  double content = 0.0;
  LossComponents components;
  LossWeights weights;
};

struct VectorLoss {
  double value = 0.0;
  std::vector<double> grad_a;
  std::vector<double> grad_b;
};

struct FocalLoss {
  double value = 0.0;
  std::vector<double> grad_probs;
};

enum class GanMode { kLeastSquares, kBinaryCrossEntropy };

namespace loss {

/// 1 - cos(a, b) with analytic gradients for both arguments. Zero-norm
/// inputs are rejected.
VectorLoss cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Mean absolute difference; grad_a = sign(a - b) / N with sign(0) = 0.
/// grad_b is left empty.
VectorLoss l1(std::span<const double> a, std::span<const double> b);

/// 1 - SSIM(a, b). Value only.
double ssim_loss(const RgbImage& a, const RgbImage& b, const SsimParams& params = {});

/// L1 between the DAB renderings of the generated and reference images.
double dab_loss(const RgbImage& generated, const RgbImage& reference,
                const StainBasis& basis = StainBasis::standard(), double eps = kDefaultOdEpsilon);

/// -alpha (1 - p_t)^gamma log p_t over a probability vector of HER2 levels.
FocalLoss focal(std::span<const double> probs, std::size_t target, double alpha = 1.0,
                double gamma = 2.0);

/// Mean per-patch adversarial objective against the label real (1) or
/// fake (0).
double patch_gan(std::span<const double> scores, bool target_is_real,
                 GanMode mode = GanMode::kLeastSquares);

/// Mean of the patch losses at the two discriminator scales.
double multiscale_gan(double loss_512, double loss_256);

LossBreakdown overall(const LossComponents& components, const LossWeights& weights = {});

LossBreakdown overall(double h, double dab, double ssim, double mae, double cmp, double level,
                      double gan, const LossWeights& weights = {});

}  // namespace loss
}  // namespace stainkit
