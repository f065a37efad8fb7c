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

#include "stainkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stainkit/error.hpp"
#include "stainkit/stain.hpp"

namespace stainkit {

void LossWeights::validate() const {
  for (double w : {stain, content, level, gan, h, dab, ssim, mae, cmp}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "loss weights must be finite and non-negative");
    }
  }
}

namespace loss {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " elements");
  }
  if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "empty input");
}

double weighted(double w, const std::optional<double>& v) { return v ? w * *v : 0.0; }

}  // namespace

VectorLoss cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::kZeroNorm, "cosine loss of a zero vector");

  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  const double cos = dot / (na * nb);

  // d(1 - cos)/da = -(b / (|a||b|) - cos * a / |a|^2), symmetric for b.
  VectorLoss out;
  out.value = 1.0 - std::clamp(cos, -1.0, 1.0);
  out.grad_a.resize(a.size());
  out.grad_b.resize(b.size());
  const double inv_ab = 1.0 / (na * nb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.grad_a[i] = -(b[i] * inv_ab - cos * a[i] / aa);
    out.grad_b[i] = -(a[i] * inv_ab - cos * b[i] / bb);
  }
  return out;
}

VectorLoss l1(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  const double n = static_cast<double>(a.size());
  VectorLoss out;
  out.grad_a.resize(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += std::abs(d);
    out.grad_a[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  out.value = sum / n;
  return out;
}

double ssim_loss(const RgbImage& a, const RgbImage& b, const SsimParams& params) {
  return 1.0 - metrics::ssim(a, b, params);
}

double dab_loss(const RgbImage& generated, const RgbImage& reference, const StainBasis& basis,
                double eps) {
  if (!generated.same_shape(reference)) {
    throw Error(ErrorCode::kDimensionMismatch, "DAB loss inputs differ in size");
  }
  const auto dab = ChannelSelector::only(Stain::kDab);
  return l1(isolate_channel(generated, dab, basis, eps).data(),
            isolate_channel(reference, dab, basis, eps).data())
      .value;
}

FocalLoss focal(std::span<const double> probs, std::size_t target, double alpha, double gamma) {
  if (probs.size() != kHer2Levels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "focal loss expects " + std::to_string(kHer2Levels) + " probabilities");
  }
  if (target >= probs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "target level " + std::to_string(target) + " out of range");
  }
  if (!(gamma >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "focal loss needs finite alpha and gamma >= 0");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "probabilities must lie in (0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities must sum to 1");
  }

  const double pt = probs[target];
  const double q = 1.0 - pt;
  const double log_pt = std::log(pt);

  FocalLoss out;
  out.value = -alpha * std::pow(q, gamma) * log_pt;
  // d/dp [-alpha q^gamma log p] = alpha gamma q^(gamma-1) log p - alpha q^gamma / p.
  // The first term vanishes for gamma = 0 and tends to 0 as p -> 1.
  const double modulating = (gamma == 0.0 || q == 0.0) ? 0.0 : gamma * std::pow(q, gamma - 1.0) * log_pt;
  out.grad_probs.assign(probs.size(), 0.0);
  out.grad_probs[target] = alpha * modulating - alpha * std::pow(q, gamma) / pt;
  if (out.value == 0.0) out.value = 0.0;  // normalize -0
  return out;
}

double patch_gan(std::span<const double> scores, bool target_is_real, GanMode mode) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "empty discriminator score map");
  const double t = target_is_real ? 1.0 : 0.0;
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "non-finite discriminator score");
    if (mode == GanMode::kLeastSquares) {
      sum += (s - t) * (s - t);
    } else {
      if (!(s > 0.0 && s < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "BCE scores must lie in (0, 1)");
      }
      sum += -(t * std::log(s) + (1.0 - t) * std::log(1.0 - s));
    }
  }
  return sum / static_cast<double>(scores.size());
}

double multiscale_gan(double loss_512, double loss_256) {
  if (!std::isfinite(loss_512) || !std::isfinite(loss_256)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite GAN loss");
  }
  return (loss_512 + loss_256) / 2.0;
}

LossBreakdown overall(const LossComponents& c, const LossWeights& w) {
  w.validate();
  for (const auto* v : {&c.h, &c.dab, &c.ssim, &c.mae, &c.cmp, &c.level, &c.gan}) {
    if (*v && !std::isfinite(**v)) throw Error(ErrorCode::kInvalidArgument, "non-finite loss component");
  }
  LossBreakdown out;
  out.components = c;
  out.weights = w;
  out.stain = weighted(w.h, c.h) + weighted(w.dab, c.dab);
  out.content = weighted(w.ssim, c.ssim) + weighted(w.mae, c.mae) + weighted(w.cmp, c.cmp);
  out.total = w.stain * out.stain + w.content * out.content + weighted(w.level, c.level) +
              weighted(w.gan, c.gan);
  return out;
}

LossBreakdown overall(double h, double dab, double ssim, double mae, double cmp, double level,
                      double gan, const LossWeights& weights) {
  return overall(LossComponents{h, dab, ssim, mae, cmp, level, gan}, weights);
}

}  // namespace loss
}  // namespace stainkit
