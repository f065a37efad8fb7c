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

#include <optional>
#include <span>
#include <vector>

#include "stainkit/tensor.hpp"

namespace stainkit {

inline constexpr double kDemodEpsilon = 1e-8;
inline constexpr double kSimamLambda = 1e-4;
inline constexpr double kLeakySlope = 0.2;

/// Convolution weights shared by every call of a modulated layer.
struct ConvKernel {
  Tensor4 weight;                      ///< (out_ch, in_ch, kh, kw), odd kh and kw
  std::optional<std::vector<double>> bias;  ///< one entry per output channel
  double eps = kDemodEpsilon;
};

/// A kernel plus the per-input-channel style vector that modulates it.
struct ModConvParams {
  ConvKernel kernel;
  std::vector<double> style;

  void validate() const;
};

/// Two modulated convolutions followed by SimAM, wrapped in a residual.
struct FusionBlock {
  ConvKernel first;
  ConvKernel second;
  double lambda = kSimamLambda;
};

namespace nn {

/// W * (s + 1) scaled per output channel by 1 / sqrt(sum over
/// (in_ch, kh, kw) of the modulated weights squared + eps).
Tensor4 demodulate_weights(const ModConvParams& params);

/// Stride-1, zero-padded "same" cross-correlation with the demodulated
/// kernel, plus bias.
Tensor4 mod_conv2d(const Tensor4& x, const ModConvParams& params);

/// Parameter-free attention: x * sigmoid((x - mu)^2 / (4 (v + lambda)) + 0.5)
/// per channel plane, with v = sum (x - mu)^2 / (n - 1).
Tensor4 simam(const Tensor4& x, double lambda = kSimamLambda);

/// The multiplicative gate simam() applies to each element.
Tensor4 simam_gate(const Tensor4& x, double lambda = kSimamLambda);

Tensor4 leaky_relu(const Tensor4& x, double negative_slope = kLeakySlope);

Tensor4 add(const Tensor4& a, const Tensor4& b);

/// simam(lrelu(modconv(lrelu(modconv(x, first)), second))) + x, both
/// convolutions modulated by `style`.
Tensor4 fusion_block_forward(const Tensor4& x, std::span<const double> style,
                             const FusionBlock& block);

}  // namespace nn
}  // namespace stainkit
