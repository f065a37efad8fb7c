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

#include "stainkit/nn.hpp"

#include <cmath>
#include <string>

#include "stainkit/error.hpp"

namespace stainkit {

void ModConvParams::validate() const {
  const auto& d = kernel.weight.dims();
  if (d[0] == 0 || d[1] == 0) throw Error(ErrorCode::kInvalidArgument, "empty convolution kernel");
  if (d[2] % 2 == 0 || d[3] % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "kernel spatial dims must be odd");
  }
  if (style.size() != d[1]) {
    throw Error(ErrorCode::kDimensionMismatch, "style length " + std::to_string(style.size()) +
                                                   " != input channels " + std::to_string(d[1]));
  }
  for (double s : style) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "non-finite style value");
  }
  if (kernel.bias && kernel.bias->size() != d[0]) {
    throw Error(ErrorCode::kDimensionMismatch, "bias length must equal output channels");
  }
  if (!(kernel.eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "demodulation eps must be positive");
}

namespace nn {

Tensor4 demodulate_weights(const ModConvParams& params) {
  params.validate();
  const auto& d = params.kernel.weight.dims();
  const auto w = params.kernel.weight.data();
  const std::size_t per_out = d[1] * d[2] * d[3];
  const std::size_t taps = d[2] * d[3];

  std::vector<double> out(w.size());
  for (std::size_t o = 0; o < d[0]; ++o) {
    double sum_sq = 0.0;
    for (std::size_t j = 0; j < per_out; ++j) {
      const std::size_t i = o * per_out + j;
      out[i] = w[i] * (params.style[j / taps] + 1.0);
      sum_sq += out[i] * out[i];
    }
    const double scale = 1.0 / std::sqrt(sum_sq + params.kernel.eps);
    for (std::size_t j = 0; j < per_out; ++j) out[o * per_out + j] *= scale;
  }
  return Tensor4(d, std::move(out));
}

Tensor4 mod_conv2d(const Tensor4& x, const ModConvParams& params) {
  const Tensor4 kernel = demodulate_weights(params);
  const auto& kd = kernel.dims();
  const auto& xd = x.dims();
  if (xd[1] != kd[1]) {
    throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(xd[1]) +
                                                   " channels, kernel expects " + std::to_string(kd[1]));
  }
  if (xd[2] < kd[2] || xd[3] < kd[3]) {
    throw Error(ErrorCode::kInvalidArgument, "input spatial dims smaller than the kernel");
  }

  const std::size_t batch = xd[0], in_ch = xd[1], h = xd[2], w = xd[3];
  const std::size_t out_ch = kd[0], kh = kd[2], kw = kd[3];
  const auto pad_y = static_cast<std::ptrdiff_t>(kh / 2);
  const auto pad_x = static_cast<std::ptrdiff_t>(kw / 2);
  const auto xs = x.data();
  const auto ks = kernel.data();

  std::vector<double> out(batch * out_ch * h * w);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      const double b = params.kernel.bias ? (*params.kernel.bias)[o] : 0.0;
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          double acc = 0.0;
          for (std::size_t i = 0; i < in_ch; ++i) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const auto sy = static_cast<std::ptrdiff_t>(y + ky) - pad_y;
              if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const auto sx = static_cast<std::ptrdiff_t>(xx + kx) - pad_x;
                if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
                acc += ks[((o * in_ch + i) * kh + ky) * kw + kx] *
                       xs[x.index(n, i, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx))];
              }
            }
          }
          out[((n * out_ch + o) * h + y) * w + xx] = acc + b;
        }
      }
    }
  }
  return Tensor4({batch, out_ch, h, w}, std::move(out));
}

Tensor4 simam_gate(const Tensor4& x, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "SimAM lambda must be positive");
  const auto& d = x.dims();
  const std::size_t plane = d[2] * d[3];
  if (plane < 2) throw Error(ErrorCode::kInvalidArgument, "SimAM needs at least 2 pixels per plane");

  const auto xs = x.data();
  std::vector<double> gate(xs.size());
  for (std::size_t base = 0; base < xs.size(); base += plane) {
    double mean = 0.0;
    for (std::size_t i = 0; i < plane; ++i) mean += xs[base + i];
    mean /= static_cast<double>(plane);
    double ss = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      const double dev = xs[base + i] - mean;
      ss += dev * dev;
    }
    const double denom = 4.0 * (ss / static_cast<double>(plane - 1) + lambda);
    for (std::size_t i = 0; i < plane; ++i) {
      const double dev = xs[base + i] - mean;
      const double energy = dev * dev / denom + 0.5;
      gate[base + i] = 1.0 / (1.0 + std::exp(-energy));
    }
  }
  return Tensor4(d, std::move(gate));
}

Tensor4 simam(const Tensor4& x, double lambda) {
  const Tensor4 gate = simam_gate(x, lambda);
  const auto xs = x.data();
  const auto gs = gate.data();
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] * gs[i];
  return Tensor4(x.dims(), std::move(out));
}

Tensor4 leaky_relu(const Tensor4& x, double negative_slope) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) {
    if (v < 0.0) v *= negative_slope;
  }
  return Tensor4(x.dims(), std::move(out));
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  if (a.dims() != b.dims()) throw Error(ErrorCode::kDimensionMismatch, "tensor shapes differ");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return Tensor4(a.dims(), std::move(out));
}

Tensor4 fusion_block_forward(const Tensor4& x, std::span<const double> style,
                             const FusionBlock& block) {
  const std::vector<double> s(style.begin(), style.end());
  const ModConvParams first{block.first, s};
  const ModConvParams second{block.second, s};
  const auto& xd = x.dims();
  if (block.first.weight.dim(0) != xd[1] || block.second.weight.dim(0) != xd[1]) {
    throw Error(ErrorCode::kDimensionMismatch,
                "fusion block convolutions must preserve the channel count for the residual");
  }
  const Tensor4 branch = leaky_relu(mod_conv2d(leaky_relu(mod_conv2d(x, first)), second));
  return add(simam(branch, block.lambda), x);
}

}  // namespace nn
}  // namespace stainkit
