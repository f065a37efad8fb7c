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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stainkit/error.hpp"
#include "stainkit/nn.hpp"

namespace stainkit {
namespace {

Tensor4 filled(Tensor4::Dims dims, double v) {
  return Tensor4(dims, std::vector<double>(dims[0] * dims[1] * dims[2] * dims[3], v));
}

/// Kernel whose centre tap copies input channel c to output channel c.
Tensor4 identity_kernel(std::size_t channels, std::size_t k) {
  std::vector<double> w(channels * channels * k * k, 0.0);
  for (std::size_t c = 0; c < channels; ++c) w[((c * channels + c) * k + k / 2) * k + k / 2] = 1.0;
  return Tensor4({channels, channels, k, k}, std::move(w));
}

void expect_near(const Tensor4& a, const Tensor4& b, double tol) {
  ASSERT_EQ(a.dims(), b.dims());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a.data()[i], b.data()[i], tol) << "at " << i;
}

TEST(DemodulateTest, AllOnesKernel) {
  ModConvParams p{{filled({1, 1, 3, 3}, 1.0), std::nullopt}, {0.0}};
  const Tensor4 w = nn::demodulate_weights(p);
  for (double v : w.data()) EXPECT_NEAR(v, 1.0 / std::sqrt(9.0 + 1e-8), 1e-15);
  p.style = {2.0};
  const Tensor4 w3 = nn::demodulate_weights(p);
  for (double v : w3.data()) EXPECT_NEAR(v, 3.0 / std::sqrt(81.0 + 1e-8), 1e-15);
}

TEST(DemodulateTest, StyleMinusOneZeroesKernel) {
  std::mt19937_64 rng(31);
  ModConvParams p{{oracle::random_tensor(rng, {2, 3, 3, 3}), std::nullopt}, {-1.0, -1.0, -1.0}};
  const Tensor4 w = nn::demodulate_weights(p);
  for (double v : w.data()) EXPECT_EQ(v, 0.0);
}

TEST(DemodulateTest, UnitNormPerOutputChannel) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t out = 1 + trial % 4, in = 1 + trial % 3, k = (trial % 2) ? 3 : 1;
    std::vector<double> style(in);
    // Keep s + 1 away from 0: the norm is sqrt(S / (S + eps)), so a nearly
    // silenced kernel would measure eps rather than the normalisation.
    for (double& s : style) do s = n(rng); while (std::abs(s + 1.0) < 0.1);
    ModConvParams p{{oracle::random_tensor(rng, {out, in, k, k}), std::nullopt}, style};
    const Tensor4 w = nn::demodulate_weights(p);
    for (std::size_t o = 0; o < out; ++o) {
      double sq = 0.0;
      for (std::size_t i = 0; i < in; ++i)
        for (std::size_t y = 0; y < k; ++y)
          for (std::size_t x = 0; x < k; ++x) sq += w.at(o, i, y, x) * w.at(o, i, y, x);
      EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
  }
}

TEST(ModConvTest, MatchesNaiveReference) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t batch = 1; batch <= 2; ++batch)
    for (std::size_t in = 1; in <= 4; ++in)
      for (std::size_t out : {1, 3})
        for (std::size_t k : {1, 3, 5})
          for (std::size_t side : {1, 5, 8}) {
            if (side < k) continue;
            const Tensor4 x = oracle::random_tensor(rng, {batch, in, side, side + 1});
            const Tensor4 w = oracle::random_tensor(rng, {out, in, k, k});
            std::vector<double> style(in), bias(out);
            for (double& s : style) s = n(rng);
            for (double& b : bias) b = n(rng);
            ModConvParams p{{w, bias}, style};
            expect_near(nn::mod_conv2d(x, p), oracle::naive_mod_conv(x, w, bias, style, kDemodEpsilon),
                        1e-10);
          }
}

TEST(ModConvTest, IdentityKernelPassesInputThrough) {
  std::mt19937_64 rng(34);
  const Tensor4 x = oracle::random_tensor(rng, {2, 3, 6, 5});
  ModConvParams p{{identity_kernel(3, 3), std::nullopt}, {0.0, 0.0, 0.0}};
  expect_near(nn::mod_conv2d(x, p), x, 1e-7);
}

TEST(ModConvTest, ScaledScalarKernelIsIdentity) {
  std::mt19937_64 rng(40);
  const Tensor4 x = oracle::random_tensor(rng, {1, 1, 4, 5});
  ModConvParams p{{filled({1, 1, 1, 1}, 3.0), std::vector<double>{0.0}}, {0.0}};
  expect_near(nn::mod_conv2d(x, p), x, 1e-7);
}

TEST(ModConvTest, ValidationErrors) {
  const Tensor4 x = filled({1, 2, 4, 4}, 0.5);
  EXPECT_THROW(nn::mod_conv2d(x, {{filled({1, 2, 2, 2}, 1.0), std::nullopt}, {0.0, 0.0}}), Error);
  EXPECT_THROW(nn::mod_conv2d(x, {{filled({1, 2, 3, 3}, 1.0), std::nullopt}, {0.0}}), Error);
  EXPECT_THROW(nn::mod_conv2d(x, {{filled({1, 3, 3, 3}, 1.0), std::nullopt}, {0.0, 0.0, 0.0}}), Error);
  EXPECT_THROW(nn::mod_conv2d(x, {{filled({2, 2, 3, 3}, 1.0), std::vector<double>{1.0}}, {0.0, 0.0}}),
               Error);
}

TEST(SimamTest, ConstantPlaneGate) {
  const Tensor4 x = filled({1, 2, 4, 4}, 0.7);
  const Tensor4 gate = nn::simam_gate(x);
  for (double g : gate.data()) EXPECT_NEAR(g, oracle::sigmoid(0.5), 1e-9);
  EXPECT_NEAR(oracle::sigmoid(0.5), 0.62245933120185456464, 1e-15);
}

TEST(SimamTest, FrozenValues) {
  const Tensor4 x({1, 1, 2, 2}, {1.0, 1.0, 1.0, 3.0});
  const Tensor4 y = nn::simam(x, 1e-4);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(y.data()[i], 0.63702934948263688502, 1e-12);
  EXPECT_NEAR(y.data()[3], 2.229471819419887504, 1e-12);
}

TEST(SimamTest, GateBoundsAndSignPreservation) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor4 x = oracle::random_tensor(rng, {1 + trial % 2u, 1 + trial % 3u, 2 + trial % 5u, 3}, 2.0);
    const Tensor4 g = nn::simam_gate(x);
    const Tensor4 y = nn::simam(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_GE(g.data()[i], 0.62245933120185456464 - 1e-12);
      EXPECT_LE(g.data()[i], 1.0);
      if (x.data()[i] > 0) EXPECT_GT(y.data()[i], 0.0);
      if (x.data()[i] < 0) EXPECT_LT(y.data()[i], 0.0);
      if (x.data()[i] == 0) EXPECT_EQ(y.data()[i], 0.0);
    }
  }
}

TEST(SimamTest, GateIsEvenAroundPlaneMean) {
  std::mt19937_64 rng(36);
  const Tensor4 x = oracle::random_tensor(rng, {1, 2, 5, 5});
  std::vector<double> neg(x.data().begin(), x.data().end());
  for (double& v : neg) v = -v;
  expect_near(nn::simam_gate(Tensor4(x.dims(), neg)), nn::simam_gate(x), 1e-12);
}

TEST(SimamTest, SingleElementPlaneIsRejected) {
  EXPECT_THROW(nn::simam(filled({1, 1, 1, 1}, 1.0)), Error);
}

TEST(FusionBlockTest, ZeroWeightsGiveIdentity) {
  std::mt19937_64 rng(37);
  const Tensor4 x = oracle::random_tensor(rng, {1, 3, 5, 5});
  const FusionBlock block{{filled({3, 3, 3, 3}, 0.0), std::nullopt}, {filled({3, 3, 3, 3}, 0.0), std::nullopt}};
  const std::vector<double> style{0.1, 0.2, 0.3};
  expect_near(nn::fusion_block_forward(x, style, block), x, 1e-12);
}

TEST(FusionBlockTest, IdentityKernelsReduceToSimamPlusInput) {
  std::mt19937_64 rng(38);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v(2 * 3 * 6 * 6);
  for (double& e : v) e = u(rng);  // positive, so LeakyReLU is inert
  const Tensor4 x({2, 3, 6, 6}, v);
  const FusionBlock block{{identity_kernel(3, 3), std::nullopt}, {identity_kernel(3, 3), std::nullopt}};
  const std::vector<double> style{0.0, 0.0, 0.0};
  expect_near(nn::fusion_block_forward(x, style, block), nn::add(nn::simam(x), x), 1e-7);
}

TEST(FusionBlockTest, EqualsManualComposition) {
  std::mt19937_64 rng(39);
  const Tensor4 x = oracle::random_tensor(rng, {1, 4, 7, 6});
  const FusionBlock block{{oracle::random_tensor(rng, {4, 4, 3, 3}), std::vector<double>{.1, -.2, .3, 0}},
                          {oracle::random_tensor(rng, {4, 4, 3, 3}), std::nullopt}};
  const std::vector<double> style{0.5, -0.25, 1.0, 0.0};
  const Tensor4 h1 = nn::leaky_relu(nn::mod_conv2d(x, {block.first, style}));
  const Tensor4 h2 = nn::leaky_relu(nn::mod_conv2d(h1, {block.second, style}));
  EXPECT_EQ(nn::fusion_block_forward(x, style, block), nn::add(nn::simam(h2, block.lambda), x));
}

TEST(LeakyReluTest, Values) {
  const Tensor4 x({1, 1, 1, 3}, {-1.0, 0.0, 2.0});
  const Tensor4 y = nn::leaky_relu(x);
  EXPECT_EQ(y.data()[0], -0.2);
  EXPECT_EQ(y.data()[1], 0.0);
  EXPECT_EQ(y.data()[2], 2.0);
}

}  // namespace
}  // namespace stainkit
