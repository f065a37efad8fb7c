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

#include "stainkit/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "stainkit/error.hpp"

namespace stainkit {

Tensor4::Tensor4(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  const std::size_t expected =
      std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  if (data_.size() != expected) {
    throw Error(ErrorCode::kDimensionMismatch, "tensor data length " + std::to_string(data_.size()) +
                                                   " != product of dims " + std::to_string(expected));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "tensor holds a non-finite value");
  }
}

Tensor4 Tensor4::zeros(Dims dims) {
  const std::size_t n = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  return Tensor4(dims, std::vector<double>(n, 0.0));
}

}  // namespace stainkit
