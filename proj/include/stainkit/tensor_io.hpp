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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stainkit/nn.hpp"

namespace stainkit {

/// Named arrays stored in the flat weight container:
///
///   u64 little-endian   header length N
///   N bytes             UTF-8 JSON {"tensors": [{"name": s, "dims": [..]}, ...],
///                                   "meta": {..}}
///   payload             float64 little-endian values of each tensor, in
///                       header order, row-major
struct NamedArray {
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

struct TensorArchive {
  std::map<std::string, NamedArray> arrays;
  /// Insertion order, which is also the payload order on disk.
  std::vector<std::string> order;
  std::map<std::string, double> meta;

  void put(const std::string& name, NamedArray array);
  const NamedArray& get(const std::string& name) const;
  bool contains(const std::string& name) const { return arrays.count(name) != 0; }
};

TensorArchive read_tensor_archive(const std::filesystem::path& path);
void write_tensor_archive(const TensorArchive& archive, const std::filesystem::path& path);

/// Reads "first.weight", "second.weight", optional "first.bias" and
/// "second.bias", and optional meta "lambda" / "eps".
FusionBlock load_fusion_block(const std::filesystem::path& path);
void save_fusion_block(const FusionBlock& block, const std::filesystem::path& path);

}  // namespace stainkit
