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

#include "stainkit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>

#include "stainkit/error.hpp"

namespace stainkit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "the weight container reader assumes a little-endian host");

constexpr std::uint64_t kMaxHeaderBytes = 1u << 24;

std::size_t element_count(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Tensor4::Dims as_kernel_dims(const NamedArray& a, const std::string& name) {
  if (a.dims.size() != 4) throw Error(ErrorCode::kParseError, name + " must be 4-D");
  return {a.dims[0], a.dims[1], a.dims[2], a.dims[3]};
}

ConvKernel kernel_from(const TensorArchive& archive, const std::string& prefix, double eps) {
  const NamedArray& w = archive.get(prefix + ".weight");
  ConvKernel k{Tensor4(as_kernel_dims(w, prefix + ".weight"), w.values), std::nullopt, eps};
  if (archive.contains(prefix + ".bias")) k.bias = archive.get(prefix + ".bias").values;
  return k;
}

NamedArray array_from(const Tensor4& t) {
  return NamedArray{{t.dims().begin(), t.dims().end()}, {t.data().begin(), t.data().end()}};
}

}  // namespace

void TensorArchive::put(const std::string& name, NamedArray array) {
  if (element_count(array.dims) != array.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, name + ": dims do not match value count");
  }
  if (!contains(name)) order.push_back(name);
  arrays[name] = std::move(array);
}

const NamedArray& TensorArchive::get(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw Error(ErrorCode::kParseError, "weight archive lacks '" + name + "'");
  return it->second;
}

TensorArchive read_tensor_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());

  std::uint64_t header_len = 0;
  if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len)) || header_len == 0 ||
      header_len > kMaxHeaderBytes) {
    throw Error(ErrorCode::kParseError, path.string() + ": bad header length");
  }
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw Error(ErrorCode::kParseError, path.string() + ": truncated header");
  }

  TensorArchive archive;
  try {
    const auto doc = nlohmann::json::parse(header);
    for (const auto& entry : doc.at("tensors")) {
      NamedArray array;
      array.dims = entry.at("dims").get<std::vector<std::size_t>>();
      array.values.resize(element_count(array.dims));
      const auto bytes = static_cast<std::streamsize>(array.values.size() * sizeof(double));
      if (!in.read(reinterpret_cast<char*>(array.values.data()), bytes)) {
        throw Error(ErrorCode::kParseError, path.string() + ": truncated payload");
      }
      archive.put(entry.at("name").get<std::string>(), std::move(array));
    }
    if (doc.contains("meta")) archive.meta = doc["meta"].get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kParseError, path.string() + ": trailing bytes after payload");
  }
  return archive;
}

void write_tensor_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["tensors"] = nlohmann::json::array();
  for (const auto& name : archive.order) {
    doc["tensors"].push_back({{"name", name}, {"dims", archive.get(name).dims}});
  }
  if (!archive.meta.empty()) doc["meta"] = archive.meta;
  const std::string header = doc.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, path.string());
  const std::uint64_t header_len = header.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& name : archive.order) {
    const auto& values = archive.get(name).values;
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out.flush()) throw Error(ErrorCode::kUnwritablePath, path.string());
}

FusionBlock load_fusion_block(const std::filesystem::path& path) {
  const TensorArchive archive = read_tensor_archive(path);
  const auto meta = [&](const char* key, double fallback) {
    auto it = archive.meta.find(key);
    return it == archive.meta.end() ? fallback : it->second;
  };
  const double eps = meta("eps", kDemodEpsilon);
  return FusionBlock{kernel_from(archive, "first", eps), kernel_from(archive, "second", eps),
                     meta("lambda", kSimamLambda)};
}

void save_fusion_block(const FusionBlock& block, const std::filesystem::path& path) {
  TensorArchive archive;
  archive.put("first.weight", array_from(block.first.weight));
  if (block.first.bias) archive.put("first.bias", {{block.first.bias->size()}, *block.first.bias});
  archive.put("second.weight", array_from(block.second.weight));
  if (block.second.bias) archive.put("second.bias", {{block.second.bias->size()}, *block.second.bias});
  archive.meta["eps"] = block.first.eps;
  archive.meta["lambda"] = block.lambda;
  write_tensor_archive(archive, path);
}

}  // namespace stainkit
