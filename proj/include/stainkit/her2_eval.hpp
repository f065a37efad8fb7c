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
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace stainkit {

/// HER2 expression level 0, 1+, 2+, 3+ encoded 0..3.
using Her2Level = int;

struct FeatureRecord {
  std::string id;
  Her2Level label = 0;
  std::vector<double> vector;
};

struct Neighbor {
  std::string id;
  Her2Level label = 0;
  double distance = 0.0;
};

/// Immutable set of labelled embeddings with a common dimension and unique
/// ids.
class FeatureLibrary {
 public:
  explicit FeatureLibrary(std::vector<FeatureRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const FeatureRecord> records() const noexcept { return records_; }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::vector<FeatureRecord> records_;
  std::vector<double> norms_;
  std::size_t dimension_ = 0;
};

namespace her2 {

/// Parses `id,label,f0,...,f{d-1}` rows after a header line. Validates
/// labels, dimension consistency, id uniqueness and non-zero vectors.
std::vector<FeatureRecord> parse_feature_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path);
FeatureLibrary load_feature_library(const std::filesystem::path& path);

/// 1 - cosine similarity, clamped to [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// The k closest records by cosine distance, ascending, ties by ascending id.
std::vector<Neighbor> nearest_neighbors(const FeatureLibrary& lib, std::span<const double> query,
                                        std::size_t k);

/// Fraction of queries whose k nearest records contain the query's label,
/// for each k.
std::map<std::size_t, double> topk_accuracy(const FeatureLibrary& lib,
                                            std::span<const FeatureRecord> queries,
                                            std::span<const std::size_t> ks);

/// Majority label of the k nearest records. Ties go to the smaller summed
/// distance, then the smaller label.
Her2Level knn_classify(const FeatureLibrary& lib, std::span<const double> query, std::size_t k);

double knn_accuracy(const FeatureLibrary& lib, std::span<const FeatureRecord> queries,
                    std::size_t k);

}  // namespace her2
}  // namespace stainkit
