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

#include "stainkit/her2_eval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string_view>

#include "stainkit/error.hpp"

namespace stainkit {

namespace {

constexpr int kLevels = 4;

double l2_norm(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void malformed(const std::string& source, std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kParseError, source + ":" + std::to_string(line_no) + ": " + why);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void require_query(const FeatureLibrary& lib, std::span<const double> query, std::size_t k) {
  if (query.size() != lib.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                   " != library dimension " +
                                                   std::to_string(lib.dimension()));
  }
  if (k == 0 || k > lib.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k = " + std::to_string(k) + " outside 1.." +
                                                 std::to_string(lib.size()));
  }
}

}  // namespace

FeatureLibrary::FeatureLibrary(std::vector<FeatureRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw Error(ErrorCode::kInvalidArgument, "feature library is empty");
  dimension_ = records_.front().vector.size();
  std::set<std::string_view> ids;
  norms_.reserve(records_.size());
  for (const auto& r : records_) {
    if (r.vector.size() != dimension_ || dimension_ == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "record '" + r.id + "' has dimension " +
                                                     std::to_string(r.vector.size()));
    }
    if (r.label < 0 || r.label >= kLevels) {
      throw Error(ErrorCode::kInvalidArgument, "record '" + r.id + "' has label outside 0..3");
    }
    if (!ids.insert(r.id).second) throw Error(ErrorCode::kInvalidArgument, "duplicate id '" + r.id + "'");
    if (!std::all_of(r.vector.begin(), r.vector.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::kInvalidArgument, "record '" + r.id + "' has a non-finite feature");
    }
    const double n = l2_norm(r.vector);
    if (n == 0.0) throw Error(ErrorCode::kZeroNorm, "record '" + r.id + "' is the zero vector");
    norms_.push_back(n);
  }
}

namespace her2 {

std::vector<FeatureRecord> parse_feature_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dimension = 0;
  bool have_header = false;
  std::vector<FeatureRecord> records;
  std::set<std::string> ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "id" || fields[1] != "label") {
        malformed(source, line_no, "header must read id,label,f0,...");
      }
      for (std::size_t i = 2; i < fields.size(); ++i) {
        if (fields[i] != "f" + std::to_string(i - 2)) {
          malformed(source, line_no, "feature column " + std::to_string(i - 2) + " must be named f" +
                                         std::to_string(i - 2));
        }
      }
      dimension = fields.size() - 2;
      have_header = true;
      continue;
    }
    if (fields.size() != dimension + 2) {
      malformed(source, line_no, "expected " + std::to_string(dimension + 2) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    FeatureRecord r;
    r.id = std::string(fields[0]);
    if (r.id.empty()) malformed(source, line_no, "empty id");
    if (!parse_number(fields[1], r.label)) malformed(source, line_no, "label is not an integer");
    if (r.label < 0 || r.label >= kLevels) malformed(source, line_no, "label outside 0..3");
    if (!ids.insert(r.id).second) malformed(source, line_no, "duplicate id '" + r.id + "'");
    r.vector.resize(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
      if (!parse_number(fields[i + 2], r.vector[i]) || !std::isfinite(r.vector[i])) {
        malformed(source, line_no, "feature f" + std::to_string(i) + " is not a finite number");
      }
    }
    if (l2_norm(r.vector) == 0.0) malformed(source, line_no, "zero feature vector");
    records.push_back(std::move(r));
  }
  if (!have_header) malformed(source, line_no, "missing header");
  if (records.empty()) malformed(source, line_no, "no records");
  return records;
}

std::vector<FeatureRecord> load_feature_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_feature_csv(in, path.string());
}

FeatureLibrary load_feature_library(const std::filesystem::path& path) {
  return FeatureLibrary(load_feature_records(path));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "vector sizes differ");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroNorm, "cosine distance of a zero vector");
  return std::clamp(1.0 - dot / (na * nb), 0.0, 2.0);
}

std::vector<Neighbor> nearest_neighbors(const FeatureLibrary& lib, std::span<const double> query,
                                        std::size_t k) {
  require_query(lib, query, k);
  const double qn = l2_norm(query);
  if (qn == 0.0) throw Error(ErrorCode::kZeroNorm, "query is the zero vector");

  std::vector<Neighbor> all;
  all.reserve(lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const auto& r = lib[i];
    double dot = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) dot += query[j] * r.vector[j];
    all.push_back({r.id, r.label, std::clamp(1.0 - dot / (qn * lib.norm(i)), 0.0, 2.0)});
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

std::map<std::size_t, double> topk_accuracy(const FeatureLibrary& lib,
                                            std::span<const FeatureRecord> queries,
                                            std::span<const std::size_t> ks) {
  if (queries.empty()) throw Error(ErrorCode::kInvalidArgument, "no queries");
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values");
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());

  std::map<std::size_t, std::size_t> hits;
  for (std::size_t k : ks) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    hits[k] = 0;
  }
  for (const auto& q : queries) {
    const auto neighbors = nearest_neighbors(lib, q.vector, k_max);
    // Rank of the first neighbor carrying the query's label.
    std::size_t first_hit = neighbors.size();
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      if (neighbors[i].label == q.label) {
        first_hit = i;
        break;
      }
    }
    for (auto& [k, count] : hits) {
      if (first_hit < k) ++count;
    }
  }
  std::map<std::size_t, double> out;
  for (const auto& [k, count] : hits) {
    out[k] = static_cast<double>(count) / static_cast<double>(queries.size());
  }
  return out;
}

Her2Level knn_classify(const FeatureLibrary& lib, std::span<const double> query, std::size_t k) {
  const auto neighbors = nearest_neighbors(lib, query, k);
  std::array<std::size_t, kLevels> votes{};
  std::array<double, kLevels> distance_sum{};
  for (const auto& n : neighbors) {
    ++votes[static_cast<std::size_t>(n.label)];
    distance_sum[static_cast<std::size_t>(n.label)] += n.distance;
  }
  std::size_t best = 0;
  for (std::size_t level = 1; level < kLevels; ++level) {
    if (votes[level] > votes[best] ||
        (votes[level] == votes[best] && distance_sum[level] < distance_sum[best])) {
      best = level;
    }
  }
  return static_cast<Her2Level>(best);
}

double knn_accuracy(const FeatureLibrary& lib, std::span<const FeatureRecord> queries,
                    std::size_t k) {
  if (queries.empty()) throw Error(ErrorCode::kInvalidArgument, "no queries");
  std::size_t correct = 0;
  for (const auto& q : queries) {
    if (knn_classify(lib, q.vector, k) == q.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(queries.size());
}

}  // namespace her2
}  // namespace stainkit
