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

#include "stainkit/report.hpp"

#include <cmath>
#include <cstdio>

namespace stainkit::report {

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json optional_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void write(const nlohmann::json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      // nlohmann's default object is a std::map, so iteration is sorted.
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        write(item, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        write(v[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : nlohmann::json(format_double(d)).dump();
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0.0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", kSignificantDigits, v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write(value, out);
  return out;
}

nlohmann::json to_json(const MetricReport& report) {
  return {{"ssim", report.ssim}, {"psnr_db", number_or_inf(report.psnr_db)}, {"mae", report.mae}};
}

nlohmann::json to_json(const LossBreakdown& b) {
  const auto& c = b.components;
  const auto& w = b.weights;
  return {
      {"total", b.total},
      {"stain", b.stain},
      {"content", b.content},
      {"h", optional_value(c.h)},
      {"dab", optional_value(c.dab)},
      {"ssim", optional_value(c.ssim)},
      {"mae", optional_value(c.mae)},
      {"cmp", optional_value(c.cmp)},
      {"level", optional_value(c.level)},
      {"gan", optional_value(c.gan)},
      {"weights",
       {{"stain", w.stain},
        {"content", w.content},
        {"level", w.level},
        {"gan", w.gan},
        {"h", w.h},
        {"dab", w.dab},
        {"ssim", w.ssim},
        {"mae", w.mae},
        {"cmp", w.cmp}}},
  };
}

nlohmann::json accuracy_report(const std::map<std::size_t, double>& topk, std::size_t knn_k,
                               double knn_accuracy) {
  nlohmann::json top = nlohmann::json::object();
  for (const auto& [k, acc] : topk) top[std::to_string(k)] = acc;
  return {{"topk", top}, {"knn", {{"k", knn_k}, {"accuracy", knn_accuracy}}}};
}

}  // namespace stainkit::report
