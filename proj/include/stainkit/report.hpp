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
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "stainkit/losses.hpp"
#include "stainkit/metrics.hpp"

namespace stainkit::report {

/// Significant digits used for every floating-point value in reports.
inline constexpr int kSignificantDigits = 9;

/// Compact JSON with sorted keys and floats printed with 9 significant
/// digits. Non-finite floats become the strings "inf" / "-inf" / "nan".
std::string canonical_json(const nlohmann::json& value);

std::string format_double(double v);

/// {"mae": x, "psnr_db": x | "inf", "ssim": x}
nlohmann::json to_json(const MetricReport& report);

/// Flat component values (null when not supplied), the stain / content
/// subtotals, the total and the weights used.
nlohmann::json to_json(const LossBreakdown& breakdown);

/// {"knn": {"accuracy": x, "k": k}, "topk": {"1": x, ...}}
nlohmann::json accuracy_report(const std::map<std::size_t, double>& topk, std::size_t knn_k,
                               double knn_accuracy);

}  // namespace stainkit::report
