// Copyright 2026 The mwtee Authors
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
#include <string>
#include <vector>

#include <json.hpp>

#include "mwtee/kernel/config.hpp"
#include "mwtee/sim/cost_model.hpp"
#include "mwtee/sim/metrics.hpp"

namespace mwtee::cli {

inline constexpr std::string_view kToolName = "mwtee";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ReportFormat { Json, Csv };

// One simulated configuration; a sweep produces several.
struct ReportPoint {
    double tick_us = 0;
    sim::MetricsReport metrics;
};

struct ReportFile {
    std::string tool = std::string(kToolName);
    std::string version = std::string(kToolVersion);
    std::string scenario;  // empty for --config runs
    nlohmann::json config;
    sim::CostModel cost;
    std::vector<ReportPoint> points;
    bool sweep = false;
};

nlohmann::json metrics_to_json(const sim::MetricsReport& m);
sim::MetricsReport metrics_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const ReportFile& report);
ReportFile report_from_json(const nlohmann::json& j);

// JSON with sorted keys, integers for cycles and six fractional digits for
// every non-integer number.
std::string dump_json(const nlohmann::json& j);

// kind,subject,metric,value rows, prefixed by the tick of the point.
std::string emit_csv(const ReportFile& report);

std::string emit_report(const ReportFile& report, ReportFormat format);

}  // namespace mwtee::cli
