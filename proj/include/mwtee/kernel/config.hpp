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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mwtee/hw/platform.hpp"

namespace mwtee::kernel {

using hw::Address;

// One SAU slot is reserved for the shared gateway region.
inline constexpr std::size_t kMaxWorldResources = hw::kSauRegionCount - 1;

enum class RegionKind : std::uint8_t { Code, Data };

struct MemRegionSpec {
    Address base = 0;
    std::uint32_t size = 0;
    RegionKind kind = RegionKind::Data;

    std::uint64_t end() const { return std::uint64_t{base} + size; }
    bool contains(Address addr) const { return addr >= base && addr < end(); }
};

struct IrqAssignment {
    std::uint32_t id = 0;
    std::uint8_t priority = 0;
};

// Named guest program plus its parameters; resolved by the guest module.
struct WorkloadSpec {
    std::string name = "busyloop";
    nlohmann::json params = nlohmann::json::object();
};

struct WorldConfig {
    std::string name;
    std::vector<MemRegionSpec> regions;
    std::vector<std::string> devices;
    std::vector<IrqAssignment> irqs;
    int priority = 0;  // preemptive mode only; lower = more urgent
    Address entry = 0;
    WorkloadSpec workload;

    bool owns_irq(std::uint32_t irq) const;
};

enum class SchedulerMode : std::uint8_t { RoundRobin, PriorityPreemptive };

std::string_view to_string(SchedulerMode mode);

struct SystemConfig {
    double tick_us = 10000.0;
    std::uint64_t cpu_hz = 40'000'000;
    SchedulerMode scheduler_mode = SchedulerMode::RoundRobin;
    hw::PlatformDescription platform;
    std::vector<WorldConfig> worlds;
    std::map<std::string, std::uint64_t> cost_overrides;

    // tick x cpu_hz / 10^6.
    std::uint64_t tick_cycles() const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Keys accepted under "cost_model".
const std::vector<std::string>& cost_model_keys();

// The bundled reference platform: Secure kernel memories, NonSecure-aliased
// code and SRAM for the worlds, a gateway block at the start of the code
// memory and a handful of peripherals.
hw::PlatformDescription reference_platform();

// Parses and fully validates a configuration document. Unknown keys are
// rejected. Throws ConfigError naming the offending field.
SystemConfig parse_config(std::string_view text);

// Inverse of parse_config.
nlohmann::json config_to_json(const SystemConfig& config);

// Cross-field validation shared by parse_config and programmatic builders.
void validate_config(const SystemConfig& config);

std::string format_address(Address addr);

}  // namespace mwtee::kernel
