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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwtee/kernel/config.hpp"

// Bundled demo scenarios and the world layout they share.
namespace mwtee::cli {

struct Scenario {
    std::string name;
    kernel::SystemConfig config;
    std::uint64_t horizon = 0;  // cycles after kick-off
};

// Irq raised by the blinker's timer in the bundled scenarios.
inline constexpr std::uint32_t kTimerIrq = 3;

// World `index` on the reference platform: 64 KiB of code above the gateway
// and 64 KiB of data in sram, both MPC-block aligned.
kernel::WorldConfig make_world(std::size_t index, std::string name, kernel::WorkloadSpec workload);

// World 0 runs bench(cycles, warmup); the others run busyloop.
Scenario bench_scenario(std::size_t worlds = 1, double tick_us = 10000, std::uint64_t cycles = 5'328'800,
                        std::uint64_t warmup = 0);

// World 0 runs a timer_blinker on kTimerIrq; the others run busyloop.
// The horizon covers `samples` timer periods.
Scenario latency_scenario(std::size_t worlds = 2, double tick_us = 500, std::uint64_t period = 400'000,
                          std::uint64_t samples = 1000, std::uint64_t setup = 1000);

// Four-block reference application: servo controller, console, blinker and
// network echo service.
Scenario refapp_scenario();

const std::vector<std::string>& scenario_names();

// Named scenario with optional world-count and tick overrides; nullopt for an
// unknown name.
std::optional<Scenario> scenario_named(std::string_view name, std::optional<std::size_t> worlds = std::nullopt,
                                       std::optional<double> tick_us = std::nullopt);

// "0.5ms", "500us", "1 ms", "10000" (microseconds). Throws
// std::invalid_argument.
double parse_duration_us(std::string_view text);
std::vector<double> parse_sweep(std::string_view list);

}  // namespace mwtee::cli
