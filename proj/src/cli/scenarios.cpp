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

#include "mwtee/cli/scenarios.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace mwtee::cli {

using kernel::MemRegionSpec;
using kernel::RegionKind;
using kernel::WorkloadSpec;

namespace {

constexpr hw::Address kCodeBase = 0x1001'0000;
constexpr hw::Address kDataBase = 0x3000'0000;
constexpr std::uint32_t kWorldSpan = 0x1'0000;

std::uint64_t default_horizon(const kernel::SystemConfig& config) {
    // Ten seconds of simulated time; finite workloads stop much earlier.
    return config.cpu_hz * 10;
}

hw::Address device_base(std::string_view name) {
    const auto platform = kernel::reference_platform();
    return platform.find_named(name)->base;
}

}  // namespace

kernel::WorldConfig make_world(std::size_t index, std::string name, WorkloadSpec workload) {
    kernel::WorldConfig w;
    w.name = std::move(name);
    const auto offset = static_cast<std::uint32_t>(index) * kWorldSpan;
    w.regions = {MemRegionSpec{kCodeBase + offset, kWorldSpan, RegionKind::Code},
                 MemRegionSpec{kDataBase + offset, kWorldSpan, RegionKind::Data}};
    w.entry = kCodeBase + offset;
    w.priority = static_cast<int>(index);
    w.workload = std::move(workload);
    return w;
}

Scenario bench_scenario(std::size_t worlds, double tick_us, std::uint64_t cycles, std::uint64_t warmup) {
    Scenario s;
    s.name = "bench";
    s.config.tick_us = tick_us;
    s.config.platform = kernel::reference_platform();
    for (std::size_t i = 0; i < worlds; ++i) {
        WorkloadSpec spec;
        if (i == 0) {
            spec.name = "bench";
            spec.params = {{"cycles", cycles}, {"warmup", warmup}};
        }
        s.config.worlds.push_back(make_world(i, "world" + std::to_string(i + 1), spec));
    }
    s.horizon = default_horizon(s.config);
    return s;
}

Scenario latency_scenario(std::size_t worlds, double tick_us, std::uint64_t period, std::uint64_t samples,
                          std::uint64_t setup) {
    Scenario s;
    s.name = "latency";
    s.config.tick_us = tick_us;
    s.config.platform = kernel::reference_platform();
    for (std::size_t i = 0; i < worlds; ++i) {
        WorkloadSpec spec;
        auto w = make_world(i, "world" + std::to_string(i + 1), spec);
        if (i == 0) {
            w.workload.name = "timer_blinker";
            w.workload.params = {{"period", period}, {"irq", kTimerIrq}, {"setup", setup},
                                 {"gpio", kernel::format_address(device_base("gpio"))}};
            w.devices = {"timer0", "gpio"};
            w.irqs = {{kTimerIrq, 0x40}};
        }
        s.config.worlds.push_back(std::move(w));
    }
    // Enough to see `samples` fires plus one period of slack.
    s.horizon = setup + 1 + period * (samples + 1) - 1;
    return s;
}

Scenario refapp_scenario() {
    Scenario s;
    s.name = "refapp";
    s.config.tick_us = 10000;
    s.config.platform = kernel::reference_platform();

    auto servo = make_world(0, "servo", {"rtos_servo", {{"pwm", kernel::format_address(device_base("pwm"))}}});
    servo.devices = {"pwm"};

    auto console = make_world(1, "console",
                              {"console",
                               {{"servo", "servo"},
                                {"net", "net"},
                                {"uart", kernel::format_address(device_base("uart0"))}}});
    console.devices = {"uart0"};

    auto blinker = make_world(2, "blinker",
                              {"timer_blinker",
                               {{"period", 400000},
                                {"irq", kTimerIrq},
                                {"gpio", kernel::format_address(device_base("gpio"))}}});
    blinker.devices = {"timer0", "gpio"};
    blinker.irqs = {{kTimerIrq, 0x40}};

    auto net = make_world(3, "net", {"echo_net", {{"eth", kernel::format_address(device_base("eth"))}}});
    net.devices = {"eth"};

    s.config.worlds = {servo, console, blinker, net};
    s.horizon = s.config.cpu_hz;  // one second
    return s;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"bench", "latency", "refapp"};
    return names;
}

std::optional<Scenario> scenario_named(std::string_view name, std::optional<std::size_t> worlds,
                                       std::optional<double> tick_us) {
    std::optional<Scenario> s;
    if (name == "bench")
        s = bench_scenario(worlds.value_or(1), tick_us.value_or(10000));
    else if (name == "latency")
        s = latency_scenario(worlds.value_or(2), tick_us.value_or(500));
    else if (name == "refapp") {
        if (worlds && *worlds != 4)
            throw std::invalid_argument("refapp always has 4 worlds");
        s = refapp_scenario();
        if (tick_us)
            s->config.tick_us = *tick_us;
    }
    return s;
}

double parse_duration_us(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);

    std::size_t split = 0;
    while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.'))
        ++split;
    const std::string number(text.substr(0, split));
    std::string_view unit = text.substr(split);
    while (!unit.empty() && unit.front() == ' ')
        unit.remove_prefix(1);

    double value = 0;
    std::size_t used = 0;
    try {
        value = std::stod(number, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad duration '" + std::string(text) + "'");
    }
    if (used != number.size())
        throw std::invalid_argument("bad duration '" + std::string(text) + "'");

    double scale = 0;
    if (unit.empty() || unit == "us")
        scale = 1;
    else if (unit == "ms")
        scale = 1e3;
    else if (unit == "s")
        scale = 1e6;
    else
        throw std::invalid_argument("bad duration unit in '" + std::string(text) + "'");
    if (!(value > 0))
        throw std::invalid_argument("duration must be positive: '" + std::string(text) + "'");
    return value * scale;
}

std::vector<double> parse_sweep(std::string_view list) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.push_back(parse_duration_us(item));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

}  // namespace mwtee::cli
