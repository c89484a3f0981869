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
#include <random>
#include <string>
#include <vector>

#include "mwtee/cli/scenarios.hpp"
#include "mwtee/guest/program.hpp"
#include "mwtee/kernel/config.hpp"
#include "mwtee/sim/engine.hpp"

namespace mwtee::testing {

// Seeded source for the property tests. Failures print the seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(engine_()); }
    bool coin() { return below(2) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 engine_;
};

inline kernel::WorkloadSpec workload(std::string name, nlohmann::json params = nlohmann::json::object()) {
    return {std::move(name), std::move(params)};
}

// n busyloop worlds on the reference platform.
inline kernel::SystemConfig busy_worlds(std::size_t n, double tick_us = 500) {
    kernel::SystemConfig c;
    c.tick_us = tick_us;
    c.platform = kernel::reference_platform();
    for (std::size_t i = 0; i < n; ++i)
        c.worlds.push_back(cli::make_world(i, "w" + std::to_string(i + 1), workload("busyloop")));
    return c;
}

inline guest::WorkloadProgram script(const std::string& text) {
    return guest::parse_script("script", text);
}

inline sim::RunResult simulate(const kernel::SystemConfig& config, std::uint64_t horizon,
                               sim::SwitchObserver observer = {}) {
    sim::RunOptions options;
    options.horizon = horizon;
    options.observer = std::move(observer);
    return sim::run(config, sim::build_workloads(config), sim::CostModel::with_overrides(config.cost_overrides),
                    options);
}

inline std::size_t count_kind(const sim::Trace& trace, sim::TraceKind kind) {
    std::size_t n = 0;
    for (const auto& r : trace)
        n += r.kind == kind ? 1 : 0;
    return n;
}

}  // namespace mwtee::testing
