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
#include <string>

#include <json.hpp>

namespace mwtee::sim {

// Cycle prices of the kernel's fixed-cost operations.
struct CostModel {
    std::uint64_t world_switch_cycles = 215;
    std::uint64_t irq_entry_cycles = 24;
    std::uint64_t boot_base_cycles = 7749;
    std::uint64_t boot_per_world_cycles = 1236;
    std::uint64_t wcc_gateway_cycles = 0;

    // Defaults with the given keys replaced. Unknown keys throw
    // std::invalid_argument.
    static CostModel with_overrides(const std::map<std::string, std::uint64_t>& overrides);

    std::uint64_t boot_cycles(std::size_t worlds) const {
        return boot_base_cycles + boot_per_world_cycles * (worlds > 0 ? worlds - 1 : 0);
    }

    nlohmann::json to_json() const;

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

}  // namespace mwtee::sim
