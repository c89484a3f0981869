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

#include "mwtee/sim/cost_model.hpp"

#include <stdexcept>

namespace mwtee::sim {

CostModel CostModel::with_overrides(const std::map<std::string, std::uint64_t>& overrides) {
    CostModel c;
    for (const auto& [key, value] : overrides) {
        if (key == "world_switch_cycles")
            c.world_switch_cycles = value;
        else if (key == "irq_entry_cycles")
            c.irq_entry_cycles = value;
        else if (key == "boot_base_cycles")
            c.boot_base_cycles = value;
        else if (key == "boot_per_world_cycles")
            c.boot_per_world_cycles = value;
        else if (key == "wcc_gateway_cycles")
            c.wcc_gateway_cycles = value;
        else
            throw std::invalid_argument("unknown cost model key '" + key + "'");
    }
    return c;
}

nlohmann::json CostModel::to_json() const {
    return {{"boot_base_cycles", boot_base_cycles},
            {"boot_per_world_cycles", boot_per_world_cycles},
            {"irq_entry_cycles", irq_entry_cycles},
            {"wcc_gateway_cycles", wcc_gateway_cycles},
            {"world_switch_cycles", world_switch_cycles}};
}

}  // namespace mwtee::sim
