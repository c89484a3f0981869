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

#include "mwtee/hw/attribution.hpp"

namespace mwtee::hw {

// Down-counting tick timer. The counter fires when it reaches zero and
// reloads on the following cycle, so the firing period is reload + 1.
struct SysTickState {
    std::uint32_t reload = 0;
    std::uint32_t current = 0;
    bool enabled = false;
    SecurityState security = SecurityState::Secure;

    friend bool operator==(const SysTickState&, const SysTickState&) = default;
};

// Cycles until the next firing; 0 when disabled.
std::uint64_t systick_cycles_to_fire(const SysTickState& st);

// Advances the counter and returns the number of firings. A disabled timer
// does not move.
std::uint64_t systick_advance(SysTickState& st, std::uint64_t cycles);

}  // namespace mwtee::hw
