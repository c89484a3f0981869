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

#include "mwtee/hw/systick.hpp"

namespace mwtee::hw {

std::uint64_t systick_cycles_to_fire(const SysTickState& st) {
    if (!st.enabled)
        return 0;
    const std::uint64_t period = std::uint64_t{st.reload} + 1;
    return st.current == 0 ? period : st.current;
}

std::uint64_t systick_advance(SysTickState& st, std::uint64_t cycles) {
    if (!st.enabled || cycles == 0)
        return 0;
    const std::uint64_t period = std::uint64_t{st.reload} + 1;
    const std::uint64_t first = systick_cycles_to_fire(st);
    if (cycles < first) {
        st.current = static_cast<std::uint32_t>(first - cycles);
        return 0;
    }
    const std::uint64_t after_first = cycles - first;
    const std::uint64_t fired = 1 + after_first / period;
    const std::uint64_t rem = after_first % period;
    st.current = rem == 0 ? 0 : static_cast<std::uint32_t>(period - rem);
    return fired;
}

}  // namespace mwtee::hw
