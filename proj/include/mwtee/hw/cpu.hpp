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

#include <array>
#include <cstddef>
#include <cstdint>

#include "mwtee/hw/attribution.hpp"

namespace mwtee::hw {

enum class CpuMode : std::uint8_t { Thread, Handler };

inline constexpr std::size_t kRegisterCount = 16;
inline constexpr std::size_t kSp = 13;
inline constexpr std::size_t kLr = 14;
inline constexpr std::size_t kPc = 15;

inline constexpr std::uint32_t kControlNpriv = 1u << 0;
inline constexpr std::uint32_t kControlSpsel = 1u << 1;
inline constexpr std::uint32_t kFncReturn = 0xFEFFFFFFu;

using RegisterFile = std::array<std::uint32_t, kRegisterCount>;

// Special registers banked between security states.
struct BankedSpecials {
    std::uint32_t msp = 0;
    std::uint32_t psp = 0;
    std::uint32_t msp_lim = 0;
    std::uint32_t psp_lim = 0;
    std::uint32_t basepri = 0;
    std::uint32_t primask = 0;
    std::uint32_t faultmask = 0;
    std::uint32_t control = 0;

    friend bool operator==(const BankedSpecials&, const BankedSpecials&) = default;
};

// The SCB registers a world switch persists.
struct ScbSubset {
    std::uint32_t vtor = 0;
    std::uint32_t scr = 0;

    friend bool operator==(const ScbSubset&, const ScbSubset&) = default;
};

struct CpuState {
    SecurityState security = SecurityState::Secure;
    CpuMode mode = CpuMode::Thread;
    bool privileged = true;
    RegisterFile r{};
    std::array<BankedSpecials, 2> specials{};
    std::array<ScbSubset, 2> scb{};

    static constexpr std::size_t bank(SecurityState s) { return s == SecurityState::Secure ? 0 : 1; }

    BankedSpecials& banked(SecurityState s) { return specials[bank(s)]; }
    const BankedSpecials& banked(SecurityState s) const { return specials[bank(s)]; }
    ScbSubset& scb_of(SecurityState s) { return scb[bank(s)]; }
    const ScbSubset& scb_of(SecurityState s) const { return scb[bank(s)]; }

    // Stack pointer selected by the current security state, mode and
    // CONTROL.SPSEL.
    std::uint32_t active_sp() const {
        const auto& sp = banked(security);
        if (mode == CpuMode::Thread && (sp.control & kControlSpsel))
            return sp.psp;
        return sp.msp;
    }

    // Re-establishes the r13 mirror of the active stack pointer.
    void sync_sp() { r[kSp] = active_sp(); }

    friend bool operator==(const CpuState&, const CpuState&) = default;
};

}  // namespace mwtee::hw
