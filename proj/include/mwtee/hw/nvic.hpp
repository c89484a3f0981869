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
#include <vector>

#include "mwtee/hw/cpu.hpp"

namespace mwtee::hw {

inline constexpr std::uint32_t kDefaultIrqCount = 64;

enum class NvicField : std::uint8_t { ITNS, ISER, ISPR, IPR };
enum class RegisterOp : std::uint8_t { Read, Write };

struct IrqLine {
    bool itns = false;  // true = targets NonSecure
    bool enabled = false;
    bool pending = false;
    std::uint8_t priority = 0;  // lower = more urgent

    SecurityState target() const { return itns ? SecurityState::NonSecure : SecurityState::Secure; }

    friend bool operator==(const IrqLine&, const IrqLine&) = default;
};

// The NVIC is not banked between security states: a single set of lines,
// with the NonSecure alias view filtered by ITNS.
class NvicState {
public:
    explicit NvicState(std::uint32_t irq_count = kDefaultIrqCount) : lines_(irq_count) {}

    std::uint32_t size() const { return static_cast<std::uint32_t>(lines_.size()); }
    bool valid(std::uint32_t irq) const { return irq < lines_.size(); }

    // Throws std::out_of_range for an unknown irq.
    IrqLine& line(std::uint32_t irq) { return lines_.at(irq); }
    const IrqLine& line(std::uint32_t irq) const { return lines_.at(irq); }

    void pend(std::uint32_t irq) { line(irq).pending = true; }

    bool secure_priority_boost = false;

    friend bool operator==(const NvicState&, const NvicState&) = default;

private:
    std::vector<IrqLine> lines_;
};

// Register-level access through the Secure or NonSecure alias. Boolean
// fields read as 0/1 and are written with (value != 0); IPR carries the
// 8-bit priority. NonSecure accesses to a secure-targeted line read as zero
// and ignore writes; ITNS is writable only from the Secure view.
std::uint32_t nvic_alias_access(NvicState& nvic, SecurityState view, NvicField field,
                                std::uint32_t irq, RegisterOp op, std::uint32_t value = 0);

struct ExceptionEntry {
    std::uint32_t irq = 0;
    SecurityState target = SecurityState::Secure;
    SecurityState from = SecurityState::Secure;
    bool registers_erased = false;
    RegisterFile stacked{};  // register file at the moment of entry
};

// Highest-urgency pending, enabled and unmasked irq, without side effects.
std::optional<std::uint32_t> select_exception(const CpuState& cpu, const NvicState& nvic);

// Takes the irq chosen by select_exception. Entering a NonSecure handler
// from Secure execution erases r0-r12 after stacking them.
std::optional<ExceptionEntry> arbitrate_and_enter_exception(CpuState& cpu, NvicState& nvic);

}  // namespace mwtee::hw
