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

#include "mwtee/hw/nvic.hpp"

#include <tuple>

namespace mwtee::hw {

std::uint32_t nvic_alias_access(NvicState& nvic, SecurityState view, NvicField field,
                                std::uint32_t irq, RegisterOp op, std::uint32_t value) {
    IrqLine& line = nvic.line(irq);
    const bool visible = view == SecurityState::Secure || line.itns;
    if (!visible)
        return 0;

    if (op == RegisterOp::Read) {
        switch (field) {
        case NvicField::ITNS:
            return line.itns ? 1u : 0u;
        case NvicField::ISER:
            return line.enabled ? 1u : 0u;
        case NvicField::ISPR:
            return line.pending ? 1u : 0u;
        case NvicField::IPR:
            return line.priority;
        }
        return 0;
    }

    switch (field) {
    case NvicField::ITNS:
        if (view == SecurityState::Secure)
            line.itns = value != 0;
        break;
    case NvicField::ISER:
        line.enabled = value != 0;
        break;
    case NvicField::ISPR:
        line.pending = value != 0;
        break;
    case NvicField::IPR:
        line.priority = static_cast<std::uint8_t>(value & 0xFFu);
        break;
    }
    return 0;
}

namespace {

bool masked(const CpuState& cpu, const IrqLine& line) {
    const auto& sp = cpu.banked(line.target());
    if (sp.primask & 1u)
        return true;
    return sp.basepri != 0 && line.priority >= sp.basepri;
}

}  // namespace

std::optional<std::uint32_t> select_exception(const CpuState& cpu, const NvicState& nvic) {
    std::optional<std::uint32_t> best;
    std::tuple<int, int, std::uint32_t> best_key{};
    for (std::uint32_t irq = 0; irq < nvic.size(); ++irq) {
        const IrqLine& line = nvic.line(irq);
        if (!line.pending || !line.enabled || masked(cpu, line))
            continue;
        const int group = (nvic.secure_priority_boost && !line.itns) ? 0 : 1;
        const std::tuple<int, int, std::uint32_t> key{group, line.priority, irq};
        if (!best || key < best_key) {
            best = irq;
            best_key = key;
        }
    }
    return best;
}

std::optional<ExceptionEntry> arbitrate_and_enter_exception(CpuState& cpu, NvicState& nvic) {
    const auto chosen = select_exception(cpu, nvic);
    if (!chosen)
        return std::nullopt;

    IrqLine& line = nvic.line(*chosen);
    ExceptionEntry entry;
    entry.irq = *chosen;
    entry.target = line.target();
    entry.from = cpu.security;
    entry.stacked = cpu.r;

    if (entry.target == SecurityState::NonSecure && cpu.security == SecurityState::Secure) {
        for (std::size_t i = 0; i <= 12; ++i)
            cpu.r[i] = 0;
        entry.registers_erased = true;
    }

    line.pending = false;
    cpu.security = entry.target;
    cpu.mode = CpuMode::Handler;
    cpu.privileged = true;
    cpu.sync_sp();
    return entry;
}

}  // namespace mwtee::hw
