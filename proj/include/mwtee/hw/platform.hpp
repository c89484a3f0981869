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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwtee/hw/attribution.hpp"
#include "mwtee/hw/cpu.hpp"
#include "mwtee/hw/gates.hpp"
#include "mwtee/hw/nvic.hpp"
#include "mwtee/hw/systick.hpp"

namespace mwtee::hw {

enum class MapKind : std::uint8_t { Memory, Peripheral };

struct MemoryMapEntry {
    std::string name;
    Address base = 0;
    std::uint32_t size = 0;
    MapKind kind = MapKind::Memory;

    bool contains(Address addr) const {
        return addr >= base && std::uint64_t{addr} < std::uint64_t{base} + size;
    }
    std::uint64_t end() const { return std::uint64_t{base} + size; }
};

struct PlatformDescription {
    std::vector<MemoryMapEntry> memories;
    IdauMap idau = IdauMap::bit28();
    std::uint32_t mpc_block_size = kDefaultMpcBlockSize;
    // Non-Secure Callable region holding the kernel's gateway entry points.
    Address gateway_base = 0;
    std::uint32_t gateway_size = 0;
    std::uint32_t irq_count = kDefaultIrqCount;

    const MemoryMapEntry* find(Address addr) const;
    const MemoryMapEntry* find_named(std::string_view name) const;

    // Throws std::invalid_argument on overlapping or malformed entries, or a
    // gateway that does not sit inside a memory.
    void validate() const;
};

// Simulated SoC. Plain value: copies are independent platforms.
struct PlatformState {
    explicit PlatformState(PlatformDescription description);

    PlatformDescription desc;
    SauState sau;
    std::vector<MpcState> mpcs;  // one per memory entry, in map order
    PpcState ppc;                // one entry per peripheral entry
    NvicState nvic;
    SysTickState systick;
    CpuState cpu;

    const MpcState* mpc_for(Address addr) const;
    MpcState* mpc_named(std::string_view memory_id);
};

enum class AccessKind : std::uint8_t { Read, Write, Exec };

struct Transaction {
    SecurityState origin = SecurityState::NonSecure;
    Address addr = 0;
    AccessKind kind = AccessKind::Read;
};

enum class AccessOutcome : std::uint8_t { Allowed, SecurityFault, BusFault };

struct AccessResult {
    AccessOutcome outcome = AccessOutcome::Allowed;
    std::string cause;

    bool allowed() const { return outcome == AccessOutcome::Allowed; }
};

std::string_view to_string(AccessOutcome outcome);

AccessResult check_access(const PlatformState& platform, const Transaction& txn);

enum class TransitionKind : std::uint8_t { SgEntry, BlxnsCall, BxnsReturn };

struct Fault {
    std::string cause;
};

using TransitionResult = std::variant<CpuState, Fault>;

// State-changing branches between security states. For BlxnsCall the bits
// of keep_mask name the argument registers (r0-r12) that survive the
// clearing.
TransitionResult security_transition(const CpuState& cpu, TransitionKind kind, Address target,
                                     const PlatformState& platform, std::uint16_t keep_mask = 0);

}  // namespace mwtee::hw
