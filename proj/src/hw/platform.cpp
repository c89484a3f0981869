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

#include "mwtee/hw/platform.hpp"

#include <stdexcept>

namespace mwtee::hw {

const MemoryMapEntry* PlatformDescription::find(Address addr) const {
    for (const auto& m : memories) {
        if (m.contains(addr))
            return &m;
    }
    return nullptr;
}

const MemoryMapEntry* PlatformDescription::find_named(std::string_view name) const {
    for (const auto& m : memories) {
        if (m.name == name)
            return &m;
    }
    return nullptr;
}

void PlatformDescription::validate() const {
    for (std::size_t i = 0; i < memories.size(); ++i) {
        const auto& a = memories[i];
        if (a.size == 0 || a.end() > (std::uint64_t{1} << 32))
            throw std::invalid_argument("memory '" + a.name + "' is empty or wraps");
        for (std::size_t j = i + 1; j < memories.size(); ++j) {
            const auto& b = memories[j];
            if (a.name == b.name)
                throw std::invalid_argument("memory name '" + a.name + "' declared twice");
            if (a.base < b.end() && b.base < a.end())
                throw std::invalid_argument("memories '" + a.name + "' and '" + b.name + "' overlap");
        }
    }
    if (gateway_size == 0)
        throw std::invalid_argument("gateway region is empty");
    const MemoryMapEntry* host = find(gateway_base);
    if (host == nullptr || host->kind != MapKind::Memory ||
        std::uint64_t{gateway_base} + gateway_size > host->end())
        throw std::invalid_argument("gateway region does not sit inside a memory");
    if (irq_count == 0 || irq_count > 480)
        throw std::invalid_argument("irq_count out of range");
}

PlatformState::PlatformState(PlatformDescription description)
    : desc(std::move(description)), nvic(desc.irq_count) {
    for (const auto& m : desc.memories) {
        if (m.kind == MapKind::Memory)
            mpcs.push_back(MpcState::make(m.name, m.base, m.size, desc.mpc_block_size));
        else
            ppc.peripherals[m.name] = true;
    }
}

const MpcState* PlatformState::mpc_for(Address addr) const {
    for (const auto& mpc : mpcs) {
        if (mpc.covers(addr))
            return &mpc;
    }
    return nullptr;
}

MpcState* PlatformState::mpc_named(std::string_view memory_id) {
    for (auto& mpc : mpcs) {
        if (mpc.memory_id == memory_id)
            return &mpc;
    }
    return nullptr;
}

std::string_view to_string(AccessOutcome outcome) {
    switch (outcome) {
    case AccessOutcome::Allowed:
        return "allowed";
    case AccessOutcome::SecurityFault:
        return "security_fault";
    case AccessOutcome::BusFault:
        return "bus_fault";
    }
    return "?";
}

AccessResult check_access(const PlatformState& platform, const Transaction& txn) {
    const MemoryMapEntry* entry = platform.desc.find(txn.addr);
    if (entry == nullptr)
        return {AccessOutcome::BusFault, "unmapped"};

    if (txn.origin == SecurityState::NonSecure) {
        const auto attr = attribute_address(platform.sau, platform.desc.idau, txn.addr);
        if (attr == SecurityAttribution::SecureNSC)
            return {AccessOutcome::SecurityFault, "sau: nsc only reachable through an sg entry"};
        if (attr != SecurityAttribution::NonSecure)
            return {AccessOutcome::SecurityFault, "sau"};
    }

    const bool secure_txn = txn.origin == SecurityState::Secure;
    if (entry->kind == MapKind::Memory) {
        const MpcState* mpc = platform.mpc_for(txn.addr);
        if (mpc != nullptr && mpc->is_secure(txn.addr) != secure_txn)
            return {AccessOutcome::SecurityFault, "mpc"};
    } else {
        const auto it = platform.ppc.peripherals.find(entry->name);
        const bool secure_dev = it == platform.ppc.peripherals.end() || it->second;
        if (secure_dev != secure_txn)
            return {AccessOutcome::SecurityFault, "ppc"};
    }
    return {AccessOutcome::Allowed, {}};
}

TransitionResult security_transition(const CpuState& cpu, TransitionKind kind, Address target,
                                     const PlatformState& platform, std::uint16_t keep_mask) {
    const auto attr = attribute_address(platform.sau, platform.desc.idau, target);
    CpuState next = cpu;

    switch (kind) {
    case TransitionKind::SgEntry:
        if (attr != SecurityAttribution::SecureNSC)
            return Fault{"sg entry target is not non-secure callable"};
        next.security = SecurityState::Secure;
        next.r[kPc] = target;
        next.sync_sp();
        return next;

    case TransitionKind::BlxnsCall:
        if (cpu.security != SecurityState::Secure)
            return Fault{"blxns issued from non-secure state"};
        if (attr != SecurityAttribution::NonSecure)
            return Fault{"blxns target is not non-secure"};
        for (std::size_t i = 0; i <= 12; ++i) {
            if (!(keep_mask & (1u << i)))
                next.r[i] = 0;
        }
        next.r[kLr] = kFncReturn;
        next.r[kPc] = target;
        next.security = SecurityState::NonSecure;
        next.mode = CpuMode::Thread;
        next.privileged = !(next.banked(SecurityState::NonSecure).control & kControlNpriv);
        next.sync_sp();
        return next;

    case TransitionKind::BxnsReturn:
        if (cpu.security != SecurityState::Secure)
            return Fault{"bxns issued from non-secure state"};
        if (attr != SecurityAttribution::NonSecure)
            return Fault{"bxns target is not non-secure"};
        next.r[kPc] = target;
        next.security = SecurityState::NonSecure;
        next.sync_sp();
        return next;
    }
    return Fault{"unknown transition"};
}

}  // namespace mwtee::hw
