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

#include "mwtee/kernel/kernel.hpp"

#include <string>

#include "mwtee/kernel/partition.hpp"

namespace mwtee::kernel {

using hw::SecurityState;

std::string_view to_string(BootPhase phase) {
    switch (phase) {
    case BootPhase::Reset:
        return "reset";
    case BootPhase::Partitioned:
        return "partitioned";
    case BootPhase::Running:
        return "running";
    case BootPhase::Locked:
        return "locked";
    case BootPhase::Aborted:
        return "aborted";
    }
    return "?";
}

std::string_view to_string(SwitchReason reason) {
    switch (reason) {
    case SwitchReason::Tick:
        return "tick";
    case SwitchReason::Blocking:
        return "blocking";
    case SwitchReason::Reschedule:
        return "reschedule";
    case SwitchReason::Preempt:
        return "preempt";
    case SwitchReason::PreemptReturn:
        return "preempt_return";
    }
    return "?";
}

std::string_view to_string(WccApi api) {
    switch (api) {
    case WccApi::SendBlocking:
        return "send_b";
    case WccApi::SendNonBlocking:
        return "send_nb";
    case WccApi::RecvBlocking:
        return "recv_b";
    case WccApi::RecvNonBlocking:
        return "recv_nb";
    }
    return "?";
}

std::string_view to_string(WccStatus status) {
    switch (status) {
    case WccStatus::Ok:
        return "ok";
    case WccStatus::InboxFull:
        return "inbox_full";
    case WccStatus::Empty:
        return "empty";
    case WccStatus::BadPeer:
        return "bad_peer";
    case WccStatus::GatewayFault:
        return "gateway_fault";
    case WccStatus::Deadlock:
        return "deadlock";
    }
    return "?";
}

std::array<std::uint32_t, 3> payload_words(const Payload& payload) {
    std::array<std::uint32_t, 3> words{};
    for (std::size_t i = 0; i < kMessageBytes; ++i)
        words[i / 4] |= std::uint32_t{payload[i]} << (8 * (i % 4));
    return words;
}

Payload words_payload(std::uint32_t r4, std::uint32_t r5, std::uint32_t r6) {
    const std::array<std::uint32_t, 3> words{r4, r5, r6};
    Payload p{};
    for (std::size_t i = 0; i < kMessageBytes; ++i)
        p[i] = static_cast<std::uint8_t>(words[i / 4] >> (8 * (i % 4)));
    return p;
}

hw::RegisterFile Wcb::resume_registers() const {
    hw::RegisterFile r{};
    r[0] = frame[0];
    r[1] = frame[1];
    r[2] = frame[2];
    r[3] = frame[3];
    for (std::size_t i = 0; i < general.size(); ++i)
        r[4 + i] = general[i];
    r[12] = frame[4];
    r[hw::kPc] = frame[5];
    return r;
}

Kernel::Kernel(SystemConfig config) : config_(std::move(config)) {
    state_.tick_reload = config_.tick_cycles();
}

void Kernel::require_usable(std::string_view op) const {
    if (state_.boot_phase == BootPhase::Locked)
        throw KernelRefused(std::string(op) + " refused: kernel is locked until reset");
    if (state_.boot_phase == BootPhase::Aborted)
        throw KernelRefused(std::string(op) + " refused: kernel aborted during partitioning");
}

BootOutcome Kernel::secure_boot(const BootImage& image) {
    require_usable("secure_boot");
    if (state_.boot_phase != BootPhase::Reset)
        throw KernelRefused("secure_boot requires the reset phase");
    if (!image.digest_matches()) {
        state_.boot_phase = BootPhase::Locked;
        return BootOutcome::Locked;
    }
    state_.boot_verified = true;
    return BootOutcome::Proceed;
}

void Kernel::reset() {
    state_ = KernelState{};
    state_.tick_reload = config_.tick_cycles();
}

void Kernel::partition(hw::PlatformState& platform) {
    require_usable("partition");
    if (state_.boot_phase != BootPhase::Reset || !state_.boot_verified)
        throw KernelRefused("partition requires a verified boot");
    try {
        sp_validate(config_);
        const auto gateway = gateway_region(config_.platform);
        for (const auto& w : config_.worlds)
            (void)sp_build_sau_table(w, gateway, config_.platform);
        sp_apply_static(config_, platform);
    } catch (const PartitionError&) {
        state_.boot_phase = BootPhase::Aborted;
        throw;
    }
    state_.boot_phase = BootPhase::Partitioned;
}

void Kernel::init(hw::PlatformState& platform) {
    require_usable("init");
    if (state_.boot_phase != BootPhase::Partitioned)
        throw KernelRefused("init requires the partitioned phase");

    const auto gateway = gateway_region(config_.platform);
    state_.wcbs.clear();
    for (const auto& w : config_.worlds) {
        Wcb wcb;
        const MemRegionSpec* stack_region = nullptr;
        for (const auto& r : w.regions) {
            if (r.kind == RegionKind::Data) {
                stack_region = &r;
                break;
            }
        }
        if (stack_region == nullptr && !w.regions.empty())
            stack_region = &w.regions.front();
        if (stack_region != nullptr) {
            const auto top = static_cast<std::uint32_t>(stack_region->end());
            wcb.specials.msp = top;
            wcb.specials.psp = top;
            wcb.specials.msp_lim = stack_region->base;
            wcb.specials.psp_lim = stack_region->base;
        }
        wcb.general[hw::kSp - 4] = wcb.specials.msp;
        wcb.scb.vtor = w.entry;
        wcb.frame[5] = w.entry;
        wcb.sau_table = sp_build_sau_table(w, gateway, config_.platform);
        for (const auto& irq : w.irqs)
            wcb.interrupts[irq.id] = InterruptDescriptor{false, false, irq.priority, true};
        state_.wcbs.push_back(std::move(wcb));
    }

    platform.nvic.secure_priority_boost = true;
    platform.systick.reload = static_cast<std::uint32_t>(state_.tick_reload - 1);
    platform.systick.current = 0;
    platform.systick.enabled = true;
    platform.systick.security = SecurityState::Secure;
    state_.running.reset();
}

void Kernel::kick_off(hw::PlatformState& platform) {
    require_usable("kick_off");
    if (state_.boot_phase != BootPhase::Partitioned || state_.wcbs.size() != config_.worlds.size())
        throw KernelRefused("kick_off requires initialized WCBs");

    const WorldId first = 0;
    const Wcb& wcb = state_.wcbs[first];
    platform.sau = wcb.sau_table;
    for (const auto& [irq, desc] : wcb.interrupts) {
        auto& line = platform.nvic.line(irq);
        line.itns = desc.itns;
        line.enabled = desc.iser;
        line.priority = desc.ipr;
    }

    auto& cpu = platform.cpu;
    cpu.security = SecurityState::Secure;
    cpu.mode = hw::CpuMode::Thread;
    cpu.banked(SecurityState::NonSecure) = wcb.specials;
    cpu.scb_of(SecurityState::NonSecure) = wcb.scb;
    auto next = hw::security_transition(cpu, hw::TransitionKind::BlxnsCall, config_.worlds[first].entry, platform);
    if (auto* fault = std::get_if<hw::Fault>(&next))
        throw KernelRefused("kick_off: " + fault->cause);
    cpu = std::get<hw::CpuState>(next);

    platform.systick.current = 0;
    state_.running = first;
    state_.slot_owner = first;
    state_.boot_phase = BootPhase::Running;
    gate_suspended_irqs(platform);
}

void Kernel::save_context(hw::PlatformState& platform, WorldId w) {
    Wcb& wcb = state_.wcbs[w];
    const auto& cpu = platform.cpu;
    for (std::size_t i = 0; i < wcb.general.size(); ++i)
        wcb.general[i] = cpu.r[4 + i];
    wcb.frame = {cpu.r[0], cpu.r[1], cpu.r[2], cpu.r[3], cpu.r[12], cpu.r[hw::kPc]};
    wcb.specials = cpu.banked(SecurityState::NonSecure);
    wcb.scb = cpu.scb_of(SecurityState::NonSecure);

    // Bank the NVIC: park the live state, then hide the lines from the
    // NonSecure alias. Pending bits stay in the NVIC so requests raised
    // while suspended are not lost.
    for (auto& [irq, desc] : wcb.interrupts) {
        auto& line = platform.nvic.line(irq);
        desc = InterruptDescriptor{line.enabled, line.pending, line.priority, line.itns};
        line.itns = false;
        line.enabled = false;
    }
}

void Kernel::restore_context(hw::PlatformState& platform, WorldId w) {
    const Wcb& wcb = state_.wcbs[w];
    platform.sau = wcb.sau_table;

    auto& cpu = platform.cpu;
    cpu.r = wcb.resume_registers();
    cpu.banked(SecurityState::NonSecure) = wcb.specials;
    cpu.scb_of(SecurityState::NonSecure) = wcb.scb;
    for (const auto& [irq, desc] : wcb.interrupts) {
        auto& line = platform.nvic.line(irq);
        line.itns = desc.itns;
        line.enabled = desc.iser;
        line.priority = desc.ipr;
        line.pending = line.pending || desc.ispr;
    }
    cpu.security = SecurityState::NonSecure;
    cpu.mode = hw::CpuMode::Thread;
    cpu.privileged = !(wcb.specials.control & hw::kControlNpriv);
    cpu.sync_sp();
}

void Kernel::idle_cpu(hw::PlatformState& platform) {
    auto& cpu = platform.cpu;
    cpu.r.fill(0);
    cpu.security = SecurityState::Secure;
    cpu.mode = hw::CpuMode::Thread;
    cpu.sync_sp();
    // Nothing is loaded: no NonSecure attribution at all.
    platform.sau = hw::SauState{};
    platform.sau.enabled = true;
}

void Kernel::gate_suspended_irqs(hw::PlatformState& platform) {
    const bool preemptive = config_.scheduler_mode == SchedulerMode::PriorityPreemptive;
    for (WorldId w = 0; w < state_.wcbs.size(); ++w) {
        if (state_.running && *state_.running == w)
            continue;
        const bool may_preempt = preemptive && runnable(w) &&
                                 (!state_.running || config_.worlds[w].priority <
                                                         config_.worlds[*state_.running].priority);
        for (const auto& [irq, desc] : state_.wcbs[w].interrupts) {
            auto& line = platform.nvic.line(irq);
            line.itns = false;
            line.enabled = may_preempt && desc.iser;
        }
    }
}

bool Kernel::runnable(WorldId w) const {
    const Wcb& wcb = state_.wcbs.at(w);
    return !wcb.parked && !wcb.blocked_on;
}

std::optional<WorldId> Kernel::next_runnable_after(WorldId w) const {
    const std::size_t n = state_.wcbs.size();
    for (std::size_t k = 1; k <= n; ++k) {
        const WorldId candidate = (w + k) % n;
        if (runnable(candidate))
            return candidate;
    }
    return std::nullopt;
}

SwitchRecord Kernel::ws_tick(hw::PlatformState& platform) {
    require_usable("ws_tick");
    if (state_.boot_phase != BootPhase::Running)
        throw KernelRefused("ws_tick requires the running phase");

    SwitchRecord rec{state_.running, std::nullopt, SwitchReason::Tick};
    // 4.1
    if (state_.running)
        save_context(platform, *state_.running);
    // 4.2
    const auto successor = next_runnable_after(state_.slot_owner);
    state_.preempted.clear();
    if (!successor) {
        state_.running.reset();
        idle_cpu(platform);
        gate_suspended_irqs(platform);
        return rec;
    }
    state_.slot_owner = *successor;
    state_.running = *successor;
    // 4.3 and 4.4
    restore_context(platform, *successor);
    gate_suspended_irqs(platform);
    rec.to = successor;
    return rec;
}

SwitchRecord Kernel::reschedule(hw::PlatformState& platform) {
    require_usable("reschedule");
    std::optional<WorldId> target;
    SwitchReason reason = SwitchReason::Reschedule;
    while (!state_.preempted.empty() && !target) {
        const WorldId back = state_.preempted.back();
        state_.preempted.pop_back();
        if (runnable(back)) {
            target = back;
            reason = SwitchReason::PreemptReturn;
        }
    }
    if (!target) {
        target = next_runnable_after(state_.slot_owner);
        if (target)
            state_.slot_owner = *target;
    }

    SwitchRecord rec{state_.running, target, reason};
    if (state_.running)
        save_context(platform, *state_.running);
    state_.running = target;
    if (target)
        restore_context(platform, *target);
    else
        idle_cpu(platform);
    gate_suspended_irqs(platform);
    return rec;
}

SwitchRecord Kernel::switch_to(hw::PlatformState& platform, WorldId target, SwitchReason reason) {
    require_usable("switch_to");
    if (state_.boot_phase != BootPhase::Running)
        throw KernelRefused("switch_to requires the running phase");
    if (target >= state_.wcbs.size() || !runnable(target))
        throw std::invalid_argument("switch_to: world " + std::to_string(target) + " is not runnable");

    SwitchRecord rec{state_.running, target, reason};
    if (state_.running) {
        save_context(platform, *state_.running);
        if (reason == SwitchReason::Preempt)
            state_.preempted.push_back(*state_.running);
    }
    // The round-robin position stays with the interrupted slot so forced
    // switches cannot starve the worlds in between.
    if (reason != SwitchReason::Preempt)
        state_.preempted.clear();
    state_.running = target;
    restore_context(platform, target);
    gate_suspended_irqs(platform);
    return rec;
}

void Kernel::park(WorldId w) {
    state_.wcbs.at(w).parked = true;
    state_.wcbs.at(w).blocked_on.reset();
}

std::optional<WorldId> Kernel::irq_owner(std::uint32_t irq) const {
    for (WorldId w = 0; w < config_.worlds.size(); ++w) {
        if (config_.worlds[w].owns_irq(irq))
            return w;
    }
    return std::nullopt;
}

std::optional<WorldId> Kernel::world_named(std::string_view name) const {
    for (WorldId w = 0; w < config_.worlds.size(); ++w) {
        if (config_.worlds[w].name == name)
            return w;
    }
    return std::nullopt;
}

hw::Address Kernel::gateway_entry(WccApi api) const {
    return config_.platform.gateway_base + 32u * static_cast<std::uint32_t>(api);
}

SchedulingAction Kernel::preemptive_route(std::uint32_t irq) const {
    const auto owner = irq_owner(irq);
    if (!owner)
        return {SchedulingKind::Defer, std::nullopt};
    if (state_.running && *state_.running == *owner)
        return {SchedulingKind::DeliverNow, owner};
    if (config_.scheduler_mode != SchedulerMode::PriorityPreemptive || !runnable(*owner))
        return {SchedulingKind::Defer, owner};
    if (!state_.running ||
        config_.worlds[*owner].priority < config_.worlds[*state_.running].priority)
        return {SchedulingKind::Preempt, owner};
    return {SchedulingKind::Defer, owner};
}

bool Kernel::send_cycle(WorldId from, WorldId target) const {
    // Follow blocked-on-send edges from `from`; reaching `target` closes a
    // cycle.
    WorldId cur = from;
    for (std::size_t steps = 0; steps <= state_.wcbs.size(); ++steps) {
        if (cur == target)
            return true;
        const auto& blocked = state_.wcbs[cur].blocked_on;
        if (!blocked || blocked->kind != BlockKind::Send)
            return false;
        cur = blocked->peer;
    }
    return false;
}

void Kernel::deliver_to_blocked(WorldId receiver, const Message& msg) {
    Wcb& wcb = state_.wcbs[receiver];
    const auto words = payload_words(msg.payload);
    wcb.general[0] = words[0];
    wcb.general[1] = words[1];
    wcb.general[2] = words[2];
    wcb.blocked_on.reset();
}

void Kernel::scrub_for_return(hw::CpuState& cpu, const std::optional<Payload>& message) const {
    for (std::size_t i = 0; i <= 12; ++i)
        cpu.r[i] = 0;
    if (message) {
        const auto words = payload_words(*message);
        cpu.r[4] = words[0];
        cpu.r[5] = words[1];
        cpu.r[6] = words[2];
    }
}

WccResult Kernel::wcc_call(hw::PlatformState& platform, WorldId caller, WccApi api,
                           std::optional<WorldId> peer, std::optional<Payload> payload,
                           std::optional<hw::Address> entry) {
    require_usable("wcc_call");
    if (state_.boot_phase != BootPhase::Running || !state_.running || *state_.running != caller)
        throw KernelRefused("wcc_call: caller is not the running world");
    if (payload && !is_send(api))
        throw std::invalid_argument("wcc_call: payload given for a receive");

    auto& cpu = platform.cpu;
    if (payload) {
        const auto words = payload_words(*payload);
        cpu.r[4] = words[0];
        cpu.r[5] = words[1];
        cpu.r[6] = words[2];
    }
    const hw::Address return_pc = cpu.r[hw::kPc];

    auto entered = hw::security_transition(cpu, hw::TransitionKind::SgEntry,
                                           entry.value_or(gateway_entry(api)), platform);
    if (std::holds_alternative<hw::Fault>(entered)) {
        WccResult fault;
        fault.status = WccStatus::GatewayFault;
        return fault;
    }
    cpu = std::get<hw::CpuState>(entered);

    WccResult result;
    std::optional<Payload> back_in_registers;
    const std::size_t n = state_.wcbs.size();

    auto finish = [&]() {
        scrub_for_return(cpu, back_in_registers);
        // A blocked caller is parked at its call site in NonSecure state, so
        // the context saved for it is the world's own, not the gateway's.
        auto returned = hw::security_transition(cpu, hw::TransitionKind::BxnsReturn, return_pc, platform);
        if (auto* next = std::get_if<hw::CpuState>(&returned))
            cpu = *next;
        return result;
    };

    if (is_send(api)) {
        if (!peer || *peer >= n || *peer == caller || state_.wcbs[*peer].parked) {
            result.status = WccStatus::BadPeer;
            return finish();
        }
        const Message msg{words_payload(cpu.r[4], cpu.r[5], cpu.r[6]), caller, *peer};
        Wcb& target = state_.wcbs[*peer];

        if (api == WccApi::SendBlocking && send_cycle(*peer, caller)) {
            result.status = WccStatus::Deadlock;
            return finish();
        }

        const bool awaiting_response = target.blocked_on && target.blocked_on->kind == BlockKind::Send &&
                                       target.blocked_on->peer == caller && api == WccApi::SendNonBlocking;
        const bool awaiting_any = target.blocked_on && target.blocked_on->kind == BlockKind::Recv;
        if (awaiting_response || awaiting_any) {
            deliver_to_blocked(*peer, msg);
            result.woken = *peer;
        } else if (!target.inbox) {
            target.inbox = msg;
        } else {
            result.status = WccStatus::InboxFull;
            return finish();
        }

        if (api == WccApi::SendBlocking) {
            state_.wcbs[caller].blocked_on = BlockedOn{BlockKind::Send, *peer};
            result.caller_blocked = true;
            if (runnable(*peer))
                result.schedule_next = *peer;
        }
        return finish();
    }

    Wcb& own = state_.wcbs[caller];
    if (own.inbox) {
        result.received = *own.inbox;
        back_in_registers = own.inbox->payload;
        own.inbox.reset();
        return finish();
    }
    if (api == WccApi::RecvNonBlocking) {
        result.status = WccStatus::Empty;
        return finish();
    }
    bool other_runnable = false;
    for (WorldId w = 0; w < n; ++w)
        other_runnable = other_runnable || (w != caller && runnable(w));
    if (!other_runnable) {
        result.status = WccStatus::Deadlock;
        return finish();
    }
    own.blocked_on = BlockedOn{BlockKind::Recv, 0};
    result.caller_blocked = true;
    return finish();
}

}  // namespace mwtee::kernel
