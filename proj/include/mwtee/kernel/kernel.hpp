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
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mwtee/hw/platform.hpp"
#include "mwtee/kernel/boot.hpp"
#include "mwtee/kernel/config.hpp"

namespace mwtee::kernel {

using WorldId = std::size_t;

enum class BootPhase : std::uint8_t { Reset, Partitioned, Running, Locked, Aborted };
enum class BootOutcome : std::uint8_t { Proceed, Locked };

std::string_view to_string(BootPhase phase);

// Per-irq NVIC state parked in the WCB while its world is suspended.
struct InterruptDescriptor {
    bool iser = false;
    bool ispr = false;
    std::uint8_t ipr = 0;
    bool itns = true;

    friend bool operator==(const InterruptDescriptor&, const InterruptDescriptor&) = default;
};

inline constexpr std::size_t kMessageBytes = 12;
using Payload = std::array<std::uint8_t, kMessageBytes>;

struct Message {
    Payload payload{};
    WorldId sender = 0;
    WorldId receiver = 0;

    friend bool operator==(const Message&, const Message&) = default;
};

// Little-endian packing of the payload into r4-r6.
std::array<std::uint32_t, 3> payload_words(const Payload& payload);
Payload words_payload(std::uint32_t r4, std::uint32_t r5, std::uint32_t r6);

enum class BlockKind : std::uint8_t { Send, Recv };

struct BlockedOn {
    BlockKind kind = BlockKind::Recv;
    WorldId peer = 0;  // Send only

    friend bool operator==(const BlockedOn&, const BlockedOn&) = default;
};

// World Control Block.
struct Wcb {
    std::array<std::uint32_t, 11> general{};  // r4-r14
    hw::BankedSpecials specials{};
    hw::ScbSubset scb{};
    // r0-r3, r12 and pc as the hardware stacked them on the world's own
    // stack when it was interrupted.
    std::array<std::uint32_t, 6> frame{};
    hw::SauState sau_table{};
    std::map<std::uint32_t, InterruptDescriptor> interrupts;
    std::optional<Message> inbox;
    std::optional<BlockedOn> blocked_on;
    bool parked = false;  // halted on a fault or out of work

    // Register file a resume of this world produces.
    hw::RegisterFile resume_registers() const;

    friend bool operator==(const Wcb&, const Wcb&) = default;
};

struct KernelState {
    std::vector<Wcb> wcbs;
    std::optional<WorldId> running;
    WorldId slot_owner = 0;             // round-robin position
    std::vector<WorldId> preempted;     // preemptive mode: worlds to return to
    BootPhase boot_phase = BootPhase::Reset;
    bool boot_verified = false;
    std::uint64_t tick_reload = 0;      // cycles per tick
};

// Thrown when an operation is attempted in a phase that forbids it, most
// notably after a failed secure boot.
class KernelRefused : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class SwitchReason : std::uint8_t { Tick, Blocking, Reschedule, Preempt, PreemptReturn };

std::string_view to_string(SwitchReason reason);

struct SwitchRecord {
    std::optional<WorldId> from;
    std::optional<WorldId> to;
    SwitchReason reason = SwitchReason::Tick;
};

enum class WccApi : std::uint8_t { SendBlocking, SendNonBlocking, RecvBlocking, RecvNonBlocking };
enum class WccStatus : std::uint8_t { Ok, InboxFull, Empty, BadPeer, GatewayFault, Deadlock };

std::string_view to_string(WccApi api);
std::string_view to_string(WccStatus status);

inline constexpr bool is_send(WccApi api) {
    return api == WccApi::SendBlocking || api == WccApi::SendNonBlocking;
}

struct WccResult {
    WccStatus status = WccStatus::Ok;
    std::optional<Message> received;      // message now in the caller's r4-r6
    bool caller_blocked = false;          // caller must be switched out
    std::optional<WorldId> schedule_next; // forced callee of a blocking send
    std::optional<WorldId> woken;         // world released by this call
};

enum class SchedulingKind : std::uint8_t { DeliverNow, Preempt, Defer };

struct SchedulingAction {
    SchedulingKind kind = SchedulingKind::Defer;
    std::optional<WorldId> world;
};

class Kernel {
public:
    explicit Kernel(SystemConfig config);

    const SystemConfig& config() const { return config_; }
    const KernelState& state() const { return state_; }
    std::size_t world_count() const { return config_.worlds.size(); }
    const Wcb& wcb(WorldId w) const { return state_.wcbs.at(w); }

    // Verifies the image digest. On mismatch the kernel locks until reset().
    BootOutcome secure_boot(const BootImage& image);
    void reset();

    // sp_validate + SAU table construction + sp_apply_static. A partition
    // error aborts the kernel and is rethrown.
    void partition(hw::PlatformState& platform);

    // Builds the WCBs and arms the secure SysTick.
    void init(hw::PlatformState& platform);

    // Loads the first world and branches to it with cleared registers.
    void kick_off(hw::PlatformState& platform);

    // Secure SysTick handler: save, select successor, program SAU, restore.
    SwitchRecord ws_tick(hw::PlatformState& platform);

    // Switch away from a world that cannot continue (blocked or parked).
    SwitchRecord reschedule(hw::PlatformState& platform);

    // Direct switch to a specific world (blocking-send callee, preemption).
    SwitchRecord switch_to(hw::PlatformState& platform, WorldId target, SwitchReason reason);

    // One WCC API call by the running world, entered through the gateway
    // address `entry`. When payload is given it is first loaded into r4-r6,
    // as the caller-side stub does.
    WccResult wcc_call(hw::PlatformState& platform, WorldId caller, WccApi api,
                       std::optional<WorldId> peer, std::optional<Payload> payload,
                       std::optional<hw::Address> entry = std::nullopt);

    SchedulingAction preemptive_route(std::uint32_t irq) const;

    // Removes a world from scheduling for good.
    void park(WorldId w);

    std::optional<WorldId> irq_owner(std::uint32_t irq) const;
    std::optional<WorldId> world_named(std::string_view name) const;
    bool runnable(WorldId w) const;

    // Gateway entry point of an API inside the NSC region.
    hw::Address gateway_entry(WccApi api) const;

private:
    void require_usable(std::string_view op) const;
    void save_context(hw::PlatformState& platform, WorldId w);
    void restore_context(hw::PlatformState& platform, WorldId w);
    void gate_suspended_irqs(hw::PlatformState& platform);
    void idle_cpu(hw::PlatformState& platform);
    std::optional<WorldId> next_runnable_after(WorldId w) const;
    bool send_cycle(WorldId from, WorldId target) const;
    void deliver_to_blocked(WorldId receiver, const Message& msg);
    void scrub_for_return(hw::CpuState& cpu, const std::optional<Payload>& message) const;

    SystemConfig config_;
    KernelState state_;
};

}  // namespace mwtee::kernel
