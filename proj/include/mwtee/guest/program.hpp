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
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mwtee/kernel/kernel.hpp"

// Scripted guest programs. A guest is a list of semantic events; the
// simulator executes them against the hardware model.
namespace mwtee::guest {

using hw::Address;
using kernel::Payload;
using kernel::WccApi;

// Peer name meaning "the sender of the last received message".
inline constexpr std::string_view kReplyPeer = "@sender";

struct Compute {
    std::uint64_t cycles = 0;
};
struct Read {
    Address addr = 0;
};
struct Write {
    Address addr = 0;
    std::uint32_t value = 0;
};
// Arms a periodic timer raising `irq` and enables the irq through the
// NonSecure NVIC alias.
struct ConfigureTimer {
    std::uint64_t period_cycles = 0;
    std::uint32_t irq = 0;
};
struct WaitIrq {
    std::uint32_t irq = 0;
};
struct IrqHandlerBody {
    std::uint64_t cycles = 0;
};
// Sends without a payload echo the last received message.
struct WccCall {
    WccApi api = WccApi::RecvNonBlocking;
    std::string peer;
    std::optional<Payload> payload;
};
struct MarkStart {};
struct MarkEnd {};
struct LoopForever {};

using GuestEvent = std::variant<Compute, Read, Write, ConfigureTimer, WaitIrq, IrqHandlerBody, WccCall,
                                MarkStart, MarkEnd, LoopForever>;

std::string describe(const GuestEvent& event);

struct WorkloadProgram {
    std::string name;
    std::vector<GuestEvent> events;
    std::uint64_t warmup_cycles = 0;     // Compute before MarkStart
    std::optional<std::size_t> loop_start;  // wrap target past the last event

    // Compute > 0, MarkStart before MarkEnd, loop_start in range, loop body
    // not instantaneous. Throws std::invalid_argument. Also refreshes
    // warmup_cycles.
    void finalize();

    bool measured() const;
};

class EndOfProgram : public std::out_of_range {
public:
    EndOfProgram() : std::out_of_range("end of program") {}
};

class UnknownWorkload : public std::invalid_argument {
public:
    explicit UnknownWorkload(const std::string& name) : std::invalid_argument("unknown workload '" + name + "'") {}
};

struct Step {
    GuestEvent event;
    std::size_t next = 0;
};

// Pure lookup. LoopForever yields Compute(quantum) and keeps the cursor in
// place; past the last event the cursor wraps to loop_start if set.
Step guest_step(const WorkloadProgram& program, std::size_t cursor, std::uint64_t quantum);

// busyloop, bench, timer_blinker, console, echo_net, rtos_servo, script.
WorkloadProgram builtin_workload(std::string_view name, const nlohmann::json& params = nlohmann::json::object());

// Line-oriented script: one event per line, '#' comments. `loop` marks the
// point execution wraps back to.
WorkloadProgram parse_script(std::string_view name, std::string_view text);

Payload parse_payload(std::string_view hex);
Payload text_payload(std::string_view text);

}  // namespace mwtee::guest
