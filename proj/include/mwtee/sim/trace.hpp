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
#include <vector>

namespace mwtee::sim {

enum class TraceKind : std::uint8_t {
    BootBegin,
    BootEnd,
    BootLocked,
    BootAborted,
    KickOff,
    SwitchBegin,
    SwitchEnd,
    IrqRaised,
    IrqEntered,
    MarkStart,
    MarkEnd,
    Fault,
    WccCall,
    WccReturn,
    WorldFinished,
    HorizonReached,
    Completed,
    Stalled,
};

std::string_view to_string(TraceKind kind);

inline constexpr int kKernel = -1;

// One cycle-stamped record. SwitchBegin carries the outgoing world and
// SwitchEnd the incoming one (kKernel when idle); detail holds the reason.
// The meaning of `value` depends on the kind:
//   IrqEntered       latency in cycles (handler start - first raise)
//   MarkEnd          native cycles executed between the marks
//   Fault            faulting address
//   WccCall          status code
struct TraceRecord {
    std::uint64_t cycle = 0;
    int world = kKernel;
    TraceKind kind = TraceKind::BootBegin;
    std::uint32_t irq = 0;
    std::uint64_t value = 0;
    std::string detail;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

std::string format_record(const TraceRecord& rec);

}  // namespace mwtee::sim
