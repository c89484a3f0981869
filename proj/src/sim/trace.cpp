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

#include "mwtee/sim/trace.hpp"

namespace mwtee::sim {

std::string_view to_string(TraceKind kind) {
    switch (kind) {
    case TraceKind::BootBegin:
        return "BootBegin";
    case TraceKind::BootEnd:
        return "BootEnd";
    case TraceKind::BootLocked:
        return "BootLocked";
    case TraceKind::BootAborted:
        return "BootAborted";
    case TraceKind::KickOff:
        return "KickOff";
    case TraceKind::SwitchBegin:
        return "SwitchBegin";
    case TraceKind::SwitchEnd:
        return "SwitchEnd";
    case TraceKind::IrqRaised:
        return "IrqRaised";
    case TraceKind::IrqEntered:
        return "IrqEntered";
    case TraceKind::MarkStart:
        return "MarkStart";
    case TraceKind::MarkEnd:
        return "MarkEnd";
    case TraceKind::Fault:
        return "Fault";
    case TraceKind::WccCall:
        return "WccCall";
    case TraceKind::WccReturn:
        return "WccReturn";
    case TraceKind::WorldFinished:
        return "WorldFinished";
    case TraceKind::HorizonReached:
        return "HorizonReached";
    case TraceKind::Completed:
        return "Completed";
    case TraceKind::Stalled:
        return "Stalled";
    }
    return "?";
}

std::string format_record(const TraceRecord& rec) {
    std::string s = std::to_string(rec.cycle) + " " + std::string(to_string(rec.kind)) + " world=" +
                    std::to_string(rec.world) + " irq=" + std::to_string(rec.irq) +
                    " value=" + std::to_string(rec.value);
    if (!rec.detail.empty())
        s += " " + rec.detail;
    return s;
}

}  // namespace mwtee::sim
