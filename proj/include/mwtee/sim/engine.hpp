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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwtee/guest/program.hpp"
#include "mwtee/hw/platform.hpp"
#include "mwtee/kernel/kernel.hpp"
#include "mwtee/kernel/partition.hpp"
#include "mwtee/sim/cost_model.hpp"
#include "mwtee/sim/trace.hpp"

namespace mwtee::sim {

inline constexpr std::uint64_t kDefaultHorizon = 100'000'000;

// Handed to the observer after kick-off and after every completed switch.
struct SwitchProbe {
    std::uint64_t cycle = 0;
    const hw::PlatformState& platform;
    const kernel::Kernel& kernel;
    kernel::SwitchRecord record;
};

using SwitchObserver = std::function<void(const SwitchProbe&)>;

struct RunOptions {
    std::uint64_t horizon = kDefaultHorizon;  // cycles after kick-off, inclusive
    std::optional<kernel::BootImage> image;   // default: a correctly signed image
    SwitchObserver observer;
};

enum class RunOutcome : std::uint8_t { Completed, Horizon, Stalled, Locked, Aborted };

std::string_view to_string(RunOutcome outcome);

struct FaultRecord {
    std::uint64_t cycle = 0;
    kernel::WorldId world = 0;
    hw::Address addr = 0;
    hw::AccessOutcome outcome = hw::AccessOutcome::SecurityFault;
    std::string cause;
};

// Counters of the invariant checks the engine performs while running.
struct CheckCounters {
    std::uint64_t hygiene_checks = 0;
    std::uint64_t hygiene_violations = 0;
    std::uint64_t alias_checks = 0;
    std::uint64_t alias_violations = 0;
    std::uint64_t gate_checks = 0;
    std::uint64_t gate_violations = 0;

    std::uint64_t violations() const { return hygiene_violations + alias_violations + gate_violations; }
};

struct WorldStats {
    std::uint64_t busy_cycles = 0;
    std::uint64_t slots = 0;  // times switched in
    std::uint64_t irqs_entered = 0;
    std::uint64_t wcc_calls = 0;
    bool finished = false;
    bool faulted = false;
};

// Cycle accounting; busy + irq_entry + kernel + idle = end_cycle.
struct CycleBuckets {
    std::uint64_t busy = 0;
    std::uint64_t irq_entry = 0;
    std::uint64_t kernel = 0;
    std::uint64_t idle = 0;

    std::uint64_t total() const { return busy + irq_entry + kernel + idle; }
};

struct RunResult {
    RunOutcome outcome = RunOutcome::Completed;
    std::string error;  // partition error text for Aborted
    Trace trace;
    std::uint64_t boot_cycles = 0;
    std::uint64_t kick_off_cycle = 0;
    std::uint64_t end_cycle = 0;
    std::uint64_t switch_count = 0;
    CycleBuckets cycles;
    std::vector<WorldStats> worlds;
    std::vector<FaultRecord> faults;
    CheckCounters checks;

    bool security_fault() const;
};

// Values a world's computation leaves in r0-r12. The owner is recoverable,
// so a value showing up in another world's registers is a detectable leak.
std::uint32_t register_tag(kernel::WorldId w, std::uint32_t seq);
std::optional<kernel::WorldId> tag_owner(std::uint32_t value);

// One program per configured world, from each world's workload spec.
std::vector<guest::WorkloadProgram> build_workloads(const kernel::SystemConfig& config);

// Boot, partition, kick-off, then guest execution interleaved with
// SysTick-driven world switches until every measured workload reaches its
// MarkEnd, no world can run any more, or the horizon passes.
RunResult run(const kernel::SystemConfig& config, const std::vector<guest::WorkloadProgram>& workloads,
              const CostModel& cost, const RunOptions& options = {});

// The boot image used when none is supplied: a stand-in payload derived from
// the configuration, correctly signed.
kernel::BootImage default_boot_image(const kernel::SystemConfig& config);

}  // namespace mwtee::sim
