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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mwtee/kernel/config.hpp"
#include "mwtee/sim/cost_model.hpp"
#include "mwtee/sim/engine.hpp"
#include "mwtee/sim/trace.hpp"

namespace mwtee::sim {

class MissingMarks : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NoSamples : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// measured / native, kept as integers so exact comparisons stay exact.
struct OverheadRatio {
    std::uint64_t measured = 0;
    std::uint64_t native = 0;

    double value() const { return static_cast<double>(measured) / static_cast<double>(native); }
};

// (MarkEnd - MarkStart) over the native cycles recorded with MarkEnd.
OverheadRatio overhead_ratio(const Trace& trace, kernel::WorldId world);

struct LatencySample {
    std::uint32_t irq = 0;
    std::uint64_t raised_cycle = 0;
    std::uint64_t entered_cycle = 0;
    std::uint64_t latency = 0;
};

std::vector<LatencySample> latency_samples(const Trace& trace, std::uint32_t irq);

struct LatencyHistogram {
    std::map<std::uint64_t, std::uint64_t> bins;  // exact latency -> count
    std::uint64_t total = 0;

    double frequency(std::uint64_t latency) const;
    std::uint64_t max() const { return bins.empty() ? 0 : bins.rbegin()->first; }
};

LatencyHistogram latency_histogram(const Trace& trace, std::uint32_t irq);

// (n - 1) * tick + sched.
std::uint64_t worst_case_latency(std::uint64_t n_worlds, std::uint64_t tick, std::uint64_t sched);
double worst_case_latency(std::uint64_t n_worlds, double tick, double sched);

struct WorldMetrics {
    std::string name;
    std::string workload;
    std::uint64_t busy_cycles = 0;
    std::uint64_t slots = 0;
    std::uint64_t irqs_entered = 0;
    std::uint64_t wcc_calls = 0;
    bool finished = false;
    bool faulted = false;
    std::optional<std::uint64_t> native_cycles;
    std::optional<std::uint64_t> measured_cycles;
    std::optional<double> overhead_ratio;
};

struct IrqMetrics {
    std::uint32_t irq = 0;
    std::string owner;
    LatencyHistogram histogram;
};

struct FaultEntry {
    std::uint64_t cycle = 0;
    std::string world;
    std::uint32_t addr = 0;
    std::string outcome;
    std::string cause;
};

struct MetricsReport {
    std::string outcome;
    std::uint64_t tick_cycles = 0;
    std::uint64_t boot_cycles = 0;
    std::uint64_t kick_off_cycle = 0;
    std::uint64_t end_cycle = 0;
    std::uint64_t switch_count = 0;
    std::uint64_t privileged_cycles = 0;
    std::uint64_t worst_case_latency_cycles = 0;
    CycleBuckets cycles;
    CheckCounters checks;
    std::vector<WorldMetrics> worlds;
    std::vector<IrqMetrics> irqs;
    std::vector<FaultEntry> faults;
    std::vector<std::string> notes;
};

MetricsReport compute_metrics(const RunResult& result, const kernel::SystemConfig& config, const CostModel& cost);

}  // namespace mwtee::sim
