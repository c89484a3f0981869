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

#include "mwtee/sim/metrics.hpp"

#include <cstdio>
#include <set>

namespace mwtee::sim {

OverheadRatio overhead_ratio(const Trace& trace, kernel::WorldId world) {
    const int w = static_cast<int>(world);
    std::optional<std::uint64_t> start;
    for (const auto& rec : trace) {
        if (rec.world != w)
            continue;
        if (rec.kind == TraceKind::MarkStart) {
            start = rec.cycle;
        } else if (rec.kind == TraceKind::MarkEnd && start) {
            if (rec.value == 0)
                throw MissingMarks("world " + std::to_string(world) + ": no native cycles between the marks");
            return {rec.cycle - *start, rec.value};
        }
    }
    throw MissingMarks("world " + std::to_string(world) + " has no MarkStart/MarkEnd pair");
}

std::vector<LatencySample> latency_samples(const Trace& trace, std::uint32_t irq) {
    std::vector<LatencySample> out;
    for (const auto& rec : trace) {
        if (rec.kind == TraceKind::IrqEntered && rec.irq == irq)
            out.push_back({irq, rec.cycle - rec.value, rec.cycle, rec.value});
    }
    return out;
}

double LatencyHistogram::frequency(std::uint64_t latency) const {
    const auto it = bins.find(latency);
    return it == bins.end() || total == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

LatencyHistogram latency_histogram(const Trace& trace, std::uint32_t irq) {
    LatencyHistogram h;
    for (const auto& s : latency_samples(trace, irq)) {
        ++h.bins[s.latency];
        ++h.total;
    }
    if (h.total == 0)
        throw NoSamples("no latency samples for irq " + std::to_string(irq));
    return h;
}

std::uint64_t worst_case_latency(std::uint64_t n_worlds, std::uint64_t tick, std::uint64_t sched) {
    if (n_worlds == 0)
        throw std::invalid_argument("worst_case_latency needs at least one world");
    return (n_worlds - 1) * tick + sched;
}

double worst_case_latency(std::uint64_t n_worlds, double tick, double sched) {
    if (n_worlds == 0)
        throw std::invalid_argument("worst_case_latency needs at least one world");
    return static_cast<double>(n_worlds - 1) * tick + sched;
}

MetricsReport compute_metrics(const RunResult& result, const kernel::SystemConfig& config, const CostModel& cost) {
    MetricsReport m;
    m.outcome = std::string(to_string(result.outcome));
    m.tick_cycles = config.tick_cycles();
    m.boot_cycles = result.boot_cycles;
    m.kick_off_cycle = result.kick_off_cycle;
    m.end_cycle = result.end_cycle;
    m.switch_count = result.switch_count;
    m.privileged_cycles = result.cycles.kernel;
    m.cycles = result.cycles;
    m.checks = result.checks;
    m.worst_case_latency_cycles = worst_case_latency(config.worlds.size(), m.tick_cycles, cost.world_switch_cycles);

    for (std::size_t w = 0; w < config.worlds.size(); ++w) {
        WorldMetrics wm;
        wm.name = config.worlds[w].name;
        wm.workload = config.worlds[w].workload.name;
        if (w < result.worlds.size()) {
            const auto& s = result.worlds[w];
            wm.busy_cycles = s.busy_cycles;
            wm.slots = s.slots;
            wm.irqs_entered = s.irqs_entered;
            wm.wcc_calls = s.wcc_calls;
            wm.finished = s.finished;
            wm.faulted = s.faulted;
        }
        try {
            const auto r = overhead_ratio(result.trace, w);
            wm.native_cycles = r.native;
            wm.measured_cycles = r.measured;
            wm.overhead_ratio = r.value();
        } catch (const MissingMarks&) {
        }
        m.worlds.push_back(std::move(wm));
    }

    std::set<std::uint32_t> irqs;
    for (const auto& rec : result.trace) {
        if (rec.kind == TraceKind::IrqEntered)
            irqs.insert(rec.irq);
    }
    for (const auto irq : irqs) {
        IrqMetrics im;
        im.irq = irq;
        for (const auto& w : config.worlds) {
            if (w.owns_irq(irq))
                im.owner = w.name;
        }
        im.histogram = latency_histogram(result.trace, irq);
        m.irqs.push_back(std::move(im));
    }

    for (const auto& f : result.faults) {
        m.faults.push_back({f.cycle, config.worlds.at(f.world).name, f.addr, std::string(hw::to_string(f.outcome)),
                            f.cause});
    }

    if (m.tick_cycles > 0 && cost.world_switch_cycles * 100 >= m.tick_cycles) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "single-world switch floor is %.6f%% at %llu-cycle ticks, not below 1%%",
                      100.0 * static_cast<double>(cost.world_switch_cycles) / static_cast<double>(m.tick_cycles),
                      static_cast<unsigned long long>(m.tick_cycles));
        m.notes.emplace_back(buf);
    }
    return m;
}

}  // namespace mwtee::sim
