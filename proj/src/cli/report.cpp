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

#include "mwtee/cli/report.hpp"

#include <cstdio>
#include <sstream>

namespace mwtee::cli {

using nlohmann::json;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void dump_into(const json& j, std::string& out, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
    const std::string close_pad(2 * static_cast<std::size_t>(depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad + json(key).dump() + ": ";
            dump_into(value, out, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0)
                out += ",\n";
            out += pad;
            dump_into(j[i], out, depth + 1);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case json::value_t::number_float:
        out += fixed6(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string dump_json(const json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

json metrics_to_json(const sim::MetricsReport& m) {
    json j;
    j["outcome"] = m.outcome;
    j["tick_cycles"] = m.tick_cycles;
    j["boot_cycles"] = m.boot_cycles;
    j["kick_off_cycle"] = m.kick_off_cycle;
    j["end_cycle"] = m.end_cycle;
    j["switch_count"] = m.switch_count;
    j["privileged_cycles"] = m.privileged_cycles;
    j["worst_case_latency_cycles"] = m.worst_case_latency_cycles;
    j["cycles"] = {{"busy", m.cycles.busy},
                   {"irq_entry", m.cycles.irq_entry},
                   {"kernel", m.cycles.kernel},
                   {"idle", m.cycles.idle}};
    j["checks"] = {{"hygiene_checks", m.checks.hygiene_checks},
                   {"hygiene_violations", m.checks.hygiene_violations},
                   {"alias_checks", m.checks.alias_checks},
                   {"alias_violations", m.checks.alias_violations},
                   {"gate_checks", m.checks.gate_checks},
                   {"gate_violations", m.checks.gate_violations}};

    json worlds = json::array();
    for (const auto& w : m.worlds) {
        json jw = {{"name", w.name},
                   {"workload", w.workload},
                   {"busy_cycles", w.busy_cycles},
                   {"slots", w.slots},
                   {"irqs_entered", w.irqs_entered},
                   {"wcc_calls", w.wcc_calls},
                   {"finished", w.finished},
                   {"faulted", w.faulted}};
        if (w.native_cycles)
            jw["native_cycles"] = *w.native_cycles;
        if (w.measured_cycles)
            jw["measured_cycles"] = *w.measured_cycles;
        if (w.overhead_ratio)
            jw["overhead_ratio"] = *w.overhead_ratio;
        worlds.push_back(std::move(jw));
    }
    j["worlds"] = std::move(worlds);

    if (!m.irqs.empty()) {
        json irqs = json::array();
        for (const auto& irq : m.irqs) {
            json bins = json::array();
            for (const auto& [latency, count] : irq.histogram.bins)
                bins.push_back({{"latency", latency}, {"count", count}, {"frequency", irq.histogram.frequency(latency)}});
            irqs.push_back({{"irq", irq.irq}, {"owner", irq.owner}, {"samples", irq.histogram.total},
                            {"histogram", std::move(bins)}});
        }
        j["irqs"] = std::move(irqs);
    }

    json faults = json::array();
    for (const auto& f : m.faults)
        faults.push_back({{"cycle", f.cycle}, {"world", f.world}, {"addr", kernel::format_address(f.addr)},
                          {"outcome", f.outcome}, {"cause", f.cause}});
    j["faults"] = std::move(faults);
    j["notes"] = m.notes;
    return j;
}

sim::MetricsReport metrics_from_json(const json& j) {
    sim::MetricsReport m;
    m.outcome = j.at("outcome").get<std::string>();
    m.tick_cycles = j.at("tick_cycles").get<std::uint64_t>();
    m.boot_cycles = j.at("boot_cycles").get<std::uint64_t>();
    m.kick_off_cycle = j.at("kick_off_cycle").get<std::uint64_t>();
    m.end_cycle = j.at("end_cycle").get<std::uint64_t>();
    m.switch_count = j.at("switch_count").get<std::uint64_t>();
    m.privileged_cycles = j.at("privileged_cycles").get<std::uint64_t>();
    m.worst_case_latency_cycles = j.at("worst_case_latency_cycles").get<std::uint64_t>();
    const auto& c = j.at("cycles");
    m.cycles = {c.at("busy").get<std::uint64_t>(), c.at("irq_entry").get<std::uint64_t>(),
                c.at("kernel").get<std::uint64_t>(), c.at("idle").get<std::uint64_t>()};
    const auto& k = j.at("checks");
    m.checks.hygiene_checks = k.at("hygiene_checks").get<std::uint64_t>();
    m.checks.hygiene_violations = k.at("hygiene_violations").get<std::uint64_t>();
    m.checks.alias_checks = k.at("alias_checks").get<std::uint64_t>();
    m.checks.alias_violations = k.at("alias_violations").get<std::uint64_t>();
    m.checks.gate_checks = k.at("gate_checks").get<std::uint64_t>();
    m.checks.gate_violations = k.at("gate_violations").get<std::uint64_t>();

    for (const auto& jw : j.at("worlds")) {
        sim::WorldMetrics w;
        w.name = jw.at("name").get<std::string>();
        w.workload = jw.at("workload").get<std::string>();
        w.busy_cycles = jw.at("busy_cycles").get<std::uint64_t>();
        w.slots = jw.at("slots").get<std::uint64_t>();
        w.irqs_entered = jw.at("irqs_entered").get<std::uint64_t>();
        w.wcc_calls = jw.at("wcc_calls").get<std::uint64_t>();
        w.finished = jw.at("finished").get<bool>();
        w.faulted = jw.at("faulted").get<bool>();
        if (jw.contains("native_cycles"))
            w.native_cycles = jw["native_cycles"].get<std::uint64_t>();
        if (jw.contains("measured_cycles"))
            w.measured_cycles = jw["measured_cycles"].get<std::uint64_t>();
        if (jw.contains("overhead_ratio"))
            w.overhead_ratio = jw["overhead_ratio"].get<double>();
        m.worlds.push_back(std::move(w));
    }
    if (j.contains("irqs")) {
        for (const auto& ji : j["irqs"]) {
            sim::IrqMetrics irq;
            irq.irq = ji.at("irq").get<std::uint32_t>();
            irq.owner = ji.at("owner").get<std::string>();
            irq.histogram.total = ji.at("samples").get<std::uint64_t>();
            for (const auto& bin : ji.at("histogram"))
                irq.histogram.bins[bin.at("latency").get<std::uint64_t>()] = bin.at("count").get<std::uint64_t>();
            m.irqs.push_back(std::move(irq));
        }
    }
    for (const auto& jf : j.at("faults")) {
        m.faults.push_back({jf.at("cycle").get<std::uint64_t>(), jf.at("world").get<std::string>(),
                            static_cast<std::uint32_t>(std::stoul(jf.at("addr").get<std::string>(), nullptr, 16)),
                            jf.at("outcome").get<std::string>(), jf.at("cause").get<std::string>()});
    }
    m.notes = j.at("notes").get<std::vector<std::string>>();
    return m;
}

json report_to_json(const ReportFile& report) {
    json j;
    j["tool"] = {{"name", report.tool}, {"version", report.version}};
    if (!report.scenario.empty())
        j["scenario"] = report.scenario;
    j["config"] = report.config;
    j["cost_model"] = report.cost.to_json();
    if (report.sweep) {
        json points = json::array();
        for (const auto& p : report.points)
            points.push_back({{"tick_us", p.tick_us}, {"metrics", metrics_to_json(p.metrics)}});
        j["sweep"] = std::move(points);
    } else if (!report.points.empty()) {
        j["metrics"] = metrics_to_json(report.points.front().metrics);
    }
    return j;
}

ReportFile report_from_json(const json& j) {
    ReportFile r;
    r.tool = j.at("tool").at("name").get<std::string>();
    r.version = j.at("tool").at("version").get<std::string>();
    r.scenario = get_or<std::string>(j, "scenario", "");
    r.config = j.at("config");
    std::map<std::string, std::uint64_t> costs;
    for (const auto& [key, value] : j.at("cost_model").items())
        costs[key] = value.get<std::uint64_t>();
    r.cost = sim::CostModel::with_overrides(costs);
    if (j.contains("sweep")) {
        r.sweep = true;
        for (const auto& p : j["sweep"])
            r.points.push_back({p.at("tick_us").get<double>(), metrics_from_json(p.at("metrics"))});
    } else if (j.contains("metrics")) {
        r.points.push_back({r.config.value("tick_us", 0.0), metrics_from_json(j["metrics"])});
    }
    return r;
}

std::string emit_csv(const ReportFile& report) {
    std::ostringstream out;
    out << "tick_us,kind,subject,metric,value\n";
    for (const auto& p : report.points) {
        const std::string tick = fixed6(p.tick_us);
        const auto& m = p.metrics;
        auto row = [&](const char* kind, const std::string& subject, const std::string& metric,
                       const std::string& value) {
            out << tick << ',' << kind << ',' << csv_field(subject) << ',' << csv_field(metric) << ','
                << csv_field(value) << '\n';
        };
        auto num = [](std::uint64_t v) { return std::to_string(v); };

        row("run", "-", "outcome", m.outcome);
        row("run", "-", "tick_cycles", num(m.tick_cycles));
        row("run", "-", "boot_cycles", num(m.boot_cycles));
        row("run", "-", "end_cycle", num(m.end_cycle));
        row("run", "-", "switch_count", num(m.switch_count));
        row("run", "-", "privileged_cycles", num(m.privileged_cycles));
        row("run", "-", "worst_case_latency_cycles", num(m.worst_case_latency_cycles));
        row("run", "-", "faults", num(m.faults.size()));
        for (const auto& w : m.worlds) {
            row("world", w.name, "busy_cycles", num(w.busy_cycles));
            row("world", w.name, "slots", num(w.slots));
            row("world", w.name, "irqs_entered", num(w.irqs_entered));
            row("world", w.name, "wcc_calls", num(w.wcc_calls));
            if (w.native_cycles)
                row("world", w.name, "native_cycles", num(*w.native_cycles));
            if (w.measured_cycles)
                row("world", w.name, "measured_cycles", num(*w.measured_cycles));
            if (w.overhead_ratio)
                row("world", w.name, "overhead_ratio", fixed6(*w.overhead_ratio));
        }
        for (const auto& irq : m.irqs) {
            for (const auto& [latency, count] : irq.histogram.bins)
                row("irq", std::to_string(irq.irq), "latency_" + std::to_string(latency), num(count));
        }
    }
    return out.str();
}

std::string emit_report(const ReportFile& report, ReportFormat format) {
    return format == ReportFormat::Json ? dump_json(report_to_json(report)) : emit_csv(report);
}

}  // namespace mwtee::cli
