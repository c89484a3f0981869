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

#include "mwtee/cli/app.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mwtee/cli/report.hpp"
#include "mwtee/cli/scenarios.hpp"
#include "mwtee/sim/engine.hpp"
#include "mwtee/sim/metrics.hpp"

namespace mwtee::cli {

namespace {

struct Args {
    std::string config_path;
    std::string scenario;
    std::optional<std::uint64_t> horizon;
    std::string out_path;
    std::string format = "json";
    std::string sweep;
    std::string mode;
    std::optional<std::size_t> worlds;
    std::string tick;
    bool tamper_boot = false;
    bool dump_config = false;
};

struct PointOutcome {
    ReportPoint point;
    int code = kExitOk;
};

PointOutcome simulate(const kernel::SystemConfig& config, std::uint64_t horizon, bool tamper, std::ostream& err) {
    const auto cost = sim::CostModel::with_overrides(config.cost_overrides);
    const auto workloads = sim::build_workloads(config);
    sim::RunOptions options;
    options.horizon = horizon;
    if (tamper) {
        auto image = sim::default_boot_image(config);
        image.flip_bit(0);
        options.image = std::move(image);
    }
    const auto result = sim::run(config, workloads, cost, options);

    PointOutcome o;
    o.point.tick_us = config.tick_us;
    o.point.metrics = sim::compute_metrics(result, config, cost);
    switch (result.outcome) {
    case sim::RunOutcome::Aborted:
        err << "error: " << result.error << "\n";
        o.code = kExitConfig;
        break;
    case sim::RunOutcome::Locked:
        err << "error: secure boot failed; kernel locked until reset\n";
        o.code = kExitLocked;
        break;
    default:
        if (result.security_fault()) {
            for (const auto& f : result.faults)
                err << "fault: world " << config.worlds.at(f.world).name << " at "
                    << kernel::format_address(f.addr) << ": " << f.cause << "\n";
            o.code = kExitSecurityFault;
        }
        break;
    }
    return o;
}

int severity(int code) {
    // Worst outcome wins when several sweep points disagree.
    switch (code) {
    case kExitConfig:
        return 3;
    case kExitLocked:
        return 2;
    case kExitSecurityFault:
        return 1;
    default:
        return 0;
    }
}

}  // namespace

int run_app(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    Args a;
    CLI::App app{"Multi-world TrustZone-M kernel simulator", std::string(kToolName)};
    app.set_version_flag("--version", std::string(kToolVersion));
    auto* config_opt = app.add_option("--config", a.config_path, "System configuration (JSON)");
    auto* scenario_opt =
        app.add_option("--scenario", a.scenario, "Bundled scenario")->check(CLI::IsMember(scenario_names()));
    config_opt->excludes(scenario_opt);
    app.add_option("--horizon", a.horizon, "Cycles to simulate after kick-off");
    app.add_option("--out", a.out_path, "Report path (default: stdout)");
    app.add_option("--format", a.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--sweep", a.sweep, "Comma-separated tick list, e.g. 0.5ms,1ms,2ms,10ms");
    app.add_option("--mode", a.mode, "Scheduler mode override")
        ->check(CLI::IsMember({"round_robin", "priority_preemptive"}));
    app.add_option("--worlds", a.worlds, "World count for the bench and latency scenarios")
        ->check(CLI::Range(1, 8))
        ->needs(scenario_opt);
    app.add_option("--tick", a.tick, "Tick override, e.g. 0.5ms");
    app.add_flag("--tamper-boot", a.tamper_boot, "Corrupt one bit of the boot image");
    app.add_flag("--dump-config", a.dump_config, "Print the effective configuration and exit");

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (a.config_path.empty() == a.scenario.empty()) {
        err << "error: exactly one of --config or --scenario is required\n";
        return kExitUsage;
    }

    kernel::SystemConfig config;
    std::uint64_t horizon = sim::kDefaultHorizon;
    std::vector<double> ticks;
    try {
        std::optional<double> tick_override;
        if (!a.tick.empty())
            tick_override = parse_duration_us(a.tick);
        if (!a.sweep.empty())
            ticks = parse_sweep(a.sweep);

        if (!a.scenario.empty()) {
            auto s = scenario_named(a.scenario, a.worlds, tick_override);
            config = s->config;
            horizon = s->horizon;
        } else {
            std::ifstream in(a.config_path);
            if (!in) {
                err << "error: cannot read " << a.config_path << "\n";
                return kExitUsage;
            }
            std::stringstream text;
            text << in.rdbuf();
            config = kernel::parse_config(text.str());
            if (tick_override)
                config.tick_us = *tick_override;
        }
        if (!a.mode.empty())
            config.scheduler_mode = a.mode == "round_robin" ? kernel::SchedulerMode::RoundRobin
                                                            : kernel::SchedulerMode::PriorityPreemptive;
        if (a.horizon)
            horizon = *a.horizon;
        kernel::validate_config(config);
        (void)sim::CostModel::with_overrides(config.cost_overrides);
        (void)sim::build_workloads(config);
    } catch (const kernel::ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return a.scenario.empty() ? kExitConfig : kExitUsage;
    }

    if (a.dump_config) {
        out << dump_json(kernel::config_to_json(config));
        return kExitOk;
    }

    ReportFile report;
    report.scenario = a.scenario;
    report.config = kernel::config_to_json(config);
    report.cost = sim::CostModel::with_overrides(config.cost_overrides);
    report.sweep = !ticks.empty();
    if (ticks.empty())
        ticks.push_back(config.tick_us);

    int code = kExitOk;
    for (const double tick : ticks) {
        kernel::SystemConfig point_config = config;
        point_config.tick_us = tick;
        PointOutcome o;
        try {
            kernel::validate_config(point_config);
            o = simulate(point_config, horizon, a.tamper_boot, err);
        } catch (const kernel::ConfigError& e) {
            err << "error: " << e.what() << "\n";
            return kExitConfig;
        }
        if (o.code == kExitConfig)
            return kExitConfig;  // nothing ran; no report
        if (severity(o.code) > severity(code))
            code = o.code;
        report.points.push_back(std::move(o.point));
    }

    const std::string text = emit_report(report, a.format == "csv" ? ReportFormat::Csv : ReportFormat::Json);
    if (a.out_path.empty()) {
        out << text;
    } else {
        std::ofstream file(a.out_path, std::ios::binary);
        if (!file || !(file << text)) {
            err << "error: cannot write " << a.out_path << "\n";
            return kExitUsage;
        }
    }
    return code;
}

}  // namespace mwtee::cli
