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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mwtee/sim/metrics.hpp"
#include "support.hpp"

using namespace mwtee::sim;
using mwtee::kernel::SystemConfig;
using mwtee::testing::busy_worlds;
using mwtee::testing::count_kind;
using mwtee::testing::Rng;
using mwtee::testing::simulate;
using mwtee::testing::workload;

namespace {

TraceRecord rec(std::uint64_t cycle, int world, TraceKind kind, std::uint64_t value = 0, std::uint32_t irq = 0) {
    return {cycle, world, kind, irq, value, {}};
}

// A random small system: 1-4 worlds mixing busy loops, blinkers, scripted
// compute and message exchange.
SystemConfig random_system(Rng& rng) {
    const std::size_t n = rng.between(1, 4);
    const double tick = std::array{100.0, 250.0, 500.0, 1000.0}[rng.below(4)];
    auto c = busy_worlds(n, tick);
    for (std::size_t i = 0; i < n; ++i) {
        switch (rng.below(4)) {
        case 0:
            break;
        case 1:
            c.worlds[i].workload = workload("timer_blinker", {{"period", rng.between(5000, 60000)},
                                                              {"irq", 10 + i},
                                                              {"setup", rng.below(3000)}});
            c.worlds[i].irqs = {{static_cast<std::uint32_t>(10 + i), 0x40}};
            break;
        case 2:
            c.worlds[i].workload = workload(
                "script", {{"text", "compute " + std::to_string(rng.between(1, 9000)) + "\nloop\nwrite 0x" +
                                        [&] {
                                            char b[16];
                                            std::snprintf(b, sizeof b, "%08x", 0x3000'0000u + 0x1'0000u * unsigned(i));
                                            return std::string(b);
                                        }() + " 1\ncompute " + std::to_string(rng.between(1, 5000)) + "\n"}});
            break;
        default:
            if (n > 1) {
                const auto peer = "w" + std::to_string((i + 1) % n + 1);
                c.worlds[i].workload = workload(
                    "script", {{"text", "loop\ncompute " + std::to_string(rng.between(100, 4000)) +
                                            "\nwcc send_nb " + peer + " 0102030405060708090a0b0c\nwcc recv_nb\n"}});
            }
            break;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("engine: a 1M-cycle horizon at 20000-cycle ticks takes 50 switches") {
    const auto r = simulate(busy_worlds(2, 500), 1'000'000);
    CHECK(r.outcome == RunOutcome::Horizon);
    CHECK(count_kind(r.trace, TraceKind::SwitchBegin) == 50);
    CHECK(r.switch_count == 50);
    CHECK(r.worlds[0].slots == 26);  // kick-off counts as the first slot
    CHECK(r.worlds[1].slots == 25);
}

TEST_CASE("engine: boot cost and first tick") {
    const auto r = simulate(busy_worlds(3, 500), 100'000);
    CHECK(r.boot_cycles == 7749 + 2 * 1236);
    CHECK(r.kick_off_cycle == r.boot_cycles);
    for (const auto& t : r.trace) {
        if (t.kind == TraceKind::SwitchBegin) {
            CHECK(t.cycle == r.kick_off_cycle + 20000);
            break;
        }
    }
    CHECK(r.checks.violations() == 0);
}

TEST_CASE("engine: a tampered image leaves only the lock record") {
    const auto config = busy_worlds(2);
    auto image = default_boot_image(config);
    image.flip_bit(3);
    RunOptions options;
    options.image = image;
    const auto r = run(config, build_workloads(config), CostModel{}, options);
    CHECK(r.outcome == RunOutcome::Locked);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].kind == TraceKind::BootLocked);
    CHECK(r.switch_count == 0);
}

TEST_CASE("engine: overlapping regions abort the boot") {
    auto config = busy_worlds(2);
    config.worlds[1].regions[1].base = config.worlds[0].regions[1].base;
    const auto r = run(config, build_workloads(config), CostModel{}, {});
    CHECK(r.outcome == RunOutcome::Aborted);
    CHECK(r.error.find("overlap") != std::string::npos);
    CHECK(r.trace.back().kind == TraceKind::BootAborted);
}

TEST_CASE("engine: an illegal access parks only the offender") {
    auto config = busy_worlds(3, 500);
    // World 2 pokes world 1's data.
    config.worlds[1].workload = workload("script", {{"text", "compute 500\nwrite 0x30000000 0xbad\nloop_forever\n"}});
    const auto r = simulate(config, 400'000);
    REQUIRE(r.faults.size() == 1);
    CHECK(r.faults[0].world == 1);
    CHECK(r.faults[0].addr == 0x3000'0000);
    CHECK(r.faults[0].outcome == mwtee::hw::AccessOutcome::SecurityFault);
    CHECK(r.worlds[1].faulted);
    CHECK(r.security_fault());
    CHECK(r.worlds[1].slots == 1);
    CHECK(r.worlds[0].slots > 5);
    CHECK(r.worlds[2].slots > 5);
    CHECK(count_kind(r.trace, TraceKind::Fault) == 1);
}

TEST_CASE("engine: unmapped access is a bus fault, not a security fault") {
    auto config = busy_worlds(1, 500);
    config.worlds[0].workload = workload("script", {{"text", "read 0x60000000\n"}});
    const auto r = simulate(config, 100'000);
    REQUIRE(r.faults.size() == 1);
    CHECK(r.faults[0].outcome == mwtee::hw::AccessOutcome::BusFault);
    CHECK_FALSE(r.security_fault());
    CHECK(r.outcome == RunOutcome::Completed);  // parked, not waiting on anyone
}

TEST_CASE("engine: a finished program ends the run") {
    auto config = busy_worlds(1, 500);
    config.worlds[0].workload = workload("script", {{"text", "compute 1000\nwrite 0x30000010 5\n"}});
    const auto r = simulate(config, 1'000'000);
    CHECK(r.outcome == RunOutcome::Completed);
    CHECK(r.worlds[0].finished);
    CHECK(r.worlds[0].busy_cycles == 1001);
}

TEST_CASE("engine: WCC ping-pong across worlds") {
    auto config = busy_worlds(2, 500);
    config.worlds[0].workload =
        workload("script", {{"text", "loop\ncompute 100\nwcc send_b w2 00112233445566778899aabb\n"}});
    config.worlds[1].workload = workload("echo_net", {{"work", 50}});
    const auto r = simulate(config, 200'000);
    CHECK(r.worlds[0].wcc_calls > 10);
    CHECK(r.worlds[1].wcc_calls > 10);
    CHECK(r.checks.violations() == 0);
    CHECK(r.faults.empty());
}

TEST_CASE("metrics: overhead ratio from marks") {
    Trace t{rec(100, 0, TraceKind::MarkStart), rec(1175, 0, TraceKind::MarkEnd, 1000)};
    const auto r = overhead_ratio(t, 0);
    CHECK(r.measured == 1075);
    CHECK(r.native == 1000);
    CHECK(r.value() == doctest::Approx(1.075));
    CHECK_THROWS_AS(overhead_ratio(t, 1), MissingMarks);
    CHECK_THROWS_AS(overhead_ratio({rec(1, 0, TraceKind::MarkStart)}, 0), MissingMarks);
}

TEST_CASE("metrics: latency histogram") {
    Trace t;
    for (std::uint64_t v : {24, 24, 24, 500, 24})
        t.push_back(rec(v * 10, 0, TraceKind::IrqEntered, v, 3));
    t.push_back(rec(1, 0, TraceKind::IrqEntered, 9, 4));
    const auto h = latency_histogram(t, 3);
    CHECK(h.total == 5);
    CHECK(h.bins.at(24) == 4);
    CHECK(h.frequency(24) == doctest::Approx(0.8));
    CHECK(h.frequency(25) == 0.0);
    CHECK(h.max() == 500);
    const auto samples = latency_samples(t, 3);
    CHECK(samples.size() == 5);
    CHECK(samples[3].entered_cycle - samples[3].raised_cycle == 500);
    CHECK_THROWS_AS(latency_histogram(t, 5), NoSamples);
}

TEST_CASE("metrics: worst-case latency") {
    CHECK(worst_case_latency(3, 500.0, 5.375) == doctest::Approx(1005.375));
    CHECK(worst_case_latency(2, 10.0, 0.005375) == doctest::Approx(10.005375));
    CHECK(worst_case_latency(std::uint64_t{4}, std::uint64_t{20000}, std::uint64_t{239}) == 60239);
    CHECK(worst_case_latency(std::uint64_t{1}, std::uint64_t{20000}, std::uint64_t{239}) == 239);
    CHECK_THROWS(worst_case_latency(std::uint64_t{0}, std::uint64_t{20000}, std::uint64_t{239}));
}

TEST_CASE("metrics: report contents") {
    const auto s = mwtee::cli::bench_scenario(2, 500, 200'000);
    const auto r = simulate(s.config, s.horizon);
    const auto m = compute_metrics(r, s.config, CostModel{});
    CHECK(m.outcome == "completed");
    CHECK(m.tick_cycles == 20000);
    CHECK(m.worst_case_latency_cycles == 20000 + 215);
    REQUIRE(m.worlds[0].overhead_ratio);
    CHECK(*m.worlds[0].native_cycles == 200'000);
    CHECK(m.privileged_cycles == r.cycles.kernel);

    CHECK(m.notes.size() == 1);  // 215 / 20000 is above 1%
    CHECK(m.notes[0].find("not below 1%") != std::string::npos);

    const auto slow = mwtee::cli::bench_scenario(1, 10000, 2000);
    CHECK(compute_metrics(simulate(slow.config, slow.horizon), slow.config, CostModel{}).notes.empty());
}

TEST_CASE("engine: ticks no longer than a switch are rejected") {
    const auto config = busy_worlds(1, 5.975);  // 239 cycles
    CHECK_THROWS_AS(simulate(config, 1000), mwtee::kernel::ConfigError);
    CHECK_NOTHROW(simulate(busy_worlds(1, 6), 1000));
}

TEST_CASE("cost model overrides") {
    const auto c = CostModel::with_overrides({{"world_switch_cycles", 100}, {"irq_entry_cycles", 12}});
    CHECK(c.world_switch_cycles == 100);
    CHECK(c.irq_entry_cycles == 12);
    CHECK(c.boot_cycles(4) == 7749 + 3 * 1236);
    CHECK_THROWS(CostModel::with_overrides({{"bogus", 1}}));

    auto config = mwtee::cli::bench_scenario(1, 500, 100'000).config;
    config.cost_overrides["world_switch_cycles"] = 100;
    const auto r = simulate(config, 10'000'000);
    const auto o = overhead_ratio(r.trace, 0);
    CHECK((o.measured - o.native) * 20000 == o.native * 100);
}

TEST_CASE("properties: conservation, determinism and clean checks over random systems") {
    Rng rng(0xD1CE);
    for (int trial = 0; trial < 400; ++trial) {
        const auto config = random_system(rng);
        const auto horizon = rng.between(50'000, 600'000);
        CAPTURE(trial);
        CAPTURE(mwtee::kernel::config_to_json(config).dump());
        const auto a = simulate(config, horizon);
        const auto b = simulate(config, horizon);
        REQUIRE(a.trace == b.trace);
        REQUIRE(a.cycles.total() == a.end_cycle);
        REQUIRE(a.switch_count == count_kind(a.trace, TraceKind::SwitchBegin));
        REQUIRE(a.checks.violations() == 0);
        REQUIRE(a.checks.hygiene_checks > 0);
        REQUIRE(a.faults.empty());
        for (std::size_t i = 1; i < a.trace.size(); ++i)
            REQUIRE(a.trace[i].cycle >= a.trace[i - 1].cycle);
        REQUIRE(a.end_cycle <= a.kick_off_cycle + horizon + config.tick_cycles() + 1000);
    }
}

TEST_CASE("properties: observed latency never exceeds the worst-case bound") {
    Rng rng(0x1A7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = rng.between(1, 4);
        const double tick = std::array{100.0, 250.0, 500.0}[rng.below(3)];
        const auto period = rng.between(3000, 90000);
        auto s = mwtee::cli::latency_scenario(n, tick, period, 60, rng.below(5000));
        CAPTURE(n);
        CAPTURE(tick);
        CAPTURE(period);
        const auto r = simulate(s.config, s.horizon);
        const auto h = latency_histogram(r.trace, mwtee::cli::kTimerIrq);
        REQUIRE(h.total > 0);
        REQUIRE(h.max() <= worst_case_latency(n, s.config.tick_cycles(), 215 + 24));
    }
}

TEST_CASE("properties: overhead grows with world count and shrinks with tick length") {
    double previous = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto s = mwtee::cli::bench_scenario(n, 500, 400'000);
        const auto ratio = overhead_ratio(simulate(s.config, s.horizon).trace, 0).value();
        CHECK(ratio > previous);
        previous = ratio;
    }
    previous = 1e9;
    for (double tick : {250.0, 500.0, 1000.0, 2000.0, 10000.0}) {
        const auto s = mwtee::cli::bench_scenario(1, tick, 4'000'000);
        const auto ratio = overhead_ratio(simulate(s.config, s.horizon).trace, 0).value();
        CHECK(ratio < previous);
        CHECK(ratio > 1.0);
        previous = ratio;
    }
}

TEST_CASE("reference application runs clean") {
    const auto s = mwtee::cli::refapp_scenario();
    const auto r = simulate(s.config, s.horizon);
    CHECK(r.outcome == RunOutcome::Horizon);
    CHECK(r.checks.violations() == 0);
    CHECK(r.faults.empty());
    for (const auto& w : r.worlds)
        CHECK(w.slots >= 45);
    CHECK(latency_histogram(r.trace, mwtee::cli::kTimerIrq).total > 40);
}
