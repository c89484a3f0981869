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

#include <algorithm>
#include <string>

#include "mwtee/kernel/kernel.hpp"
#include "mwtee/kernel/partition.hpp"
#include "support.hpp"

using namespace mwtee::kernel;
using mwtee::hw::PlatformState;
using mwtee::hw::SecurityState;
using mwtee::testing::busy_worlds;
using mwtee::testing::Rng;

namespace {

struct Booted {
    Kernel kernel;
    PlatformState platform;
};

Booted boot(const SystemConfig& config) {
    Booted b{Kernel(config), PlatformState(config.platform)};
    REQUIRE(b.kernel.secure_boot(BootImage::sign({1, 2, 3})) == BootOutcome::Proceed);
    b.kernel.partition(b.platform);
    b.kernel.init(b.platform);
    b.kernel.kick_off(b.platform);
    return b;
}

std::string config_text(const std::string& world_extra = "", const std::string& top_extra = "") {
    return R"({"tick_us": 500, "cpu_hz": 40000000,)" + top_extra + R"( "worlds": [
        {"name": "a", "entry": "0x10010000",
         "regions": [{"base": "0x10010000", "size": 65536, "kind": "code"},
                     {"base": "0x30000000", "size": 65536, "kind": "data"}])" +
           world_extra + R"(}]})";
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

Payload payload_of(std::uint8_t seed) {
    Payload p{};
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<std::uint8_t>(seed + i);
    return p;
}

}  // namespace

TEST_CASE("config: minimal document parses with reference defaults") {
    const auto c = parse_config(config_text());
    CHECK(c.worlds.size() == 1);
    CHECK(c.scheduler_mode == SchedulerMode::RoundRobin);
    CHECK(c.platform.gateway_base == 0x1000'0000);
    CHECK(c.tick_cycles() == 20000);
    auto ten_ms = c;
    ten_ms.tick_us = 10000;
    CHECK(ten_ms.tick_cycles() == 400000);
}

TEST_CASE("config: errors name the offending field") {
    CHECK(error_of(config_text(R"(, "colour": 1)")).find("worlds[0].colour") != std::string::npos);
    CHECK(error_of(config_text(R"(, "irqs": [{"id": 7}, {"id": 7}])")).find("irq 7 assigned twice") !=
          std::string::npos);
    CHECK(error_of(config_text(R"(, "devices": ["laser"])")).find("unknown peripheral") != std::string::npos);
    CHECK(error_of(config_text("", R"( "cost_model": {"warp": 1},)")).find("cost_model.warp") != std::string::npos);
    CHECK(error_of("{").find("malformed json") != std::string::npos);
    CHECK(error_of(R"({"tick_us": 0.01, "cpu_hz": 1000, "worlds": []})").find("tick_us") != std::string::npos);
    CHECK(error_of(R"({"tick_us": 500, "cpu_hz": 40000000, "worlds": []})").find("at least one world") !=
          std::string::npos);

    std::string regions = R"("regions": [)";
    for (int i = 0; i < 8; ++i)
        regions += std::string(i ? "," : "") + R"({"base": ")" + format_address(0x3000'0000u + 0x1000u * i) +
                   R"(", "size": 4096, "kind": "data"})";
    regions += "]";
    const std::string eight = R"({"tick_us": 500, "cpu_hz": 40000000, "worlds": [
        {"name": "a", "entry": "0x10010000", )" + regions + "}]}";
    CHECK(error_of(eight).find("region capacity; 7 max") != std::string::npos);

    CHECK(error_of(R"({"tick_us": 500, "cpu_hz": 40000000, "worlds": [
        {"name": "a", "entry": "0x10010000", "regions": [{"base": "0x30000010", "size": 64, "kind": "data"}]}]})")
              .find("multiples of 32") != std::string::npos);
}

TEST_CASE("config: serialization round-trips") {
    auto c = busy_worlds(3, 1000);
    c.worlds[1].devices = {"uart0"};
    c.worlds[2].irqs = {{9, 0x20}};
    c.scheduler_mode = SchedulerMode::PriorityPreemptive;
    c.cost_overrides["world_switch_cycles"] = 100;
    const auto j = config_to_json(c);
    const auto again = parse_config(j.dump());
    CHECK(config_to_json(again) == j);
}

TEST_CASE("boot: SHA-512 matches the published test vector") {
    const std::string abc = "abc";
    const auto d = sha512({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()});
    CHECK(to_hex(d) ==
          "ddaf35a193617abacc417349ae20413112e6fa4e89a97ea20a9eeee64b55d39a"
          "2192992a274fc1a836ba3c23a3feebbd454d4423643ce80e2a9ac94fa54ca49f");
}

TEST_CASE("boot: a tampered image locks the kernel until reset") {
    const auto config = busy_worlds(2);
    Kernel k(config);
    PlatformState p(config.platform);
    auto image = BootImage::sign({0xAA, 0xBB, 0xCC, 0xDD});
    CHECK(image.digest_matches());
    image.flip_bit(17);
    CHECK_FALSE(image.digest_matches());
    CHECK(k.secure_boot(image) == BootOutcome::Locked);
    CHECK(k.state().boot_phase == BootPhase::Locked);
    CHECK_THROWS_AS(k.partition(p), KernelRefused);
    CHECK_THROWS_AS(k.init(p), KernelRefused);
    CHECK_THROWS_AS(k.kick_off(p), KernelRefused);
    CHECK_THROWS_AS(k.secure_boot(BootImage::sign({1})), KernelRefused);
    k.reset();
    CHECK(k.secure_boot(BootImage::sign({1})) == BootOutcome::Proceed);
    CHECK_NOTHROW(k.partition(p));
}

TEST_CASE("boot: phases must run in order") {
    const auto config = busy_worlds(1);
    Kernel k(config);
    PlatformState p(config.platform);
    CHECK_THROWS_AS(k.partition(p), KernelRefused);
    k.secure_boot(BootImage::sign({}));
    CHECK_THROWS_AS(k.kick_off(p), KernelRefused);
    CHECK_THROWS_AS(k.ws_tick(p), KernelRefused);
}

TEST_CASE("sp_validate: examples") {
    auto c = busy_worlds(2);
    CHECK_NOTHROW(sp_validate(c));

    c.worlds[1].regions[1].base = 0x3000'8000;  // into world 1's data
    try {
        sp_validate(c);
        FAIL("expected overlap");
    } catch (const PartitionError& e) {
        CHECK(e.kind() == PartitionError::Kind::Overlap);
        CHECK(std::string(e.what()).find("w1.regions[1]") != std::string::npos);
        CHECK(std::string(e.what()).find("w2.regions[1]") != std::string::npos);
    }

    auto unmapped = busy_worlds(1);
    unmapped.worlds[0].regions[1].base = 0x4000'0000;
    CHECK_THROWS_WITH_AS(sp_validate(unmapped), doctest::Contains("unmapped"), PartitionError);

    auto gateway = busy_worlds(1);
    gateway.worlds[0].regions[0].base = 0x1000'0000;
    CHECK_THROWS_WITH_AS(sp_validate(gateway), doctest::Contains("gateway"), PartitionError);
}

TEST_CASE("sp_validate: agrees with a sorted-interval oracle") {
    Rng rng(0x0E1A);
    int rejected = 0;
    for (int trial = 0; trial < 500; ++trial) {
        SystemConfig c;
        c.platform = reference_platform();
        const std::size_t nworlds = rng.between(1, 4);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
        bool outside = false;
        for (std::size_t w = 0; w < nworlds; ++w) {
            WorldConfig world;
            world.name = "w" + std::to_string(w);
            const std::size_t nregions = rng.between(1, 3);
            for (std::size_t r = 0; r < nregions; ++r) {
                // Mostly inside sram; the last 64 KiB window runs past its end.
                const auto base = 0x3000'0000u + 0x1000u * static_cast<std::uint32_t>(rng.below(0x110));
                const auto size = 0x1000u * static_cast<std::uint32_t>(rng.between(1, 8));
                world.regions.push_back({base, size, RegionKind::Data});
                spans.emplace_back(base, std::uint64_t{base} + size);
                outside = outside || std::uint64_t{base} + size > 0x3010'0000;
            }
            c.worlds.push_back(world);
        }
        std::sort(spans.begin(), spans.end());
        bool overlap = false;
        for (std::size_t i = 1; i < spans.size(); ++i)
            overlap = overlap || spans[i].first < spans[i - 1].second;

        bool threw = false;
        try {
            sp_validate(c);
        } catch (const PartitionError&) {
            threw = true;
        }
        REQUIRE(threw == (overlap || outside));
        rejected += threw ? 1 : 0;
    }
    CHECK(rejected > 50);
    CHECK(rejected < 450);
}

TEST_CASE("sp_build_sau_table: capacity and layout") {
    const auto platform = reference_platform();
    const auto gateway = gateway_region(platform);
    WorldConfig w;
    w.name = "w";
    for (std::uint32_t i = 0; i < 7; ++i)
        w.regions.push_back({0x3000'0000 + 0x1000 * i, 0x1000, RegionKind::Data});
    const auto sau = sp_build_sau_table(w, gateway, platform);
    CHECK(sau.enabled_count() == 8);
    CHECK(sau.regions[7].nsc);
    CHECK(sau.regions[7].base == gateway.base);

    w.devices = {"uart0"};
    try {
        sp_build_sau_table(w, gateway, platform);
        FAIL("expected capacity error");
    } catch (const PartitionError& e) {
        CHECK(e.kind() == PartitionError::Kind::Capacity);
    }
}

TEST_CASE("sp_build_mpc: two blocks of a 16 KiB grid") {
    SystemConfig c;
    c.platform = reference_platform();
    WorldConfig w;
    w.name = "w";
    w.regions = {{0x4000, 0x8000, RegionKind::Data}};
    c.worlds = {w};
    const auto mpc = sp_build_mpc(c, mwtee::hw::MpcState::make("m", 0, 0x10000, 0x4000));
    CHECK(mpc.blocks == std::vector<bool>{true, false, false, true});

    c.worlds[0].regions[0].size = 0x6000;
    try {
        sp_build_mpc(c, mwtee::hw::MpcState::make("m", 0, 0x10000, 0x4000));
        FAIL("expected granularity error");
    } catch (const PartitionError& e) {
        CHECK(e.kind() == PartitionError::Kind::Granularity);
    }
}

TEST_CASE("sp_build_mpc: matches a per-block scan") {
    Rng rng(0xB10C);
    const auto skeleton = mwtee::hw::MpcState::make("sram", 0x3000'0000, 0x10'0000, 0x4000);
    for (int trial = 0; trial < 200; ++trial) {
        SystemConfig c;
        WorldConfig w;
        w.name = "w";
        const std::size_t n = rng.between(0, 6);
        for (std::size_t i = 0; i < n; ++i) {
            const auto first = static_cast<std::uint32_t>(rng.below(64));
            const auto count = static_cast<std::uint32_t>(rng.between(1, 64 - first));
            w.regions.push_back({0x3000'0000 + first * 0x4000, count * 0x4000, RegionKind::Data});
        }
        w.regions.push_back({0x1002'0000, 0x100, RegionKind::Code});  // other memory: ignored
        c.worlds = {w};
        const auto mpc = sp_build_mpc(c, skeleton);
        for (std::size_t b = 0; b < 64; ++b) {
            const std::uint64_t addr = 0x3000'0000 + b * 0x4000;
            bool covered = false;
            for (const auto& r : w.regions)
                covered = covered || r.contains(static_cast<Address>(addr));
            REQUIRE(mpc.blocks[b] == !covered);
        }
    }
}

TEST_CASE("sp_apply_static: PPC, priorities and first-world irq targets") {
    auto c = busy_worlds(2);
    c.worlds[0].devices = {"gpio"};
    c.worlds[0].irqs = {{3, 0x40}};
    c.worlds[1].irqs = {{5, 0x80}};
    PlatformState p(c.platform);
    sp_apply_static(c, p);
    CHECK_FALSE(p.ppc.peripherals.at("gpio"));
    CHECK(p.ppc.peripherals.at("uart0"));
    CHECK(p.nvic.line(3).itns);
    CHECK_FALSE(p.nvic.line(5).itns);
    CHECK(p.nvic.line(5).priority == 0x80);
    CHECK_FALSE(p.mpc_named("sram")->is_secure(0x3000'0000));
    CHECK(p.mpc_named("sram")->is_secure(0x3002'0000));
    CHECK(p.mpc_named("kernel_sram")->is_secure(0x2000'0000));
}

TEST_CASE("init: SysTick period equals the tick") {
    for (double tick : {10000.0, 500.0}) {
        auto c = busy_worlds(1, tick);
        const auto b = boot(c);
        CHECK(b.kernel.state().tick_reload == c.tick_cycles());
        CHECK(b.platform.systick.reload + 1 == c.tick_cycles());
        CHECK(b.platform.systick.security == SecurityState::Secure);
    }
}

TEST_CASE("kick_off: first world runs NonSecure with clean registers") {
    auto b = boot(busy_worlds(2));
    CHECK(b.kernel.state().running == 0u);
    CHECK(b.platform.cpu.security == SecurityState::NonSecure);
    for (std::size_t i = 0; i <= 12; ++i)
        CHECK(b.platform.cpu.r[i] == 0);
    CHECK(b.platform.cpu.r[mwtee::hw::kPc] == 0x1001'0000);
    CHECK(b.platform.sau.regions[0].base == 0x1001'0000);
}

TEST_CASE("ws_tick: round robin with exact context restoration") {
    Rng rng(0x7);
    auto b = boot(busy_worlds(3));
    std::vector<mwtee::hw::RegisterFile> saved(3);
    for (int round = 0; round < 30; ++round) {
        const auto cur = *b.kernel.state().running;
        for (std::size_t i = 0; i <= 12; ++i)
            b.platform.cpu.r[i] = rng.u32();
        b.platform.cpu.r[mwtee::hw::kPc] = rng.u32();
        saved[cur] = b.platform.cpu.r;
        const auto rec = b.kernel.ws_tick(b.platform);
        REQUIRE(rec.from == cur);
        REQUIRE(rec.to == (cur + 1) % 3);
        if (round >= 3) {
            for (std::size_t i = 0; i <= 12; ++i)
                REQUIRE(b.platform.cpu.r[i] == saved[*rec.to][i]);
            REQUIRE(b.platform.cpu.r[mwtee::hw::kPc] == saved[*rec.to][mwtee::hw::kPc]);
        }
        REQUIRE(b.platform.cpu.security == SecurityState::NonSecure);
    }
}

TEST_CASE("ws_tick: NVIC banking hides suspended worlds' lines and keeps their requests") {
    auto c = busy_worlds(2);
    c.worlds[0].irqs = {{3, 0x40}};
    c.worlds[1].irqs = {{5, 0x80}};
    auto b = boot(c);
    auto& nvic = b.platform.nvic;
    CHECK(nvic.line(3).itns);
    CHECK_FALSE(nvic.line(5).itns);

    nvic_alias_access(nvic, SecurityState::NonSecure, mwtee::hw::NvicField::ISER, 3, mwtee::hw::RegisterOp::Write, 1);
    b.kernel.ws_tick(b.platform);  // -> world 1
    CHECK_FALSE(nvic.line(3).itns);
    CHECK_FALSE(nvic.line(3).enabled);
    CHECK(nvic.line(5).itns);
    CHECK(b.kernel.wcb(0).interrupts.at(3).iser);

    nvic.line(3).pending = true;  // raised while world 0 is suspended
    b.kernel.ws_tick(b.platform);  // -> world 0
    CHECK(nvic.line(3).itns);
    CHECK(nvic.line(3).enabled);
    CHECK(nvic.line(3).pending);
    CHECK_FALSE(nvic.line(5).itns);
}

TEST_CASE("ws_tick: blocked and parked worlds are skipped; none runnable idles") {
    auto b = boot(busy_worlds(3));
    b.kernel.park(1);
    CHECK(b.kernel.ws_tick(b.platform).to == 2u);
    CHECK(b.kernel.ws_tick(b.platform).to == 0u);
    b.kernel.park(0);
    b.kernel.park(2);
    const auto rec = b.kernel.ws_tick(b.platform);
    CHECK_FALSE(rec.to);
    CHECK(b.platform.cpu.security == SecurityState::Secure);
    CHECK(b.platform.sau.enabled_count() == 0);
}

TEST_CASE("payload packing round-trips") {
    Rng rng(0x12);
    for (int i = 0; i < 1000; ++i) {
        Payload p{};
        for (auto& byte : p)
            byte = static_cast<std::uint8_t>(rng.below(256));
        const auto w = payload_words(p);
        REQUIRE(words_payload(w[0], w[1], w[2]) == p);
    }
    CHECK(payload_words(payload_of(1))[0] == 0x04030201u);
}

TEST_CASE("wcc: non-blocking send, full inbox, receive") {
    auto b = boot(busy_worlds(2));
    auto& k = b.kernel;
    auto& p = b.platform;
    p.cpu.r[9] = 0x1234;  // must not leak through the call

    auto r = k.wcc_call(p, 0, WccApi::SendNonBlocking, 1, payload_of(10));
    CHECK(r.status == WccStatus::Ok);
    CHECK_FALSE(r.caller_blocked);
    CHECK(p.cpu.security == SecurityState::NonSecure);
    for (std::size_t i = 0; i <= 12; ++i)
        CHECK(p.cpu.r[i] == 0);

    CHECK(k.wcc_call(p, 0, WccApi::SendNonBlocking, 1, payload_of(20)).status == WccStatus::InboxFull);
    CHECK(k.wcc_call(p, 0, WccApi::SendNonBlocking, 0, payload_of(20)).status == WccStatus::BadPeer);
    CHECK(k.wcc_call(p, 0, WccApi::SendNonBlocking, 7, payload_of(20)).status == WccStatus::BadPeer);
    CHECK(k.wcc_call(p, 0, WccApi::RecvNonBlocking, std::nullopt, std::nullopt).status == WccStatus::Empty);

    k.ws_tick(p);
    r = k.wcc_call(p, 1, WccApi::RecvNonBlocking, std::nullopt, std::nullopt);
    REQUIRE(r.received);
    CHECK(r.received->payload == payload_of(10));
    CHECK(r.received->sender == 0u);
    const auto words = payload_words(payload_of(10));
    CHECK(p.cpu.r[4] == words[0]);
    CHECK(p.cpu.r[5] == words[1]);
    CHECK(p.cpu.r[6] == words[2]);
    CHECK(p.cpu.r[0] == 0);
    CHECK_FALSE(k.wcb(1).inbox);
}

TEST_CASE("wcc: blocking send wakes a blocked receiver and forces the switch") {
    auto b = boot(busy_worlds(3));
    auto& k = b.kernel;
    auto& p = b.platform;
    k.ws_tick(p);  // world 1
    auto r = k.wcc_call(p, 1, WccApi::RecvBlocking, std::nullopt, std::nullopt);
    CHECK(r.caller_blocked);
    CHECK(k.wcb(1).blocked_on == BlockedOn{BlockKind::Recv, 0});
    k.reschedule(p);  // world 2
    CHECK(k.state().running == 2u);
    k.ws_tick(p);     // world 0, skipping blocked world 1
    CHECK(k.state().running == 0u);

    r = k.wcc_call(p, 0, WccApi::SendBlocking, 1, payload_of(5));
    CHECK(r.status == WccStatus::Ok);
    CHECK(r.caller_blocked);
    CHECK(r.woken == 1u);
    CHECK(r.schedule_next == 1u);
    const auto words = payload_words(payload_of(5));
    CHECK(k.wcb(1).general[0] == words[0]);

    k.switch_to(p, 1, SwitchReason::Blocking);
    CHECK(p.cpu.r[4] == words[0]);
    CHECK(p.cpu.r[6] == words[2]);
    // The answer releases the sender.
    r = k.wcc_call(p, 1, WccApi::SendNonBlocking, 0, payload_of(9));
    CHECK(r.woken == 0u);
    CHECK(k.runnable(0));
    CHECK(k.wcb(0).general[1] == payload_words(payload_of(9))[1]);
}

TEST_CASE("wcc: deadlocks are refused") {
    auto b = boot(busy_worlds(2));
    auto& k = b.kernel;
    auto& p = b.platform;
    auto r = k.wcc_call(p, 0, WccApi::SendBlocking, 1, payload_of(1));
    CHECK(r.caller_blocked);
    CHECK(r.schedule_next == 1u);
    k.switch_to(p, 1, SwitchReason::Blocking);
    r = k.wcc_call(p, 1, WccApi::SendBlocking, 0, payload_of(2));
    CHECK(r.status == WccStatus::Deadlock);
    CHECK_FALSE(r.caller_blocked);

    // Consume world 1's message; with world 0 blocked on send a blocking
    // receive could never complete.
    k.wcc_call(p, 1, WccApi::RecvNonBlocking, std::nullopt, std::nullopt);
    CHECK(k.wcc_call(p, 1, WccApi::RecvBlocking, std::nullopt, std::nullopt).status == WccStatus::Deadlock);
}

TEST_CASE("wcc: entry outside the NSC gateway faults") {
    auto b = boot(busy_worlds(2));
    const auto r = b.kernel.wcc_call(b.platform, 0, WccApi::SendNonBlocking, 1, payload_of(1), 0x1001'0000);
    CHECK(r.status == WccStatus::GatewayFault);
    CHECK_FALSE(b.kernel.wcb(1).inbox);
    CHECK_THROWS_AS(b.kernel.wcc_call(b.platform, 1, WccApi::RecvNonBlocking, std::nullopt, std::nullopt),
                    KernelRefused);
}

TEST_CASE("preemptive_route") {
    auto c = busy_worlds(3);
    c.worlds[0].irqs = {{3, 0}};
    c.worlds[1].irqs = {{4, 0}};
    c.worlds[2].irqs = {{5, 0}};
    {
        auto b = boot(c);
        CHECK(b.kernel.preemptive_route(3).kind == SchedulingKind::DeliverNow);
        CHECK(b.kernel.preemptive_route(4).kind == SchedulingKind::Defer);
        CHECK_FALSE(b.kernel.preemptive_route(40).world);
    }
    c.scheduler_mode = SchedulerMode::PriorityPreemptive;
    auto b = boot(c);
    b.kernel.ws_tick(b.platform);  // world 1 (priority 1)
    CHECK(b.kernel.preemptive_route(3).kind == SchedulingKind::Preempt);
    CHECK(b.kernel.preemptive_route(5).kind == SchedulingKind::Defer);
    CHECK_FALSE(b.platform.nvic.line(5).itns);

    b.kernel.switch_to(b.platform, 2, SwitchReason::Tick);
    b.kernel.switch_to(b.platform, 0, SwitchReason::Preempt);
    CHECK(b.kernel.state().preempted == std::vector<WorldId>{2});
    CHECK(b.kernel.reschedule(b.platform).reason == SwitchReason::PreemptReturn);
    CHECK(b.kernel.state().running == 2u);
}
