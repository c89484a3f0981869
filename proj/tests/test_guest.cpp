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

#include <cstdio>
#include <fstream>

#include "support.hpp"

using namespace mwtee::guest;
using mwtee::testing::Rng;
using mwtee::testing::script;

TEST_CASE("guest_step: walks events, wraps to the loop start, then ends") {
    const auto p = script("compute 10\nloop\nread 0x30000000\nwrite 0x30000004 7\n");
    auto s = guest_step(p, 0, 100);
    CHECK(std::get<Compute>(s.event).cycles == 10);
    CHECK(s.next == 1);
    s = guest_step(p, 2, 100);
    CHECK(std::get<Write>(s.event).value == 7);
    s = guest_step(p, s.next, 100);
    CHECK(std::holds_alternative<Read>(s.event));
    CHECK(s.next == 2);

    const auto straight = script("compute 5\n");
    CHECK_THROWS_AS(guest_step(straight, 1, 100), EndOfProgram);
}

TEST_CASE("guest_step: loop_forever yields quanta without moving") {
    const auto p = builtin_workload("busyloop");
    for (std::uint64_t q : {1ull, 215ull, 400000ull}) {
        const auto s = guest_step(p, 0, q);
        CHECK(std::get<Compute>(s.event).cycles == q);
        CHECK(s.next == 0);
    }
    CHECK(std::get<Compute>(guest_step(p, 0, 0).event).cycles == 1);
}

TEST_CASE("guest_step: a random walk never escapes the program") {
    Rng rng(0x6E57);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const std::size_t n = rng.between(1, 8);
        const std::size_t loop_at = rng.below(n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == loop_at)
                text += "loop\n";
            text += "compute " + std::to_string(rng.between(1, 50)) + "\n";
        }
        const auto p = script(text);
        std::size_t cursor = 0;
        std::size_t executed = 0;
        try {
            for (int step = 0; step < 100; ++step) {
                const auto s = guest_step(p, cursor, 7);
                REQUIRE(s.next <= p.events.size());
                cursor = s.next;
                ++executed;
            }
        } catch (const EndOfProgram&) {
            REQUIRE(loop_at == n);  // only loop-free programs end
            REQUIRE(executed == n);
        }
    }
}

TEST_CASE("builtin workloads") {
    const auto bench = builtin_workload("bench", {{"cycles", 1000}, {"warmup", 300}});
    CHECK(bench.measured());
    CHECK(bench.warmup_cycles == 300);
    CHECK(bench.events.size() == 4);
    CHECK(builtin_workload("bench", {{"cycles", 1000}}).warmup_cycles == 0);
    CHECK_THROWS_AS(builtin_workload("bench", {{"cycles", 0}}), std::invalid_argument);

    const auto blinker = builtin_workload("timer_blinker", {{"setup", 0}, {"gpio", "0x50110000"}});
    CHECK(std::holds_alternative<ConfigureTimer>(blinker.events[0]));
    CHECK(std::get<ConfigureTimer>(blinker.events[0]).period_cycles == 400000);
    CHECK(blinker.loop_start == 1u);
    CHECK(std::get<Write>(blinker.events.back()).addr == 0x5011'0000);
    CHECK_FALSE(blinker.measured());

    const auto echo = builtin_workload("echo_net");
    CHECK(std::get<WccCall>(echo.events.back()).peer == kReplyPeer);
    CHECK(std::get<WccCall>(echo.events.front()).api == mwtee::kernel::WccApi::RecvBlocking);

    const auto console = builtin_workload("console", {{"servo", "servo"}, {"net", "net"}});
    CHECK(std::get<WccCall>(console.events[1]).payload == text_payload("SERVO:090deg"));

    CHECK_NOTHROW(builtin_workload("rtos_servo", {{"pwm", 0x5012'0000}}));
    CHECK_THROWS_AS(builtin_workload("warp_drive"), UnknownWorkload);
    CHECK_THROWS_WITH(builtin_workload("busyloop", {{"speed", 1}}), doctest::Contains("unknown parameter 'speed'"));
    CHECK_THROWS_AS(builtin_workload("bench", {{"cycles", -5}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_workload("script"), std::invalid_argument);
}

TEST_CASE("script workload from a file") {
    const std::string path = "mwtee_test_script.txt";
    {
        std::ofstream f(path);
        f << "# warm up\ncompute 0x10\nmark_start\ncompute 20 # measured\nmark_end\n";
    }
    const auto p = builtin_workload("script", {{"path", path}});
    std::remove(path.c_str());
    CHECK(p.warmup_cycles == 16);
    CHECK(p.events.size() == 4);
    CHECK_THROWS_AS(builtin_workload("script", {{"path", "/nonexistent/file"}}), std::invalid_argument);
}

TEST_CASE("parse_script: every event kind and its description") {
    const auto p = script(R"(
        compute 100
        read 0x30000000
        write 0x30000004 0xff
        timer 400000 3
        wait_irq 3
        handler 200
        wcc send_b net 000102030405060708090a0b
        wcc send_nb @sender
        wcc recv_b
        wcc recv_nb
        mark_start
        mark_end
        loop
        loop_forever
    )");
    REQUIRE(p.events.size() == 13);
    CHECK(describe(p.events[0]) == "compute 100");
    CHECK(describe(p.events[2]) == "write 0x30000004 0x000000ff");
    CHECK(describe(p.events[3]) == "timer 400000 3");
    CHECK(describe(p.events[6]) == "wcc send_b net 000102030405060708090a0b");
    CHECK(describe(p.events[7]) == "wcc send_nb @sender");
    CHECK(describe(p.events[9]) == "wcc recv_nb");
    CHECK(describe(p.events[12]) == "loop_forever");
    CHECK(p.loop_start == 12u);
}

TEST_CASE("parse_script: rejections") {
    CHECK_THROWS_WITH(script("compute"), doctest::Contains("line 1"));
    CHECK_THROWS_WITH(script("\njump 4"), doctest::Contains("line 2: unknown event 'jump'"));
    CHECK_THROWS_AS(script("compute 0"), std::invalid_argument);
    CHECK_THROWS_AS(script("compute 12x"), std::invalid_argument);
    CHECK_THROWS_AS(script("wcc send_b"), std::invalid_argument);
    CHECK_THROWS_AS(script("wcc recv_b peer"), std::invalid_argument);
    CHECK_THROWS_AS(script("wcc teleport"), std::invalid_argument);
    CHECK_THROWS_AS(script("wcc send_nb net 0011"), std::invalid_argument);
    CHECK_THROWS_AS(script("mark_end"), std::invalid_argument);
    CHECK_THROWS_AS(script("mark_start\nmark_start"), std::invalid_argument);
    CHECK_THROWS_AS(script("compute 4\nloop"), std::invalid_argument);
    CHECK_THROWS_WITH(script("loop\nwcc send_nb peer"), doctest::Contains("takes no time"));
    CHECK_NOTHROW(script("loop\nwcc recv_b"));
}

TEST_CASE("payloads") {
    const auto p = parse_payload("000102030405060708090A0b");
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p[i] == i);
    CHECK_THROWS_AS(parse_payload("00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_payload("zz0102030405060708090a0b"), std::invalid_argument);
    const auto t = text_payload("hi");
    CHECK(t[0] == 'h');
    CHECK(t[2] == 0);
    CHECK(text_payload("0123456789abcdef")[11] == 'b');
}
