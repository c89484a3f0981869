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

#include "mwtee/guest/program.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mwtee::guest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string hex32(std::uint32_t v) {
    return kernel::format_address(v);
}

std::uint64_t parse_number(std::string_view token, int line) {
    std::uint64_t value = 0;
    int base = 10;
    if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) {
        token.remove_prefix(2);
        base = 16;
    }
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value, base);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw std::invalid_argument("line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
    return value;
}

std::optional<WccApi> parse_api(std::string_view s) {
    if (s == "send_b")
        return WccApi::SendBlocking;
    if (s == "send_nb")
        return WccApi::SendNonBlocking;
    if (s == "recv_b")
        return WccApi::RecvBlocking;
    if (s == "recv_nb")
        return WccApi::RecvNonBlocking;
    return std::nullopt;
}

std::uint64_t param_u64(const nlohmann::json& params, const char* key, std::uint64_t fallback) {
    if (!params.contains(key))
        return fallback;
    const auto& v = params[key];
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
        return v.get<std::uint64_t>();
    if (v.is_string())
        return parse_number(v.get<std::string>(), 0);
    throw std::invalid_argument(std::string("workload parameter '") + key + "' must be a non-negative integer");
}

std::optional<Address> param_addr(const nlohmann::json& params, const char* key) {
    if (!params.contains(key))
        return std::nullopt;
    return static_cast<Address>(param_u64(params, key, 0));
}

std::string param_str(const nlohmann::json& params, const char* key, std::string fallback) {
    if (!params.contains(key))
        return fallback;
    if (!params[key].is_string())
        throw std::invalid_argument(std::string("workload parameter '") + key + "' must be a string");
    return params[key].get<std::string>();
}

void check_params(const nlohmann::json& params, std::string_view workload,
                  std::initializer_list<std::string_view> allowed) {
    if (!params.is_object())
        throw std::invalid_argument("workload params must be an object");
    for (const auto& [key, value] : params.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument("workload " + std::string(workload) + ": unknown parameter '" + key + "'");
    }
}

}  // namespace

std::string describe(const GuestEvent& event) {
    return std::visit(
        overloaded{
            [](const Compute& e) { return "compute " + std::to_string(e.cycles); },
            [](const Read& e) { return "read " + hex32(e.addr); },
            [](const Write& e) { return "write " + hex32(e.addr) + " " + hex32(e.value); },
            [](const ConfigureTimer& e) {
                return "timer " + std::to_string(e.period_cycles) + " " + std::to_string(e.irq);
            },
            [](const WaitIrq& e) { return "wait_irq " + std::to_string(e.irq); },
            [](const IrqHandlerBody& e) { return "handler " + std::to_string(e.cycles); },
            [](const WccCall& e) {
                std::string s = "wcc " + std::string(kernel::to_string(e.api));
                if (!e.peer.empty())
                    s += " " + e.peer;
                if (e.payload)
                    s += " " + kernel::to_hex(*e.payload);
                return s;
            },
            [](const MarkStart&) { return std::string("mark_start"); },
            [](const MarkEnd&) { return std::string("mark_end"); },
            [](const LoopForever&) { return std::string("loop_forever"); },
        },
        event);
}

void WorkloadProgram::finalize() {
    bool started = false;
    bool ended = false;
    warmup_cycles = 0;
    for (const auto& ev : events) {
        if (const auto* c = std::get_if<Compute>(&ev)) {
            if (c->cycles == 0)
                throw std::invalid_argument(name + ": compute of 0 cycles");
            if (!started)
                warmup_cycles += c->cycles;
        } else if (const auto* h = std::get_if<IrqHandlerBody>(&ev)) {
            if (h->cycles == 0)
                throw std::invalid_argument(name + ": handler of 0 cycles");
        } else if (const auto* t = std::get_if<ConfigureTimer>(&ev)) {
            if (t->period_cycles == 0)
                throw std::invalid_argument(name + ": timer period of 0 cycles");
        } else if (const auto* w = std::get_if<WccCall>(&ev)) {
            if (w->payload && !kernel::is_send(w->api))
                throw std::invalid_argument(name + ": payload on a receive");
            if (kernel::is_send(w->api) && w->peer.empty())
                throw std::invalid_argument(name + ": send without a peer");
        } else if (std::holds_alternative<MarkStart>(ev)) {
            if (started)
                throw std::invalid_argument(name + ": second mark_start");
            started = true;
        } else if (std::holds_alternative<MarkEnd>(ev)) {
            if (!started || ended)
                throw std::invalid_argument(name + ": mark_end without a preceding mark_start");
            ended = true;
        }
    }
    if (!started)
        warmup_cycles = 0;
    if (loop_start && *loop_start >= events.size())
        throw std::invalid_argument(name + ": loop start past the last event");
    if (loop_start) {
        // A loop that never spends time or blocks would spin at one instant.
        const bool progresses = std::any_of(events.begin() + static_cast<std::ptrdiff_t>(*loop_start), events.end(),
                                            [](const GuestEvent& e) {
                                                const auto* w = std::get_if<WccCall>(&e);
                                                if (w != nullptr)
                                                    return w->api == WccApi::SendBlocking ||
                                                           w->api == WccApi::RecvBlocking;
                                                return !std::holds_alternative<MarkStart>(e) &&
                                                       !std::holds_alternative<MarkEnd>(e);
                                            });
        if (!progresses)
            throw std::invalid_argument(name + ": loop body takes no time");
    }
}

bool WorkloadProgram::measured() const {
    return std::any_of(events.begin(), events.end(),
                       [](const GuestEvent& e) { return std::holds_alternative<MarkEnd>(e); });
}

Step guest_step(const WorkloadProgram& program, std::size_t cursor, std::uint64_t quantum) {
    if (cursor >= program.events.size()) {
        if (!program.loop_start || program.events.empty())
            throw EndOfProgram();
        cursor = *program.loop_start;
    }
    const GuestEvent& ev = program.events[cursor];
    if (std::holds_alternative<LoopForever>(ev))
        return {Compute{quantum == 0 ? 1 : quantum}, cursor};
    return {ev, cursor + 1};
}

Payload parse_payload(std::string_view hex) {
    if (hex.size() != 2 * kernel::kMessageBytes)
        throw std::invalid_argument("payload must be exactly 12 bytes (24 hex digits)");
    Payload p{};
    for (std::size_t i = 0; i < kernel::kMessageBytes; ++i) {
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, value, 16);
        if (ec != std::errc{} || ptr != hex.data() + 2 * i + 2)
            throw std::invalid_argument("bad hex in payload '" + std::string(hex) + "'");
        p[i] = static_cast<std::uint8_t>(value);
    }
    return p;
}

Payload text_payload(std::string_view text) {
    Payload p{};
    for (std::size_t i = 0; i < kernel::kMessageBytes && i < text.size(); ++i)
        p[i] = static_cast<std::uint8_t>(text[i]);
    return p;
}

WorkloadProgram parse_script(std::string_view name, std::string_view text) {
    WorkloadProgram program;
    program.name = std::string(name);
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::istringstream words(raw);
        std::vector<std::string> tok;
        for (std::string w; words >> w;)
            tok.push_back(w);
        if (tok.empty())
            continue;

        const auto where = "line " + std::to_string(line_no) + ": ";
        auto need = [&](std::size_t n) {
            if (tok.size() != n)
                throw std::invalid_argument(where + "'" + tok[0] + "' takes " + std::to_string(n - 1) + " argument(s)");
        };
        const std::string& op = tok[0];
        if (op == "compute") {
            need(2);
            program.events.push_back(Compute{parse_number(tok[1], line_no)});
        } else if (op == "read") {
            need(2);
            program.events.push_back(Read{static_cast<Address>(parse_number(tok[1], line_no))});
        } else if (op == "write") {
            need(3);
            program.events.push_back(Write{static_cast<Address>(parse_number(tok[1], line_no)),
                                           static_cast<std::uint32_t>(parse_number(tok[2], line_no))});
        } else if (op == "timer") {
            need(3);
            program.events.push_back(ConfigureTimer{parse_number(tok[1], line_no),
                                                    static_cast<std::uint32_t>(parse_number(tok[2], line_no))});
        } else if (op == "wait_irq") {
            need(2);
            program.events.push_back(WaitIrq{static_cast<std::uint32_t>(parse_number(tok[1], line_no))});
        } else if (op == "handler") {
            need(2);
            program.events.push_back(IrqHandlerBody{parse_number(tok[1], line_no)});
        } else if (op == "wcc") {
            if (tok.size() < 2)
                throw std::invalid_argument(where + "wcc needs an api");
            const auto api = parse_api(tok[1]);
            if (!api)
                throw std::invalid_argument(where + "unknown wcc api '" + tok[1] + "'");
            WccCall call{*api, {}, {}};
            if (kernel::is_send(*api)) {
                if (tok.size() < 3 || tok.size() > 4)
                    throw std::invalid_argument(where + "wcc send takes a peer and an optional payload");
                call.peer = tok[2];
                if (tok.size() == 4)
                    call.payload = parse_payload(tok[3]);
            } else {
                need(2);
            }
            program.events.push_back(std::move(call));
        } else if (op == "mark_start") {
            need(1);
            program.events.push_back(MarkStart{});
        } else if (op == "mark_end") {
            need(1);
            program.events.push_back(MarkEnd{});
        } else if (op == "loop_forever") {
            need(1);
            program.events.push_back(LoopForever{});
        } else if (op == "loop") {
            need(1);
            program.loop_start = program.events.size();
        } else {
            throw std::invalid_argument(where + "unknown event '" + op + "'");
        }
    }
    if (program.loop_start && *program.loop_start >= program.events.size())
        throw std::invalid_argument("'loop' must precede at least one event");
    program.finalize();
    return program;
}

WorkloadProgram builtin_workload(std::string_view name, const nlohmann::json& params) {
    WorkloadProgram p;
    p.name = std::string(name);

    if (name == "busyloop") {
        check_params(params, name, {});
        p.events = {LoopForever{}};
    } else if (name == "bench") {
        check_params(params, name, {"cycles", "warmup"});
        const auto cycles = param_u64(params, "cycles", 0);
        const auto warmup = param_u64(params, "warmup", 0);
        if (cycles == 0)
            throw std::invalid_argument("bench needs cycles > 0");
        if (warmup > 0)
            p.events.push_back(Compute{warmup});
        p.events.push_back(MarkStart{});
        p.events.push_back(Compute{cycles});
        p.events.push_back(MarkEnd{});
    } else if (name == "timer_blinker") {
        check_params(params, name, {"period", "irq", "setup", "handler", "gpio"});
        const auto setup = param_u64(params, "setup", 1000);
        const auto irq = static_cast<std::uint32_t>(param_u64(params, "irq", 3));
        if (setup > 0)
            p.events.push_back(Compute{setup});
        p.events.push_back(ConfigureTimer{param_u64(params, "period", 400000), irq});
        p.loop_start = p.events.size();
        p.events.push_back(WaitIrq{irq});
        p.events.push_back(IrqHandlerBody{param_u64(params, "handler", 200)});
        if (auto gpio = param_addr(params, "gpio"))
            p.events.push_back(Write{*gpio, 1});
    } else if (name == "console") {
        check_params(params, name, {"servo", "net", "uart", "think"});
        const auto think = param_u64(params, "think", 5000);
        const auto servo = param_str(params, "servo", "");
        const auto net = param_str(params, "net", "");
        p.loop_start = 0;
        p.events.push_back(Compute{think});
        if (auto uart = param_addr(params, "uart"))
            p.events.push_back(Write{*uart, 0x0A});
        if (!servo.empty())
            p.events.push_back(WccCall{WccApi::SendNonBlocking, servo, text_payload("SERVO:090deg")});
        p.events.push_back(Compute{think});
        if (!net.empty())
            p.events.push_back(WccCall{WccApi::SendBlocking, net, text_payload("POST /status")});
    } else if (name == "echo_net") {
        check_params(params, name, {"eth", "work"});
        p.loop_start = 0;
        p.events.push_back(WccCall{WccApi::RecvBlocking, {}, {}});
        p.events.push_back(Compute{param_u64(params, "work", 3000)});
        if (auto eth = param_addr(params, "eth"))
            p.events.push_back(Write{*eth, 0x1});
        p.events.push_back(WccCall{WccApi::SendNonBlocking, std::string(kReplyPeer), std::nullopt});
    } else if (name == "rtos_servo") {
        check_params(params, name, {"pwm", "poll"});
        p.loop_start = 0;
        p.events.push_back(WccCall{WccApi::RecvNonBlocking, {}, {}});
        p.events.push_back(Compute{param_u64(params, "poll", 2000)});
        if (auto pwm = param_addr(params, "pwm"))
            p.events.push_back(Write{*pwm, 90});
    } else if (name == "script") {
        check_params(params, name, {"text", "path"});
        std::string text;
        if (params.contains("text")) {
            text = param_str(params, "text", "");
        } else if (params.contains("path")) {
            std::ifstream f(param_str(params, "path", ""));
            if (!f)
                throw std::invalid_argument("cannot read script " + param_str(params, "path", ""));
            std::stringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        } else {
            throw std::invalid_argument("script workload needs 'text' or 'path'");
        }
        return parse_script(name, text);
    } else {
        throw UnknownWorkload(std::string(name));
    }
    p.finalize();
    return p;
}

}  // namespace mwtee::guest
