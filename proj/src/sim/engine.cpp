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

#include "mwtee/sim/engine.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mwtee::sim {

using guest::GuestEvent;
using kernel::Payload;
using kernel::SwitchReason;
using kernel::WccApi;
using kernel::WorldId;

std::string_view to_string(RunOutcome outcome) {
    switch (outcome) {
    case RunOutcome::Completed:
        return "completed";
    case RunOutcome::Horizon:
        return "horizon";
    case RunOutcome::Stalled:
        return "stalled";
    case RunOutcome::Locked:
        return "locked";
    case RunOutcome::Aborted:
        return "aborted";
    }
    return "?";
}

bool RunResult::security_fault() const {
    return std::any_of(faults.begin(), faults.end(),
                       [](const FaultRecord& f) { return f.outcome == hw::AccessOutcome::SecurityFault; });
}

std::vector<guest::WorkloadProgram> build_workloads(const kernel::SystemConfig& config) {
    std::vector<guest::WorkloadProgram> programs;
    for (std::size_t i = 0; i < config.worlds.size(); ++i) {
        const auto& spec = config.worlds[i].workload;
        const std::string path = "worlds[" + std::to_string(i) + "].workload";
        try {
            programs.push_back(guest::builtin_workload(spec.name, spec.params));
        } catch (const std::invalid_argument& e) {
            throw kernel::ConfigError(path, e.what());
        }
        for (const auto& ev : programs.back().events) {
            const auto* call = std::get_if<guest::WccCall>(&ev);
            if (call == nullptr || call->peer.empty() || call->peer == guest::kReplyPeer)
                continue;
            const bool known = std::any_of(config.worlds.begin(), config.worlds.end(),
                                           [&](const kernel::WorldConfig& w) { return w.name == call->peer; });
            if (!known)
                throw kernel::ConfigError(path, "wcc peer '" + call->peer + "' is not a configured world");
        }
    }
    return programs;
}

kernel::BootImage default_boot_image(const kernel::SystemConfig& config) {
    const std::string text = "mwtee-image\n" + kernel::config_to_json(config).dump();
    return kernel::BootImage::sign(std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::uint32_t register_tag(WorldId w, std::uint32_t seq) {
    return 0xC0000000u | ((static_cast<std::uint32_t>(w) & 0xFFu) << 20) | (seq & 0xFFFFFu);
}

std::optional<WorldId> tag_owner(std::uint32_t value) {
    if ((value & 0xF0000000u) != 0xC0000000u)
        return std::nullopt;
    return WorldId{(value >> 20) & 0xFFu};
}

namespace {

constexpr std::uint64_t kForever = std::numeric_limits<std::uint64_t>::max() / 4;
constexpr std::uint64_t kMaxInstantSteps = 1'000'000;

bool foreign_tag(std::uint32_t v, WorldId w) {
    const auto owner = tag_owner(v);
    return owner && *owner != (w & 0xFFu);
}

enum class Bucket : std::uint8_t { Busy, IrqEntry, Kernel, Idle };

struct Timer {
    std::uint64_t period = 0;
    std::uint64_t next = 0;
    WorldId owner = 0;
};

struct GuestRun {
    std::size_t cursor = 0;
    std::uint64_t remaining = 0;  // cycles left in the current compute-like event
    bool in_progress = false;
    std::optional<std::uint32_t> waiting_irq;
    std::map<std::uint32_t, std::uint64_t> serviced;  // entries not yet consumed by WaitIrq
    std::optional<WorldId> last_sender;
    std::optional<Payload> last_payload;
    std::optional<WccApi> blocked_call;
    bool marked_start = false;
    bool marked_end = false;
    std::uint64_t native = 0;
    std::uint32_t seq = 0;
    hw::RegisterFile expected{};  // what the next resume must produce
    bool has_expected = false;
    bool done = false;
};

class Engine {
public:
    Engine(const kernel::SystemConfig& config, const std::vector<guest::WorkloadProgram>& programs,
           const CostModel& cost, const RunOptions& options)
        : config_(config), programs_(programs), cost_(cost), options_(options), platform_(config.platform),
          kernel_(config), guests_(config.worlds.size()) {}

    RunResult run();

private:
    void emit(TraceKind kind, int world, std::uint64_t value = 0, std::string detail = {}, std::uint32_t irq = 0) {
        result_.trace.push_back({now_, world, kind, irq, value, std::move(detail)});
    }

    void advance(std::uint64_t cycles, Bucket bucket);
    std::uint64_t next_external() const;
    bool deliver_interrupt();
    void do_switch(SwitchReason reason, std::optional<WorldId> target = std::nullopt);
    void after_switch(const kernel::SwitchRecord& rec);
    void step_guest();
    void run_compute(WorldId w, std::uint64_t limit);
    void bus_access(WorldId w, hw::Address addr, hw::AccessKind kind, std::size_t next);
    void configure_timer(WorldId w, const guest::ConfigureTimer& t, std::size_t next);
    void wcc(WorldId w, const guest::WccCall& call, std::size_t next);
    void fault(WorldId w, hw::Address addr, const hw::AccessResult& res);
    void retire(WorldId w);
    void check(bool ok, std::uint64_t CheckCounters::*count, std::uint64_t CheckCounters::*violations);
    void check_registers_zero(const hw::RegisterFile& r, bool keep_message);
    void check_aliases();
    void check_gates();
    void notify(const kernel::SwitchRecord& rec);
    bool measured_done() const;
    bool anything_runnable() const;

    const kernel::SystemConfig& config_;
    const std::vector<guest::WorkloadProgram>& programs_;
    CostModel cost_;
    const RunOptions& options_;
    hw::PlatformState platform_;
    kernel::Kernel kernel_;
    std::vector<GuestRun> guests_;
    std::map<std::uint32_t, Timer> timers_;
    std::map<std::uint32_t, std::uint64_t> raised_at_;  // first un-served raise per irq
    std::vector<hw::MpcState> mpc_snapshot_;
    hw::PpcState ppc_snapshot_;
    RunResult result_;
    std::uint64_t now_ = 0;
    std::uint64_t horizon_end_ = 0;
    bool systick_pending_ = false;
    bool tail_chain_ = false;  // CPU is logically still in the kernel's handler
    std::uint64_t instant_steps_ = 0;
};

void Engine::advance(std::uint64_t cycles, Bucket bucket) {
    if (cycles == 0)
        return;
    switch (bucket) {
    case Bucket::Busy:
        result_.cycles.busy += cycles;
        break;
    case Bucket::IrqEntry:
        result_.cycles.irq_entry += cycles;
        break;
    case Bucket::Kernel:
        result_.cycles.kernel += cycles;
        break;
    case Bucket::Idle:
        result_.cycles.idle += cycles;
        break;
    }
    if (hw::systick_advance(platform_.systick, cycles) > 0)
        systick_pending_ = true;
    now_ += cycles;
    instant_steps_ = 0;

    std::vector<std::pair<std::uint64_t, std::uint32_t>> fires;
    for (auto& [irq, timer] : timers_) {
        for (; timer.next <= now_; timer.next += timer.period)
            fires.emplace_back(timer.next, irq);
    }
    std::sort(fires.begin(), fires.end());
    for (const auto& [at, irq] : fires) {
        platform_.nvic.pend(irq);
        raised_at_.try_emplace(irq, at);
        result_.trace.push_back({at, static_cast<int>(timers_.at(irq).owner), TraceKind::IrqRaised, irq, 0, {}});
    }
}

std::uint64_t Engine::next_external() const {
    std::uint64_t t = kForever;
    if (platform_.systick.enabled)
        t = now_ + hw::systick_cycles_to_fire(platform_.systick);
    for (const auto& [irq, timer] : timers_)
        t = std::min(t, timer.next);
    return t;
}

void Engine::check(bool ok, std::uint64_t CheckCounters::*count, std::uint64_t CheckCounters::*violations) {
    ++(result_.checks.*count);
    if (!ok)
        ++(result_.checks.*violations);
}

void Engine::check_registers_zero(const hw::RegisterFile& r, bool keep_message) {
    bool ok = true;
    for (std::size_t i = 0; i <= 12; ++i) {
        if (keep_message && i >= 4 && i <= 6)
            continue;
        ok = ok && r[i] == 0;
    }
    check(ok, &CheckCounters::hygiene_checks, &CheckCounters::hygiene_violations);
}

void Engine::check_aliases() {
    bool ok = true;
    for (std::uint32_t irq = 0; irq < platform_.nvic.size(); ++irq) {
        if (platform_.nvic.line(irq).itns)
            continue;
        for (auto field : {hw::NvicField::ITNS, hw::NvicField::ISER, hw::NvicField::ISPR, hw::NvicField::IPR}) {
            ok = ok && hw::nvic_alias_access(platform_.nvic, hw::SecurityState::NonSecure, field, irq,
                                             hw::RegisterOp::Read) == 0;
        }
    }
    check(ok, &CheckCounters::alias_checks, &CheckCounters::alias_violations);
}

void Engine::check_gates() {
    check(platform_.mpcs == mpc_snapshot_ && platform_.ppc == ppc_snapshot_, &CheckCounters::gate_checks,
          &CheckCounters::gate_violations);
}

void Engine::notify(const kernel::SwitchRecord& rec) {
    if (options_.observer)
        options_.observer(SwitchProbe{now_, platform_, kernel_, rec});
}

void Engine::do_switch(SwitchReason reason, std::optional<WorldId> target) {
    const auto from = kernel_.state().running;
    if (from) {
        guests_[*from].expected = platform_.cpu.r;
        guests_[*from].has_expected = true;
    }
    emit(TraceKind::SwitchBegin, from ? static_cast<int>(*from) : kKernel, 0, std::string(kernel::to_string(reason)));

    kernel::SwitchRecord rec;
    switch (reason) {
    case SwitchReason::Tick:
        rec = kernel_.ws_tick(platform_);
        break;
    case SwitchReason::Reschedule:
    case SwitchReason::PreemptReturn:
        rec = kernel_.reschedule(platform_);
        break;
    case SwitchReason::Blocking:
    case SwitchReason::Preempt:
        rec = kernel_.switch_to(platform_, *target, reason);
        break;
    }
    advance(cost_.world_switch_cycles, Bucket::Kernel);
    ++result_.switch_count;
    emit(TraceKind::SwitchEnd, rec.to ? static_cast<int>(*rec.to) : kKernel, 0,
         std::string(kernel::to_string(rec.reason)));
    after_switch(rec);
}

void Engine::after_switch(const kernel::SwitchRecord& rec) {
    tail_chain_ = rec.to.has_value();
    if (rec.to) {
        const WorldId w = *rec.to;
        GuestRun& g = guests_[w];
        ++result_.worlds[w].slots;
        const auto& r = platform_.cpu.r;

        // Context fidelity: the resume reproduces what the world left behind.
        bool ok = true;
        if (g.has_expected) {
            ok = r == g.expected;
        } else {
            for (std::size_t i = 0; i <= 12; ++i)
                ok = ok && r[i] == 0;
        }
        const bool message_in_regs = g.blocked_call.has_value();
        for (std::size_t i = 0; i <= 12; ++i) {
            if (message_in_regs && i >= 4 && i <= 6)
                continue;
            ok = ok && !foreign_tag(r[i], w);
        }
        check(ok, &CheckCounters::hygiene_checks, &CheckCounters::hygiene_violations);

        if (g.blocked_call) {
            // A blocking call completes on the resume that follows its release.
            check_registers_zero(r, true);
            if (kernel::is_send(*g.blocked_call) || g.last_sender)
                g.last_payload = kernel::words_payload(r[4], r[5], r[6]);
            emit(TraceKind::WccReturn, static_cast<int>(w), 0, std::string(kernel::to_string(*g.blocked_call)));
            g.blocked_call.reset();
        }
    }
    check_aliases();
    check_gates();
    notify(rec);
}

bool Engine::deliver_interrupt() {
    const auto selected = hw::select_exception(platform_.cpu, platform_.nvic);
    if (!selected)
        return false;
    const std::uint32_t irq = *selected;

    if (platform_.nvic.line(irq).target() == hw::SecurityState::NonSecure) {
        const auto running = kernel_.state().running;
        if (!running)
            throw std::logic_error("non-secure irq " + std::to_string(irq) + " pending with no world loaded");
        const WorldId w = *running;
        const hw::CpuState thread = platform_.cpu;
        if (tail_chain_)
            platform_.cpu.security = hw::SecurityState::Secure;
        const auto entry = hw::arbitrate_and_enter_exception(platform_.cpu, platform_.nvic);
        if (entry->registers_erased)
            check_registers_zero(platform_.cpu.r, false);
        advance(cost_.irq_entry_cycles, Bucket::IrqEntry);

        const auto raised = raised_at_.find(irq);
        const std::uint64_t from = raised != raised_at_.end() ? raised->second : now_ - cost_.irq_entry_cycles;
        if (raised != raised_at_.end())
            raised_at_.erase(raised);
        emit(TraceKind::IrqEntered, static_cast<int>(w), now_ - from, {}, irq);
        ++result_.worlds[w].irqs_entered;

        // The handler body is part of the guest program; return to thread.
        platform_.cpu = thread;
        tail_chain_ = false;
        GuestRun& g = guests_[w];
        if (g.waiting_irq == irq)
            g.waiting_irq.reset();
        else
            ++g.serviced[irq];
        return true;
    }

    const auto action = kernel_.preemptive_route(irq);
    if (action.kind != kernel::SchedulingKind::Preempt)
        throw std::logic_error("secure-targeted irq " + std::to_string(irq) + " enabled without a preemption route");
    do_switch(SwitchReason::Preempt, action.world);
    return true;
}

void Engine::run_compute(WorldId w, std::uint64_t limit) {
    GuestRun& g = guests_[w];
    const std::uint64_t seg = std::min(g.remaining, limit - now_);
    for (std::size_t i = 0; i <= 12; ++i)
        platform_.cpu.r[i] = register_tag(w, g.seq++);
    if (g.marked_start && !g.marked_end)
        g.native += seg;
    result_.worlds[w].busy_cycles += seg;
    advance(seg, Bucket::Busy);
    g.remaining -= seg;
    if (g.remaining == 0)
        g.in_progress = false;
}

void Engine::fault(WorldId w, hw::Address addr, const hw::AccessResult& res) {
    emit(TraceKind::Fault, static_cast<int>(w), addr, std::string(hw::to_string(res.outcome)) + ": " + res.cause);
    result_.faults.push_back({now_, w, addr, res.outcome, res.cause});
    result_.worlds[w].faulted = true;
    guests_[w].done = true;
    kernel_.park(w);
    do_switch(SwitchReason::Reschedule);
}

void Engine::retire(WorldId w) {
    emit(TraceKind::WorldFinished, static_cast<int>(w));
    result_.worlds[w].finished = true;
    guests_[w].done = true;
    kernel_.park(w);
    do_switch(SwitchReason::Reschedule);
}

void Engine::bus_access(WorldId w, hw::Address addr, hw::AccessKind kind, std::size_t next) {
    const auto res = hw::check_access(platform_, {hw::SecurityState::NonSecure, addr, kind});
    if (!res.allowed()) {
        fault(w, addr, res);
        return;
    }
    guests_[w].cursor = next;
    if (guests_[w].marked_start && !guests_[w].marked_end)
        ++guests_[w].native;
    ++result_.worlds[w].busy_cycles;
    advance(1, Bucket::Busy);
}

void Engine::configure_timer(WorldId w, const guest::ConfigureTimer& t, std::size_t next) {
    if (!platform_.nvic.valid(t.irq)) {
        fault(w, 0, {hw::AccessOutcome::BusFault, "no irq line " + std::to_string(t.irq)});
        return;
    }
    // Only effective for lines currently targeting the caller's state.
    hw::nvic_alias_access(platform_.nvic, hw::SecurityState::NonSecure, hw::NvicField::ISER, t.irq,
                          hw::RegisterOp::Write, 1);
    guests_[w].cursor = next;
    ++result_.worlds[w].busy_cycles;
    advance(1, Bucket::Busy);
    timers_[t.irq] = Timer{t.period_cycles, now_ + t.period_cycles, w};
}

void Engine::wcc(WorldId w, const guest::WccCall& call, std::size_t next) {
    GuestRun& g = guests_[w];
    g.cursor = next;

    std::optional<WorldId> peer;
    std::optional<Payload> payload;
    if (kernel::is_send(call.api)) {
        peer = call.peer == guest::kReplyPeer ? g.last_sender : kernel_.world_named(call.peer);
        payload = call.payload ? call.payload : g.last_payload;
        if (!payload)
            payload = Payload{};
    }

    advance(cost_.wcc_gateway_cycles, Bucket::Kernel);
    const auto res = kernel_.wcc_call(platform_, w, call.api, peer, payload);
    ++result_.worlds[w].wcc_calls;

    std::string detail = std::string(kernel::to_string(call.api));
    if (peer)
        detail += " " + config_.worlds.at(*peer).name;
    detail += " " + std::string(kernel::to_string(res.status));
    emit(TraceKind::WccCall, static_cast<int>(w), static_cast<std::uint64_t>(res.status), detail);

    if (res.received) {
        g.last_sender = res.received->sender;
        g.last_payload = res.received->payload;
    }
    if (res.woken) {
        GuestRun& woken = guests_[*res.woken];
        woken.last_sender = w;
        const auto words = kernel::payload_words(*payload);
        woken.expected[4] = words[0];
        woken.expected[5] = words[1];
        woken.expected[6] = words[2];
        woken.has_expected = true;
    }

    if (!res.caller_blocked) {
        check_registers_zero(platform_.cpu.r, res.received.has_value());
        return;
    }
    g.blocked_call = call.api;
    if (res.schedule_next)
        do_switch(SwitchReason::Blocking, res.schedule_next);
    else
        do_switch(SwitchReason::Reschedule);
}

void Engine::step_guest() {
    tail_chain_ = false;
    const std::uint64_t limit = std::min(next_external(), horizon_end_);
    const auto running = kernel_.state().running;
    if (!running) {
        advance(limit - now_, Bucket::Idle);
        return;
    }
    const WorldId w = *running;
    GuestRun& g = guests_[w];

    if (g.waiting_irq) {
        // A preempting world hands the CPU back once it goes idle.
        if (!kernel_.state().preempted.empty()) {
            do_switch(SwitchReason::PreemptReturn);
            return;
        }
        advance(limit - now_, Bucket::Idle);
        return;
    }
    if (g.in_progress) {
        run_compute(w, limit);
        return;
    }

    if (++instant_steps_ > kMaxInstantSteps)
        throw std::runtime_error("world " + config_.worlds[w].name + " makes no progress");

    guest::Step step;
    try {
        step = guest::guest_step(programs_[w], g.cursor, kForever);
    } catch (const guest::EndOfProgram&) {
        retire(w);
        return;
    }

    std::visit(
        [&](const auto& ev) {
            using E = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<E, guest::Compute> || std::is_same_v<E, guest::IrqHandlerBody>) {
                g.cursor = step.next;
                g.remaining = ev.cycles;
                g.in_progress = true;
                run_compute(w, limit);
            } else if constexpr (std::is_same_v<E, guest::Read>) {
                bus_access(w, ev.addr, hw::AccessKind::Read, step.next);
            } else if constexpr (std::is_same_v<E, guest::Write>) {
                bus_access(w, ev.addr, hw::AccessKind::Write, step.next);
            } else if constexpr (std::is_same_v<E, guest::ConfigureTimer>) {
                configure_timer(w, ev, step.next);
            } else if constexpr (std::is_same_v<E, guest::WaitIrq>) {
                g.cursor = step.next;
                auto it = g.serviced.find(ev.irq);
                if (it != g.serviced.end() && it->second > 0)
                    --it->second;
                else
                    g.waiting_irq = ev.irq;
            } else if constexpr (std::is_same_v<E, guest::WccCall>) {
                wcc(w, ev, step.next);
            } else if constexpr (std::is_same_v<E, guest::MarkStart>) {
                g.cursor = step.next;
                g.marked_start = true;
                g.native = 0;
                emit(TraceKind::MarkStart, static_cast<int>(w));
            } else if constexpr (std::is_same_v<E, guest::MarkEnd>) {
                g.cursor = step.next;
                g.marked_end = true;
                emit(TraceKind::MarkEnd, static_cast<int>(w), g.native);
            } else {
                static_assert(std::is_same_v<E, guest::LoopForever>);
                throw std::logic_error("guest_step returned LoopForever");
            }
        },
        step.event);
}

bool Engine::measured_done() const {
    bool any = false;
    for (WorldId w = 0; w < guests_.size(); ++w) {
        if (!programs_[w].measured())
            continue;
        any = true;
        if (!guests_[w].marked_end && !guests_[w].done)
            return false;
    }
    return any;
}

bool Engine::anything_runnable() const {
    for (WorldId w = 0; w < guests_.size(); ++w) {
        if (kernel_.runnable(w))
            return true;
    }
    return false;
}

RunResult Engine::run() {
    const std::size_t n = config_.worlds.size();
    if (programs_.size() != n)
        throw std::invalid_argument("run: " + std::to_string(programs_.size()) + " workloads for " +
                                    std::to_string(n) + " worlds");
    result_.worlds.resize(n);

    const kernel::BootImage image = options_.image ? *options_.image : default_boot_image(config_);
    if (kernel_.secure_boot(image) == kernel::BootOutcome::Locked) {
        emit(TraceKind::BootLocked, kKernel);
        result_.outcome = RunOutcome::Locked;
        return std::move(result_);
    }

    emit(TraceKind::BootBegin, kKernel);
    try {
        kernel_.partition(platform_);
    } catch (const kernel::PartitionError& e) {
        emit(TraceKind::BootAborted, kKernel, 0, e.what());
        result_.outcome = RunOutcome::Aborted;
        result_.error = e.what();
        return std::move(result_);
    }
    mpc_snapshot_ = platform_.mpcs;
    ppc_snapshot_ = platform_.ppc;
    kernel_.init(platform_);
    // SysTick is armed by init but only starts counting at kick-off.
    platform_.systick.enabled = false;
    result_.boot_cycles = cost_.boot_cycles(n);
    advance(result_.boot_cycles, Bucket::Kernel);
    emit(TraceKind::BootEnd, kKernel, result_.boot_cycles);

    platform_.systick.enabled = true;
    kernel_.kick_off(platform_);
    result_.kick_off_cycle = now_;
    horizon_end_ = now_ + options_.horizon;
    emit(TraceKind::KickOff, 0);
    ++result_.worlds[0].slots;
    check_registers_zero(platform_.cpu.r, false);
    check_aliases();
    check_gates();
    notify(kernel::SwitchRecord{std::nullopt, WorldId{0}, SwitchReason::Tick});

    while (true) {
        if (systick_pending_) {
            systick_pending_ = false;
            do_switch(SwitchReason::Tick);
            continue;
        }
        if (deliver_interrupt())
            continue;
        if (measured_done()) {
            emit(TraceKind::Completed, kKernel);
            result_.outcome = RunOutcome::Completed;
            break;
        }
        if (!anything_runnable()) {
            const bool blocked = std::any_of(guests_.begin(), guests_.end(),
                                             [](const GuestRun& g) { return !g.done; });
            emit(blocked ? TraceKind::Stalled : TraceKind::Completed, kKernel);
            result_.outcome = blocked ? RunOutcome::Stalled : RunOutcome::Completed;
            break;
        }
        if (now_ >= horizon_end_) {
            emit(TraceKind::HorizonReached, kKernel);
            result_.outcome = RunOutcome::Horizon;
            break;
        }
        step_guest();
    }
    result_.end_cycle = now_;
    return std::move(result_);
}

}  // namespace

RunResult run(const kernel::SystemConfig& config, const std::vector<guest::WorkloadProgram>& workloads,
              const CostModel& cost, const RunOptions& options) {
    kernel::validate_config(config);
    // Each tick must leave the world some time after the switch and an irq
    // entry, or the guests never advance.
    if (config.tick_cycles() <= cost.world_switch_cycles + cost.irq_entry_cycles)
        throw kernel::ConfigError("tick_us", "tick of " + std::to_string(config.tick_cycles()) +
                                                 " cycles does not exceed the world switch and irq entry cost");
    Engine engine(config, workloads, cost, options);
    return engine.run();
}

}  // namespace mwtee::sim
