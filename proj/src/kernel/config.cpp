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

#include "mwtee/kernel/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace mwtee::kernel {

using nlohmann::json;

bool WorldConfig::owns_irq(std::uint32_t irq) const {
    return std::any_of(irqs.begin(), irqs.end(), [irq](const IrqAssignment& a) { return a.id == irq; });
}

std::string_view to_string(SchedulerMode mode) {
    return mode == SchedulerMode::RoundRobin ? "round_robin" : "priority_preemptive";
}

std::uint64_t SystemConfig::tick_cycles() const {
    return static_cast<std::uint64_t>(std::llround(tick_us * static_cast<double>(cpu_hz) / 1e6));
}

const std::vector<std::string>& cost_model_keys() {
    static const std::vector<std::string> keys{
        "boot_base_cycles", "boot_per_world_cycles", "irq_entry_cycles",
        "wcc_gateway_cycles", "world_switch_cycles"};
    return keys;
}

std::string format_address(Address addr) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", addr);
    return buf;
}

hw::PlatformDescription reference_platform() {
    using hw::MapKind;
    hw::PlatformDescription p;
    p.memories = {
        {"kernel_flash", 0x0000'0000, 0x8'0000, MapKind::Memory},
        {"kernel_sram", 0x2000'0000, 0x2'0000, MapKind::Memory},
        {"code", 0x1000'0000, 0x20'0000, MapKind::Memory},
        {"sram", 0x3000'0000, 0x10'0000, MapKind::Memory},
        {"timer0", 0x5000'0000, 0x1000, MapKind::Peripheral},
        {"timer1", 0x5000'1000, 0x1000, MapKind::Peripheral},
        {"timer2", 0x5000'2000, 0x1000, MapKind::Peripheral},
        {"uart0", 0x5010'0000, 0x1000, MapKind::Peripheral},
        {"uart1", 0x5010'1000, 0x1000, MapKind::Peripheral},
        {"gpio", 0x5011'0000, 0x1000, MapKind::Peripheral},
        {"pwm", 0x5012'0000, 0x1000, MapKind::Peripheral},
        {"eth", 0x5020'0000, 0x1'0000, MapKind::Peripheral},
    };
    p.idau = hw::IdauMap::bit28();
    p.mpc_block_size = hw::kDefaultMpcBlockSize;
    p.gateway_base = 0x1000'0000;
    p.gateway_size = 0x4000;
    p.irq_count = hw::kDefaultIrqCount;
    return p;
}

namespace {

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object())
        throw ConfigError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required) {
    expect_object(j, path);
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
    for (auto key : required) {
        if (!j.contains(key))
            throw ConfigError(path.empty() ? std::string(key) : path + "." + std::string(key), "missing");
    }
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

Address parse_address(const json& j, const std::string& path) {
    if (!j.is_string())
        throw ConfigError(path, "expected a \"0x\"-prefixed hex string");
    const auto s = j.get<std::string>();
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X') || s.size() > 10)
        throw ConfigError(path, "expected a \"0x\"-prefixed hex string, got \"" + s + "\"");
    std::uint32_t value = 0;
    for (std::size_t i = 2; i < s.size(); ++i) {
        const char c = s[i];
        std::uint32_t digit;
        if (c >= '0' && c <= '9')
            digit = static_cast<std::uint32_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            digit = static_cast<std::uint32_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            digit = static_cast<std::uint32_t>(c - 'A' + 10);
        else
            throw ConfigError(path, "bad hex digit in \"" + s + "\"");
        value = (value << 4) | digit;
    }
    return value;
}

std::uint64_t parse_uint(const json& j, const std::string& path, std::uint64_t max) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw ConfigError(path, "expected a non-negative integer");
    const auto v = j.get<std::uint64_t>();
    if (v > max)
        throw ConfigError(path, "value " + std::to_string(v) + " out of range");
    return v;
}

std::string parse_string(const json& j, const std::string& path) {
    if (!j.is_string())
        throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

hw::SecurityAttribution parse_attr(const json& j, const std::string& path) {
    const auto s = parse_string(j, path);
    if (s == "non_secure")
        return hw::SecurityAttribution::NonSecure;
    if (s == "nsc")
        return hw::SecurityAttribution::SecureNSC;
    if (s == "secure")
        return hw::SecurityAttribution::Secure;
    throw ConfigError(path, "expected one of non_secure|nsc|secure");
}

hw::PlatformDescription parse_platform(const json& j, const std::string& path) {
    check_keys(j, path, {"memories", "idau", "mpc_block_size", "gateway", "irq_count"},
               {"memories", "gateway"});
    hw::PlatformDescription p;

    const auto mpath = join(path, "memories");
    if (!j["memories"].is_array() || j["memories"].empty())
        throw ConfigError(mpath, "expected a non-empty array");
    for (std::size_t i = 0; i < j["memories"].size(); ++i) {
        const auto& m = j["memories"][i];
        const auto ipath = index(mpath, i);
        check_keys(m, ipath, {"name", "base", "size", "kind"}, {"name", "base", "size", "kind"});
        hw::MemoryMapEntry e;
        e.name = parse_string(m["name"], join(ipath, "name"));
        e.base = parse_address(m["base"], join(ipath, "base"));
        e.size = static_cast<std::uint32_t>(parse_uint(m["size"], join(ipath, "size"), 0xFFFF'FFFFu));
        const auto kind = parse_string(m["kind"], join(ipath, "kind"));
        if (kind == "memory")
            e.kind = hw::MapKind::Memory;
        else if (kind == "peripheral")
            e.kind = hw::MapKind::Peripheral;
        else
            throw ConfigError(join(ipath, "kind"), "expected memory|peripheral");
        p.memories.push_back(std::move(e));
    }

    if (j.contains("idau")) {
        const auto& idau = j["idau"];
        const auto ipath = join(path, "idau");
        if (idau.is_string()) {
            if (idau.get<std::string>() != "bit28")
                throw ConfigError(ipath, "expected \"bit28\" or an explicit table");
            p.idau = hw::IdauMap::bit28();
        } else if (idau.is_array()) {
            std::vector<hw::IdauMap::Entry> entries;
            for (std::size_t i = 0; i < idau.size(); ++i) {
                const auto epath = index(ipath, i);
                check_keys(idau[i], epath, {"base", "size", "attr"}, {"base", "size", "attr"});
                hw::IdauMap::Entry e;
                e.base = parse_address(idau[i]["base"], join(epath, "base"));
                e.size = static_cast<std::uint32_t>(parse_uint(idau[i]["size"], join(epath, "size"), 0xFFFF'FFFFu));
                e.attr = parse_attr(idau[i]["attr"], join(epath, "attr"));
                entries.push_back(e);
            }
            try {
                p.idau = hw::IdauMap::table(std::move(entries));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(ipath, e.what());
            }
        } else {
            throw ConfigError(ipath, "expected \"bit28\" or an explicit table");
        }
    }
    if (j.contains("mpc_block_size"))
        p.mpc_block_size = static_cast<std::uint32_t>(
            parse_uint(j["mpc_block_size"], join(path, "mpc_block_size"), 0x8000'0000u));
    if (j.contains("irq_count"))
        p.irq_count = static_cast<std::uint32_t>(parse_uint(j["irq_count"], join(path, "irq_count"), 480));

    const auto gpath = join(path, "gateway");
    check_keys(j["gateway"], gpath, {"base", "size"}, {"base", "size"});
    p.gateway_base = parse_address(j["gateway"]["base"], join(gpath, "base"));
    p.gateway_size = static_cast<std::uint32_t>(parse_uint(j["gateway"]["size"], join(gpath, "size"), 0xFFFF'FFFFu));

    try {
        p.validate();
        hw::PlatformState probe(p);  // exercises the MPC geometry
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return p;
}

WorldConfig parse_world(const json& j, const std::string& path) {
    check_keys(j, path, {"name", "priority", "entry", "regions", "devices", "irqs", "workload"},
               {"name", "entry", "regions"});
    WorldConfig w;
    w.name = parse_string(j["name"], join(path, "name"));
    if (w.name.empty())
        throw ConfigError(join(path, "name"), "empty world name");
    if (j.contains("priority")) {
        if (!j["priority"].is_number_integer())
            throw ConfigError(join(path, "priority"), "expected an integer");
        w.priority = j["priority"].get<int>();
    }
    w.entry = parse_address(j["entry"], join(path, "entry"));

    const auto rpath = join(path, "regions");
    if (!j["regions"].is_array())
        throw ConfigError(rpath, "expected an array");
    for (std::size_t i = 0; i < j["regions"].size(); ++i) {
        const auto& r = j["regions"][i];
        const auto ipath = index(rpath, i);
        check_keys(r, ipath, {"base", "size", "kind"}, {"base", "size", "kind"});
        MemRegionSpec spec;
        spec.base = parse_address(r["base"], join(ipath, "base"));
        spec.size = static_cast<std::uint32_t>(parse_uint(r["size"], join(ipath, "size"), 0xFFFF'FFFFu));
        const auto kind = parse_string(r["kind"], join(ipath, "kind"));
        if (kind == "code")
            spec.kind = RegionKind::Code;
        else if (kind == "data")
            spec.kind = RegionKind::Data;
        else
            throw ConfigError(join(ipath, "kind"), "expected code|data");
        w.regions.push_back(spec);
    }

    if (j.contains("devices")) {
        const auto dpath = join(path, "devices");
        if (!j["devices"].is_array())
            throw ConfigError(dpath, "expected an array");
        for (std::size_t i = 0; i < j["devices"].size(); ++i)
            w.devices.push_back(parse_string(j["devices"][i], index(dpath, i)));
    }

    if (j.contains("irqs")) {
        const auto qpath = join(path, "irqs");
        if (!j["irqs"].is_array())
            throw ConfigError(qpath, "expected an array");
        for (std::size_t i = 0; i < j["irqs"].size(); ++i) {
            const auto ipath = index(qpath, i);
            check_keys(j["irqs"][i], ipath, {"id", "priority"}, {"id"});
            IrqAssignment a;
            a.id = static_cast<std::uint32_t>(parse_uint(j["irqs"][i]["id"], join(ipath, "id"), 479));
            if (j["irqs"][i].contains("priority"))
                a.priority = static_cast<std::uint8_t>(
                    parse_uint(j["irqs"][i]["priority"], join(ipath, "priority"), 255));
            w.irqs.push_back(a);
        }
    }

    if (j.contains("workload")) {
        const auto wpath = join(path, "workload");
        check_keys(j["workload"], wpath, {"name", "params"}, {"name"});
        w.workload.name = parse_string(j["workload"]["name"], join(wpath, "name"));
        if (j["workload"].contains("params")) {
            expect_object(j["workload"]["params"], join(wpath, "params"));
            w.workload.params = j["workload"]["params"];
        }
    }
    return w;
}

}  // namespace

void validate_config(const SystemConfig& config) {
    if (!(config.tick_us > 0.0))
        throw ConfigError("tick_us", "must be > 0");
    if (config.cpu_hz == 0)
        throw ConfigError("cpu_hz", "must be > 0");
    const double exact = config.tick_us * static_cast<double>(config.cpu_hz) / 1e6;
    if (std::fabs(exact - std::round(exact)) > 1e-6 || exact < 1.0)
        throw ConfigError("tick_us", "tick is not a whole number of cycles");
    if (exact > 4294967295.0)
        throw ConfigError("tick_us", "tick exceeds the 32-bit reload range");
    if (config.worlds.empty())
        throw ConfigError("worlds", "at least one world is required");

    std::map<std::uint32_t, std::string> irq_owner;
    std::map<std::string, std::string> device_owner;
    std::set<std::string> names;
    for (std::size_t wi = 0; wi < config.worlds.size(); ++wi) {
        const auto& w = config.worlds[wi];
        const auto wpath = index("worlds", wi);
        if (!names.insert(w.name).second)
            throw ConfigError(join(wpath, "name"), "world name '" + w.name + "' used twice");
        if (w.regions.size() + w.devices.size() > kMaxWorldResources)
            throw ConfigError(join(wpath, "regions"), "region capacity; 7 max");
        for (std::size_t ri = 0; ri < w.regions.size(); ++ri) {
            const auto& r = w.regions[ri];
            const auto rpath = index(join(wpath, "regions"), ri);
            if (r.size == 0)
                throw ConfigError(rpath, "region size must be > 0");
            if (r.end() > (std::uint64_t{1} << 32))
                throw ConfigError(rpath, "region wraps the address space");
            if (r.base % hw::kSauGranule != 0 || r.size % hw::kSauGranule != 0)
                throw ConfigError(rpath, "base and size must be multiples of 32");
        }
        std::set<std::uint32_t> own_irqs;
        for (std::size_t qi = 0; qi < w.irqs.size(); ++qi) {
            const auto id = w.irqs[qi].id;
            const auto qpath = index(join(wpath, "irqs"), qi);
            if (id >= config.platform.irq_count)
                throw ConfigError(qpath, "irq " + std::to_string(id) + " beyond the platform's irq count");
            if (!own_irqs.insert(id).second || irq_owner.count(id))
                throw ConfigError(qpath, "irq " + std::to_string(id) + " assigned twice");
            irq_owner[id] = w.name;
        }
        for (std::size_t di = 0; di < w.devices.size(); ++di) {
            const auto& dev = w.devices[di];
            const auto dpath = index(join(wpath, "devices"), di);
            const auto* entry = config.platform.find_named(dev);
            if (entry == nullptr || entry->kind != hw::MapKind::Peripheral)
                throw ConfigError(dpath, "unknown peripheral '" + dev + "'");
            if (device_owner.count(dev))
                throw ConfigError(dpath, "device " + dev + " assigned twice");
            device_owner[dev] = w.name;
        }
    }

    for (const auto& [key, value] : config.cost_overrides) {
        const auto& keys = cost_model_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(join("cost_model", key), "unknown key");
    }
}

SystemConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed json: ") + e.what());
    }
    check_keys(j, "", {"tick_us", "cpu_hz", "scheduler_mode", "platform", "cost_model", "worlds"},
               {"tick_us", "cpu_hz", "worlds"});

    SystemConfig config;
    if (!j["tick_us"].is_number())
        throw ConfigError("tick_us", "expected a number");
    config.tick_us = j["tick_us"].get<double>();
    config.cpu_hz = parse_uint(j["cpu_hz"], "cpu_hz", 4'000'000'000ull);

    if (j.contains("scheduler_mode")) {
        const auto mode = parse_string(j["scheduler_mode"], "scheduler_mode");
        if (mode == "round_robin")
            config.scheduler_mode = SchedulerMode::RoundRobin;
        else if (mode == "priority_preemptive")
            config.scheduler_mode = SchedulerMode::PriorityPreemptive;
        else
            throw ConfigError("scheduler_mode", "expected round_robin|priority_preemptive");
    }

    config.platform = j.contains("platform") ? parse_platform(j["platform"], "platform") : reference_platform();

    if (j.contains("cost_model")) {
        expect_object(j["cost_model"], "cost_model");
        for (const auto& [key, value] : j["cost_model"].items())
            config.cost_overrides[key] = parse_uint(value, join("cost_model", key), 0xFFFF'FFFFu);
    }

    if (!j["worlds"].is_array())
        throw ConfigError("worlds", "expected an array");
    for (std::size_t i = 0; i < j["worlds"].size(); ++i)
        config.worlds.push_back(parse_world(j["worlds"][i], index("worlds", i)));

    validate_config(config);
    return config;
}

json config_to_json(const SystemConfig& config) {
    json j;
    j["tick_us"] = config.tick_us;
    j["cpu_hz"] = config.cpu_hz;
    j["scheduler_mode"] = std::string(to_string(config.scheduler_mode));

    json platform;
    platform["memories"] = json::array();
    for (const auto& m : config.platform.memories) {
        platform["memories"].push_back({{"name", m.name},
                                        {"base", format_address(m.base)},
                                        {"size", m.size},
                                        {"kind", m.kind == hw::MapKind::Memory ? "memory" : "peripheral"}});
    }
    if (config.platform.idau.is_bit28()) {
        platform["idau"] = "bit28";
    } else {
        platform["idau"] = json::array();
        for (const auto& e : config.platform.idau.entries())
            platform["idau"].push_back(
                {{"base", format_address(e.base)}, {"size", e.size}, {"attr", std::string(hw::to_string(e.attr))}});
    }
    platform["mpc_block_size"] = config.platform.mpc_block_size;
    platform["gateway"] = {{"base", format_address(config.platform.gateway_base)},
                           {"size", config.platform.gateway_size}};
    platform["irq_count"] = config.platform.irq_count;
    j["platform"] = platform;

    if (!config.cost_overrides.empty())
        j["cost_model"] = config.cost_overrides;

    j["worlds"] = json::array();
    for (const auto& w : config.worlds) {
        json jw;
        jw["name"] = w.name;
        jw["priority"] = w.priority;
        jw["entry"] = format_address(w.entry);
        jw["regions"] = json::array();
        for (const auto& r : w.regions)
            jw["regions"].push_back({{"base", format_address(r.base)},
                                     {"size", r.size},
                                     {"kind", r.kind == RegionKind::Code ? "code" : "data"}});
        jw["devices"] = w.devices;
        jw["irqs"] = json::array();
        for (const auto& q : w.irqs)
            jw["irqs"].push_back({{"id", q.id}, {"priority", q.priority}});
        jw["workload"] = {{"name", w.workload.name}, {"params", w.workload.params}};
        j["worlds"].push_back(jw);
    }
    return j;
}

}  // namespace mwtee::kernel
