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

#include "mwtee/kernel/partition.hpp"

#include <algorithm>
#include <vector>

namespace mwtee::kernel {

namespace {

struct NamedRegion {
    std::string name;
    MemRegionSpec region;
};

std::string describe(const NamedRegion& r) {
    return r.name + " [" + format_address(r.region.base) + ", +" + std::to_string(r.region.size) + ")";
}

bool overlaps(const MemRegionSpec& a, const MemRegionSpec& b) {
    return a.base < b.end() && b.base < a.end();
}

}  // namespace

MemRegionSpec gateway_region(const hw::PlatformDescription& platform) {
    return {platform.gateway_base, platform.gateway_size, RegionKind::Code};
}

void sp_validate(const SystemConfig& config) {
    std::vector<NamedRegion> all;
    for (const auto& w : config.worlds) {
        for (std::size_t i = 0; i < w.regions.size(); ++i)
            all.push_back({w.name + ".regions[" + std::to_string(i) + "]", w.regions[i]});
    }

    for (const auto& r : all) {
        bool inside = false;
        for (const auto& m : config.platform.memories) {
            if (m.kind == hw::MapKind::Memory && r.region.base >= m.base && r.region.end() <= m.end()) {
                inside = true;
                break;
            }
        }
        if (!inside)
            throw PartitionError(PartitionError::Kind::Overlap, "unmapped: " + describe(r) +
                                                                    " lies outside every platform memory");
    }

    const NamedRegion gateway{"gateway", gateway_region(config.platform)};
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (overlaps(all[i].region, gateway.region))
            throw PartitionError(PartitionError::Kind::Overlap,
                                 "overlap: " + describe(all[i]) + " and " + describe(gateway));
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (overlaps(all[i].region, all[j].region))
                throw PartitionError(PartitionError::Kind::Overlap,
                                     "overlap: " + describe(all[i]) + " and " + describe(all[j]));
        }
    }
}

hw::SauState sp_build_sau_table(const WorldConfig& world, const MemRegionSpec& gateway,
                                const hw::PlatformDescription& platform) {
    const std::size_t needed = world.regions.size() + world.devices.size() + 1;
    if (needed > hw::kSauRegionCount)
        throw PartitionError(PartitionError::Kind::Capacity,
                             "world " + world.name + " needs " + std::to_string(needed) +
                                 " sau regions; " + std::to_string(hw::kSauRegionCount) + " available");

    hw::SauState sau;
    sau.enabled = true;
    std::size_t slot = 0;
    for (const auto& r : world.regions)
        sau.regions[slot++] = hw::make_sau_region(r.base, r.size, false);
    for (const auto& dev : world.devices) {
        const auto* entry = platform.find_named(dev);
        if (entry == nullptr)
            throw PartitionError(PartitionError::Kind::Capacity, "unknown device " + dev);
        sau.regions[slot++] = hw::make_sau_region(entry->base, entry->size, false);
    }
    sau.regions[slot] = hw::make_sau_region(gateway.base, gateway.size, true);
    sau.validate();
    return sau;
}

hw::MpcState sp_build_mpc(const SystemConfig& config, const hw::MpcState& skeleton) {
    hw::MpcState mpc = skeleton;
    std::fill(mpc.blocks.begin(), mpc.blocks.end(), true);
    const std::uint64_t mem_end = std::uint64_t{mpc.base} + mpc.size();

    for (const auto& w : config.worlds) {
        for (std::size_t i = 0; i < w.regions.size(); ++i) {
            const auto& r = w.regions[i];
            if (r.base >= mem_end || r.end() <= mpc.base)
                continue;
            const std::uint64_t rel_base = r.base - mpc.base;
            const std::uint64_t rel_end = r.end() - mpc.base;
            if (rel_base % mpc.block_size != 0 || rel_end % mpc.block_size != 0)
                throw PartitionError(PartitionError::Kind::Granularity,
                                     w.name + ".regions[" + std::to_string(i) + "] at " +
                                         format_address(r.base) + " size " + std::to_string(r.size) +
                                         " is not aligned to " + std::to_string(mpc.block_size) +
                                         "-byte mpc blocks of " + mpc.memory_id);
            for (std::uint64_t b = rel_base / mpc.block_size; b < rel_end / mpc.block_size; ++b)
                mpc.blocks[b] = false;
        }
    }
    return mpc;
}

void sp_apply_static(const SystemConfig& config, hw::PlatformState& platform) {
    for (auto& mpc : platform.mpcs)
        mpc = sp_build_mpc(config, mpc);

    for (const auto& w : config.worlds) {
        for (const auto& dev : w.devices)
            platform.ppc.peripherals.at(dev) = false;
    }

    for (std::size_t wi = 0; wi < config.worlds.size(); ++wi) {
        for (const auto& irq : config.worlds[wi].irqs) {
            auto& line = platform.nvic.line(irq.id);
            line.priority = irq.priority;
            line.enabled = false;
            line.itns = wi == 0;
        }
    }
}

}  // namespace mwtee::kernel
