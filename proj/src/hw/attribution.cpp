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

#include "mwtee/hw/attribution.hpp"

#include <stdexcept>
#include <string>

namespace mwtee::hw {

std::string_view to_string(SecurityAttribution attr) {
    switch (attr) {
    case SecurityAttribution::NonSecure:
        return "non_secure";
    case SecurityAttribution::SecureNSC:
        return "nsc";
    case SecurityAttribution::Secure:
        return "secure";
    }
    return "?";
}

std::string_view to_string(SecurityState state) {
    return state == SecurityState::Secure ? "secure" : "non_secure";
}

void SauRegion::validate() const {
    if (base > limit)
        throw std::invalid_argument("sau region base above limit");
    const std::uint64_t end = std::uint64_t{limit} + 1;
    if (base % kSauGranule != 0 || end % kSauGranule != 0)
        throw std::invalid_argument("sau region not 32-byte aligned");
}

SauRegion make_sau_region(Address base, std::uint32_t size, bool nsc) {
    if (size == 0)
        throw std::invalid_argument("sau region of size 0");
    const std::uint64_t end = std::uint64_t{base} + size;
    if (end > (std::uint64_t{1} << 32))
        throw std::invalid_argument("sau region wraps the address space");
    SauRegion region{base, static_cast<Address>(end - 1), nsc, true};
    region.validate();
    return region;
}

std::size_t SauState::enabled_count() const {
    return static_cast<std::size_t>(
        std::count_if(regions.begin(), regions.end(), [](const SauRegion& r) { return r.enabled; }));
}

void SauState::validate() const {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (!regions[i].enabled)
            continue;
        regions[i].validate();
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            if (!regions[j].enabled)
                continue;
            if (regions[i].base <= regions[j].limit && regions[j].base <= regions[i].limit)
                throw std::invalid_argument("sau regions " + std::to_string(i) + " and " +
                                            std::to_string(j) + " overlap");
        }
    }
}

IdauMap IdauMap::bit28() {
    return IdauMap(true, {});
}

IdauMap IdauMap::table(std::vector<Entry> entries) {
    for (const auto& e : entries) {
        if (e.size == 0 || std::uint64_t{e.base} + e.size > (std::uint64_t{1} << 32))
            throw std::invalid_argument("idau entry is empty or wraps");
    }
    return IdauMap(false, std::move(entries));
}

SecurityAttribution IdauMap::attribute(Address addr) const {
    if (bit28_)
        return (addr & (1u << 28)) ? SecurityAttribution::NonSecure : SecurityAttribution::Secure;
    // First match wins, in declaration order.
    for (const auto& e : entries_) {
        if (addr >= e.base && std::uint64_t{addr} < std::uint64_t{e.base} + e.size)
            return e.attr;
    }
    return SecurityAttribution::Secure;
}

SecurityAttribution attribute_address(const SauState& sau, const IdauMap& idau, Address addr) {
    SecurityAttribution sau_side = SecurityAttribution::Secure;
    if (!sau.enabled) {
        sau_side = sau.all_non_secure_when_disabled ? SecurityAttribution::NonSecure
                                                    : SecurityAttribution::Secure;
    } else {
        for (const auto& region : sau.regions) {
            if (region.contains(addr)) {
                sau_side = region.nsc ? SecurityAttribution::SecureNSC : SecurityAttribution::NonSecure;
                break;
            }
        }
    }
    return combine_attribution(sau_side, idau.attribute(addr));
}

}  // namespace mwtee::hw
