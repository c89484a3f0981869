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

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mwtee::hw {

using Address = std::uint32_t;

// Ordered so that max() implements the "more secure wins" combination.
enum class SecurityAttribution : std::uint8_t {
    NonSecure = 0,
    SecureNSC = 1,
    Secure = 2,
};

enum class SecurityState : std::uint8_t { Secure, NonSecure };

std::string_view to_string(SecurityAttribution attr);
std::string_view to_string(SecurityState state);

constexpr SecurityAttribution combine_attribution(SecurityAttribution sau_attr,
                                                  SecurityAttribution idau_attr) {
    return std::max(sau_attr, idau_attr);
}

inline constexpr std::size_t kSauRegionCount = 8;
inline constexpr std::uint32_t kSauGranule = 32;

struct SauRegion {
    Address base = 0;
    Address limit = 0;  // inclusive
    bool nsc = false;
    bool enabled = false;

    constexpr bool contains(Address addr) const {
        return enabled && addr >= base && addr <= limit;
    }

    // Throws std::invalid_argument on a misaligned or inverted region.
    void validate() const;

    friend bool operator==(const SauRegion&, const SauRegion&) = default;
};

// Builds an enabled region covering [base, base + size).
SauRegion make_sau_region(Address base, std::uint32_t size, bool nsc);

struct SauState {
    bool enabled = false;
    std::array<SauRegion, kSauRegionCount> regions{};
    bool all_non_secure_when_disabled = false;

    std::size_t enabled_count() const;

    // Throws std::invalid_argument if any region is malformed or two enabled
    // regions overlap.
    void validate() const;

    friend bool operator==(const SauState&, const SauState&) = default;
};

// Static, platform-defined attribution. Immutable once built.
class IdauMap {
public:
    struct Entry {
        Address base = 0;
        std::uint32_t size = 0;
        SecurityAttribution attr = SecurityAttribution::Secure;
    };

    // Address bit 28 set: NonSecure alias; clear: Secure.
    static IdauMap bit28();

    // Explicit entries; addresses covered by no entry are Secure.
    static IdauMap table(std::vector<Entry> entries);

    SecurityAttribution attribute(Address addr) const;

    bool is_bit28() const { return bit28_; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    IdauMap(bool bit28, std::vector<Entry> entries)
        : bit28_(bit28), entries_(std::move(entries)) {}

    bool bit28_ = true;
    std::vector<Entry> entries_;
};

SecurityAttribution attribute_address(const SauState& sau, const IdauMap& idau, Address addr);

}  // namespace mwtee::hw
