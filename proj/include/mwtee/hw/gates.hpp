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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mwtee/hw/attribution.hpp"

namespace mwtee::hw {

inline constexpr std::uint32_t kDefaultMpcBlockSize = 16 * 1024;

// Block-based memory protection controller. One security bit per block,
// true = Secure. Every block starts Secure.
struct MpcState {
    std::string memory_id;
    Address base = 0;
    std::uint32_t block_size = kDefaultMpcBlockSize;
    std::vector<bool> blocks;

    // Throws std::invalid_argument unless block_size is a power of two >= 32
    // that divides size.
    static MpcState make(std::string memory_id, Address base, std::uint32_t size,
                         std::uint32_t block_size);

    std::uint64_t size() const { return std::uint64_t{block_size} * blocks.size(); }
    bool covers(Address addr) const {
        return addr >= base && std::uint64_t{addr} < std::uint64_t{base} + size();
    }
    std::size_t block_index(Address addr) const { return (addr - base) / block_size; }
    bool is_secure(Address addr) const { return blocks[block_index(addr)]; }

    friend bool operator==(const MpcState&, const MpcState&) = default;
};

// Peripheral protection controller: peripheral id -> security bit
// (true = Secure).
struct PpcState {
    std::map<std::string, bool> peripherals;

    friend bool operator==(const PpcState&, const PpcState&) = default;
};

}  // namespace mwtee::hw
