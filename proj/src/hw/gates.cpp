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

#include "mwtee/hw/gates.hpp"

#include <bit>
#include <stdexcept>

namespace mwtee::hw {

MpcState MpcState::make(std::string memory_id, Address base, std::uint32_t size,
                        std::uint32_t block_size) {
    if (block_size < 32 || !std::has_single_bit(block_size))
        throw std::invalid_argument("mpc block size must be a power of two >= 32");
    if (size == 0 || size % block_size != 0)
        throw std::invalid_argument("memory '" + memory_id + "' size is not a multiple of the mpc block size");
    MpcState mpc;
    mpc.memory_id = std::move(memory_id);
    mpc.base = base;
    mpc.block_size = block_size;
    mpc.blocks.assign(size / block_size, true);
    return mpc;
}

}  // namespace mwtee::hw
