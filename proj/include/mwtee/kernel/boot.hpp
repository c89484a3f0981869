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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mwtee::kernel {

using Digest = std::array<std::uint8_t, 64>;

Digest sha512(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);

// Kernel plus world binaries, opaque at this level, and the digest stored
// alongside them.
struct BootImage {
    std::vector<std::uint8_t> payload;
    Digest stored_digest{};

    // Image whose stored digest matches its payload.
    static BootImage sign(std::vector<std::uint8_t> payload);

    bool digest_matches() const { return sha512(payload) == stored_digest; }

    // Flips one payload bit (bit index counted from the first byte's LSB).
    void flip_bit(std::size_t bit);
};

}  // namespace mwtee::kernel
