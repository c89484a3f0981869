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

#include "mwtee/kernel/boot.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace mwtee::kernel {

Digest sha512(std::span<const std::uint8_t> data) {
    Digest out{};
    SHA512(data.data(), data.size(), out.data());
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

BootImage BootImage::sign(std::vector<std::uint8_t> payload) {
    BootImage image;
    image.payload = std::move(payload);
    image.stored_digest = sha512(image.payload);
    return image;
}

void BootImage::flip_bit(std::size_t bit) {
    if (bit / 8 >= payload.size())
        throw std::out_of_range("bit index past the end of the payload");
    payload[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
}

}  // namespace mwtee::kernel
