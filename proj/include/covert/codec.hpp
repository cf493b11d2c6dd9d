// Copyright 2026 The Covertlink Authors.
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

#include "covert/types.hpp"

namespace covert::codec {

using Digest = std::array<Byte, 32>;

/// CRC-8/ATM: poly 0x07, init 0x00, no reflection, no final xor.
std::uint8_t crc8(std::span<const Byte> data);

/// CRC-32/IEEE: poly 0x04C11DB7 reflected, init and final xor 0xFFFFFFFF.
std::uint32_t crc32(std::span<const Byte> data);

/// HMAC-SHA-256.
Digest hmac(std::span<const Byte> key, std::span<const Byte> message);

/// MSB-first expansion, 8 bits per byte.
BitStream bytes_to_bits(std::span<const Byte> data);

/// Inverse of bytes_to_bits. Throws LengthError unless the bit count is a
/// multiple of 8.
Bytes bits_to_bytes(std::span<const Bit> bits);

inline void put_be16(Byte* out, std::uint16_t v) {
  out[0] = static_cast<Byte>(v >> 8);
  out[1] = static_cast<Byte>(v);
}

inline void put_be32(Byte* out, std::uint32_t v) {
  out[0] = static_cast<Byte>(v >> 24);
  out[1] = static_cast<Byte>(v >> 16);
  out[2] = static_cast<Byte>(v >> 8);
  out[3] = static_cast<Byte>(v);
}

inline std::uint16_t get_be16(const Byte* in) {
  return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

inline std::uint32_t get_be32(const Byte* in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
         (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

}  // namespace covert::codec
