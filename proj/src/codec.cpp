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

#include "covert/codec.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

namespace covert::codec {
namespace {

constexpr std::array<std::uint8_t, 256> make_crc8_table() {
  std::array<std::uint8_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint8_t>(i);
    for (int b = 0; b < 8; ++b)
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<std::uint8_t>(crc << 1);
    table[i] = crc;
  }
  return table;
}

constexpr std::array<std::uint32_t, 256> make_crc32_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t crc = i;
    for (int b = 0; b < 8; ++b)
      crc = (crc & 1u) ? (crc >> 1) ^ 0xEDB88320u : (crc >> 1);
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrc8Table = make_crc8_table();
constexpr auto kCrc32Table = make_crc32_table();

}  // namespace

std::uint8_t crc8(std::span<const Byte> data) {
  std::uint8_t crc = 0x00;
  for (Byte b : data) crc = kCrc8Table[crc ^ b];
  return crc;
}

std::uint32_t crc32(std::span<const Byte> data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (Byte b : data) crc = kCrc32Table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

Digest hmac(std::span<const Byte> key, std::span<const Byte> message) {
  Digest out{};
  unsigned int len = 0;
  const auto* ok = HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
                        message.data(), message.size(), out.data(), &len);
  if (ok == nullptr || len != out.size())
    throw std::runtime_error("HMAC-SHA-256 computation failed");
  return out;
}

BitStream bytes_to_bits(std::span<const Byte> data) {
  BitStream bits;
  bits.reserve(data.size() * 8);
  for (Byte b : data)
    for (int i = 7; i >= 0; --i) bits.push_back(static_cast<Bit>((b >> i) & 1));
  return bits;
}

Bytes bits_to_bytes(std::span<const Bit> bits) {
  if (bits.size() % 8 != 0)
    throw LengthError("bit count " + std::to_string(bits.size()) +
                      " is not a multiple of 8");
  Bytes out(bits.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Byte b = 0;
    for (std::size_t k = 0; k < 8; ++k)
      b = static_cast<Byte>((b << 1) | (bits[8 * i + k] & 1));
    out[i] = b;
  }
  return out;
}

}  // namespace covert::codec
