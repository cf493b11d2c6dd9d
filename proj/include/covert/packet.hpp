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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "covert/codec.hpp"
#include "covert/constellation.hpp"
#include "covert/types.hpp"

namespace covert::packet {

inline constexpr std::size_t kHeaderBytes = 32;
inline constexpr std::size_t kCrcBytes = 4;
inline constexpr std::size_t kMinPacketBytes = kHeaderBytes + kCrcBytes;
inline constexpr std::uint16_t kPacketNumberModulus = 1024;
inline constexpr std::size_t kChallengeBytes = 32;
inline constexpr std::uint32_t kDefaultMaxPayload = 1u << 20;

enum class PacketType : std::uint8_t {
  Ack = 0,
  Nack = 1,
  Data = 2,
  Address = 3,
  Challenge = 4,
  Response = 5,
  AuthAck = 6,
  Reserved = 7,
};

const char* to_string(PacketType type);

// Header content minus the derived length-of-CRC and CRC8 fields.
struct HeaderMeta {
  std::uint32_t payload_len = 0;
  std::uint16_t packet_number = 0;
  AskOrder modulation = AskOrder::Two;
  ThresholdFlag flag;
  PacketType type = PacketType::Data;

  friend bool operator==(const HeaderMeta&, const HeaderMeta&) = default;
};

struct CovertHeader {
  HeaderMeta meta;
  std::uint8_t crc_len = kCrcBytes;
  std::uint8_t header_crc = 0;
};

/// Serializes the 32-byte header:
///   [0..3]   payload length, big-endian
///   [4]      CRC length (always 4)
///   [5..28]  reserved, zero
///   [29..30] info: packet#(10) | modulation(1) | flag(2) | type(3)
///   [31]     CRC-8 over bytes 0..30
/// Throws ValidationError for out-of-range fields.
std::array<Byte, kHeaderBytes> build_header(const HeaderMeta& meta);

/// Returns the header iff the CRC-8 verifies, the CRC length is 4, the type
/// is not reserved and the payload length does not exceed max_payload.
/// Throws LengthError unless exactly 32 bytes are given.
std::optional<CovertHeader> parse_header(
    std::span<const Byte> data, std::uint32_t max_payload = kDefaultMaxPayload);

/// header || payload || crc32(payload).
Bytes build_packet(PacketType type, std::span<const Byte> payload,
                   std::uint16_t packet_number, AskOrder modulation,
                   ThresholdFlag flag);

/// Payload if its CRC-32 verifies, nullopt on a CRC failure. Reads at most
/// 32 + L_P + 4 bytes; throws LengthError if fewer are available.
std::optional<Bytes> parse_packet(std::span<const Byte> wire,
                                  const CovertHeader& header);

inline std::size_t wire_size(std::size_t payload_len) {
  return kHeaderBytes + payload_len + kCrcBytes;
}

// Typed payloads.

struct Ack {
  std::uint16_t packet_number = 0;
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct Nack {
  std::uint16_t packet_number = 0;
  friend bool operator==(const Nack&, const Nack&) = default;
};

struct DataChunk {
  Bytes bytes;
  friend bool operator==(const DataChunk&, const DataChunk&) = default;
};

using Msin = std::array<Byte, 5>;

struct AddressInfo {
  Msin source_msin{};
  Msin destination_msin{};
  std::uint16_t total_packets = 0;
  friend bool operator==(const AddressInfo&, const AddressInfo&) = default;
};

struct Challenge {
  std::array<Byte, kChallengeBytes> nonce{};
  friend bool operator==(const Challenge&, const Challenge&) = default;
};

struct Response {
  codec::Digest mac{};
  friend bool operator==(const Response&, const Response&) = default;
};

struct AuthAck {
  friend bool operator==(const AuthAck&, const AuthAck&) = default;
};

using TypedPayload =
    std::variant<Ack, Nack, DataChunk, AddressInfo, Challenge, Response, AuthAck>;

PacketType type_of(const TypedPayload& payload);

Bytes build_typed_payload(const TypedPayload& payload);

/// Throws ValidationError when the length does not match the control type's
/// layout, a referenced packet number exceeds 10 bits, or the type is
/// reserved.
TypedPayload parse_typed_payload(PacketType type, std::span<const Byte> payload);

}  // namespace covert::packet
