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

#include "covert/packet.hpp"

#include <algorithm>
#include <string>

namespace covert::packet {
namespace {

constexpr std::size_t kInfoOffset = 29;
constexpr std::size_t kCrcOffset = 31;
constexpr std::size_t kAddressBytes = 12;

std::uint16_t check_packet_number(std::uint16_t n) {
  if (n >= kPacketNumberModulus)
    throw ValidationError("packet number " + std::to_string(n) +
                          " exceeds 10 bits");
  return n;
}

void expect_length(PacketType type, std::span<const Byte> payload,
                   std::size_t expected) {
  if (payload.size() != expected)
    throw ValidationError(std::string(to_string(type)) + " payload must be " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(payload.size()));
}

}  // namespace

const char* to_string(PacketType type) {
  switch (type) {
    case PacketType::Ack: return "ack";
    case PacketType::Nack: return "nack";
    case PacketType::Data: return "data";
    case PacketType::Address: return "address";
    case PacketType::Challenge: return "challenge";
    case PacketType::Response: return "response";
    case PacketType::AuthAck: return "auth_ack";
    case PacketType::Reserved: return "reserved";
  }
  return "unknown";
}

std::array<Byte, kHeaderBytes> build_header(const HeaderMeta& meta) {
  check_packet_number(meta.packet_number);
  const auto type = static_cast<unsigned>(meta.type);
  if (type > 7) throw ValidationError("packet type exceeds 3 bits");

  std::array<Byte, kHeaderBytes> out{};
  codec::put_be32(out.data(), meta.payload_len);
  out[4] = static_cast<Byte>(kCrcBytes);
  const unsigned modulation = meta.modulation == AskOrder::Four ? 1u : 0u;
  const auto info = static_cast<std::uint16_t>(
      (unsigned{meta.packet_number} << 6) | (modulation << 5) |
      (unsigned{meta.flag.value()} << 3) | type);
  codec::put_be16(out.data() + kInfoOffset, info);
  out[kCrcOffset] = codec::crc8(std::span(out.data(), kCrcOffset));
  return out;
}

std::optional<CovertHeader> parse_header(std::span<const Byte> data,
                                         std::uint32_t max_payload) {
  if (data.size() != kHeaderBytes)
    throw LengthError("header must be 32 bytes, got " +
                      std::to_string(data.size()));
  if (codec::crc8(data.first(kCrcOffset)) != data[kCrcOffset]) return std::nullopt;
  if (data[4] != kCrcBytes) return std::nullopt;

  const std::uint16_t info = codec::get_be16(data.data() + kInfoOffset);
  const auto type = static_cast<PacketType>(info & 0x7u);
  if (type == PacketType::Reserved) return std::nullopt;

  CovertHeader h;
  h.meta.payload_len = codec::get_be32(data.data());
  if (h.meta.payload_len > max_payload) return std::nullopt;
  h.meta.packet_number = static_cast<std::uint16_t>(info >> 6);
  h.meta.modulation = ((info >> 5) & 1u) ? AskOrder::Four : AskOrder::Two;
  h.meta.flag = ThresholdFlag((info >> 3) & 0x3u);
  h.meta.type = type;
  h.crc_len = data[4];
  h.header_crc = data[kCrcOffset];
  return h;
}

Bytes build_packet(PacketType type, std::span<const Byte> payload,
                   std::uint16_t packet_number, AskOrder modulation,
                   ThresholdFlag flag) {
  if (payload.size() > 0xFFFFFFFFull)
    throw ValidationError("payload length exceeds 32 bits");
  HeaderMeta meta;
  meta.payload_len = static_cast<std::uint32_t>(payload.size());
  meta.packet_number = packet_number;
  meta.modulation = modulation;
  meta.flag = flag;
  meta.type = type;
  const auto header = build_header(meta);

  Bytes wire(wire_size(payload.size()));
  std::copy(header.begin(), header.end(), wire.begin());
  std::copy(payload.begin(), payload.end(), wire.begin() + kHeaderBytes);
  codec::put_be32(wire.data() + kHeaderBytes + payload.size(), codec::crc32(payload));
  return wire;
}

std::optional<Bytes> parse_packet(std::span<const Byte> wire,
                                  const CovertHeader& header) {
  const std::size_t len = header.meta.payload_len;
  if (wire.size() < wire_size(len))
    throw LengthError("packet needs " + std::to_string(wire_size(len)) +
                      " bytes, got " + std::to_string(wire.size()));
  const auto payload = wire.subspan(kHeaderBytes, len);
  const std::uint32_t received = codec::get_be32(wire.data() + kHeaderBytes + len);
  if (codec::crc32(payload) != received) return std::nullopt;
  return Bytes(payload.begin(), payload.end());
}

PacketType type_of(const TypedPayload& payload) {
  return static_cast<PacketType>(payload.index());
}

Bytes build_typed_payload(const TypedPayload& payload) {
  struct Visitor {
    Bytes operator()(const Ack& a) const { return number(a.packet_number); }
    Bytes operator()(const Nack& n) const { return number(n.packet_number); }
    Bytes operator()(const DataChunk& d) const { return d.bytes; }
    Bytes operator()(const AddressInfo& a) const {
      Bytes out(kAddressBytes);
      std::copy(a.source_msin.begin(), a.source_msin.end(), out.begin());
      std::copy(a.destination_msin.begin(), a.destination_msin.end(), out.begin() + 5);
      codec::put_be16(out.data() + 10, a.total_packets);
      return out;
    }
    Bytes operator()(const Challenge& c) const { return {c.nonce.begin(), c.nonce.end()}; }
    Bytes operator()(const Response& r) const { return {r.mac.begin(), r.mac.end()}; }
    Bytes operator()(const AuthAck&) const { return {}; }

    static Bytes number(std::uint16_t n) {
      Bytes out(2);
      codec::put_be16(out.data(), check_packet_number(n));
      return out;
    }
  };
  return std::visit(Visitor{}, payload);
}

TypedPayload parse_typed_payload(PacketType type, std::span<const Byte> payload) {
  switch (type) {
    case PacketType::Ack:
    case PacketType::Nack: {
      expect_length(type, payload, 2);
      const std::uint16_t n = check_packet_number(codec::get_be16(payload.data()));
      if (type == PacketType::Ack) return Ack{n};
      return Nack{n};
    }
    case PacketType::Data:
      return DataChunk{Bytes(payload.begin(), payload.end())};
    case PacketType::Address: {
      expect_length(type, payload, kAddressBytes);
      AddressInfo a;
      std::copy_n(payload.begin(), 5, a.source_msin.begin());
      std::copy_n(payload.begin() + 5, 5, a.destination_msin.begin());
      a.total_packets = codec::get_be16(payload.data() + 10);
      return a;
    }
    case PacketType::Challenge: {
      expect_length(type, payload, kChallengeBytes);
      Challenge c;
      std::copy(payload.begin(), payload.end(), c.nonce.begin());
      return c;
    }
    case PacketType::Response: {
      expect_length(type, payload, codec::Digest{}.size());
      Response r;
      std::copy(payload.begin(), payload.end(), r.mac.begin());
      return r;
    }
    case PacketType::AuthAck:
      expect_length(type, payload, 0);
      return AuthAck{};
    case PacketType::Reserved:
      break;
  }
  throw ValidationError("packet type 7 is reserved");
}

}  // namespace covert::packet
