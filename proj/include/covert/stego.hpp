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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covert/constellation.hpp"
#include "covert/packet.hpp"
#include "covert/rng.hpp"
#include "covert/types.hpp"

namespace covert::stego {

// 32 header bytes at one bit per 2-ASK symbol.
inline constexpr std::size_t kHeaderSymbols = packet::kHeaderBytes * 8;

enum class Direction { Downlink, Uplink };

const char* to_string(Direction direction);

// One subframe's primary symbols available for embedding.
struct TransmissionOpportunity {
  std::vector<IQSymbol> primary_symbols;
  BitStream primary_bits;
  Direction direction = Direction::Downlink;
  std::uint64_t subframe_index = 0;
  // Set when the primary content was synthesized to carry covert data.
  bool dummy = false;

  std::size_t size() const { return primary_symbols.size(); }
};

struct EmbedPolicy {
  AskOrder payload_modulation = AskOrder::Four;
  bool undetectable = true;
  // Uniform per-symbol amplitude perturbation of +/- jitter around a level.
  double jitter = 0.0;
  bool dummy_primary = false;
  std::size_t dummy_symbols = 1200;

  /// Throws ValidationError unless jitter < min distance / 2 of every
  /// configuration the policy can select.
  void validate() const;

  AskConfig payload_config(AskOrder order, ThresholdFlag flag) const;

  /// Uniform over {0..3} when undetectable, otherwise flag 0.
  ThresholdFlag draw_flag(Rng& rng) const;
};

/// Payload byte budget of an opportunity of `symbols` primary symbols, or
/// nullopt when not even a zero-payload packet fits.
std::optional<std::size_t> capacity(std::size_t symbols, AskOrder payload_modulation);

/// Symbols occupied by payload plus CRC-32 at the given order.
std::size_t payload_symbols(std::size_t payload_len, AskOrder payload_modulation);

/// Builds a packet with a flag drawn per policy.
Bytes make_packet(packet::PacketType type, std::span<const Byte> payload,
                  std::uint16_t packet_number, const EmbedPolicy& policy, Rng& rng);

struct OutgoingPacket {
  Bytes wire;
  bool retransmission = false;
  // Repeated control emission (not an ARQ retransmission).
  bool repeat = false;
};

// Supplies the next covert packet for an opportunity.
class PacketSource {
 public:
  virtual ~PacketSource() = default;
  virtual bool has_pending() const = 0;
  /// A packet whose payload is at most payload_capacity bytes, or nullopt.
  virtual std::optional<OutgoingPacket> next_packet(std::size_t payload_capacity,
                                                    const EmbedPolicy& policy,
                                                    Rng& rng) = 0;
};

struct TransmitRecord {
  std::uint16_t packet_number = 0;
  packet::PacketType type = packet::PacketType::Data;
  std::size_t payload_bytes = 0;
  ThresholdFlag flag;
  AskOrder modulation = AskOrder::Two;
  bool retransmission = false;
  bool repeat = false;
  std::size_t symbols_used = 0;
};

struct EmbedOutcome {
  std::vector<IQSymbol> block;
  std::optional<TransmitRecord> record;
};

/// Scales the leading primary symbols by the amplitude factors of `wire`:
/// header at the fixed header configuration, payload and CRC at the
/// configuration named by the header. Throws LengthError when the packet
/// does not fit.
std::vector<IQSymbol> embed_packet(std::span<const IQSymbol> primary,
                                   std::span<const Byte> wire,
                                   const EmbedPolicy& policy, Rng& rng);

/// Transmitter pipeline for one opportunity. Returns the primary block
/// unchanged when nothing is pending or nothing fits.
EmbedOutcome generate_and_embed(TransmissionOpportunity& opportunity,
                                PacketSource& source, const EmbedPolicy& policy,
                                Rng& rng);

/// Demodulates the first 256 magnitudes with the header configuration and
/// validates them as a covert header that fits in the block.
std::optional<packet::CovertHeader> detect(std::span<const IQSymbol> block);

/// Demodulates payload and CRC-32 per the header; nullopt on CRC failure.
std::optional<Bytes> extract(std::span<const IQSymbol> block,
                             const packet::CovertHeader& header,
                             const EmbedPolicy& policy);

}  // namespace covert::stego
