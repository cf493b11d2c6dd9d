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

#include "covert/stego.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "covert/codec.hpp"

namespace covert::stego {
namespace {

std::vector<double> magnitudes(std::span<const IQSymbol> symbols) {
  std::vector<double> out(symbols.size());
  std::transform(symbols.begin(), symbols.end(), out.begin(),
                 [](const IQSymbol& s) { return std::abs(s); });
  return out;
}

BitStream random_bits(std::size_t count, Rng& rng) {
  BitStream bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<Bit>(word & 1u);
    word >>= 1;
  }
  return bits;
}

}  // namespace

const char* to_string(Direction direction) {
  return direction == Direction::Downlink ? "dl" : "ul";
}

void EmbedPolicy::validate() const {
  if (jitter < 0.0) throw ValidationError("jitter must be non-negative");
  const double min_distance =
      undetectable ? min_undetectable_distance(payload_modulation)
                   : 1.0 / static_cast<double>(level_count(payload_modulation));
  const double limit = std::min(min_distance, kHeaderDistance) / 2.0;
  if (jitter > 0.0 && !(jitter < limit))
    throw ValidationError("jitter " + std::to_string(jitter) +
                          " must stay below half the minimum level distance (" +
                          std::to_string(limit) + ")");
}

AskConfig EmbedPolicy::payload_config(AskOrder order, ThresholdFlag flag) const {
  return ask_config(order, flag,
                    undetectable ? AskRole::PayloadUndetectable : AskRole::PayloadFixed);
}

ThresholdFlag EmbedPolicy::draw_flag(Rng& rng) const {
  if (!undetectable) return ThresholdFlag(0);
  return ThresholdFlag(static_cast<unsigned>(rng() >> 62));
}

std::optional<std::size_t> capacity(std::size_t symbols, AskOrder payload_modulation) {
  if (symbols < kHeaderSymbols) return std::nullopt;
  const std::size_t bytes =
      (symbols - kHeaderSymbols) * bits_per_symbol(payload_modulation) / 8;
  if (bytes < packet::kCrcBytes) return std::nullopt;
  return bytes - packet::kCrcBytes;
}

std::size_t payload_symbols(std::size_t payload_len, AskOrder payload_modulation) {
  const std::size_t bits = (payload_len + packet::kCrcBytes) * 8;
  const std::size_t b = bits_per_symbol(payload_modulation);
  return (bits + b - 1) / b;
}

Bytes make_packet(packet::PacketType type, std::span<const Byte> payload,
                  std::uint16_t packet_number, const EmbedPolicy& policy, Rng& rng) {
  return packet::build_packet(type, payload, packet_number, policy.payload_modulation,
                              policy.draw_flag(rng));
}

std::vector<IQSymbol> embed_packet(std::span<const IQSymbol> primary,
                                   std::span<const Byte> wire,
                                   const EmbedPolicy& policy, Rng& rng) {
  if (wire.size() < packet::kMinPacketBytes)
    throw LengthError("covert packet shorter than 36 bytes");
  const auto header = packet::parse_header(wire.first(packet::kHeaderBytes),
                                           static_cast<std::uint32_t>(wire.size()));
  if (!header || packet::wire_size(header->meta.payload_len) != wire.size())
    throw ValidationError("malformed covert packet handed to the embedder");

  const auto header_bits = codec::bytes_to_bits(wire.first(packet::kHeaderBytes));
  const auto body_bits = codec::bytes_to_bits(wire.subspan(packet::kHeaderBytes));
  const auto payload_cfg = policy.payload_config(header->meta.modulation, header->meta.flag);

  auto factors = ask_modulate(header_bits, header_config());
  const auto body = ask_modulate(body_bits, payload_cfg);
  factors.insert(factors.end(), body.begin(), body.end());
  if (factors.size() > primary.size())
    throw LengthError("covert packet needs " + std::to_string(factors.size()) +
                      " symbols, opportunity has " + std::to_string(primary.size()));

  std::vector<IQSymbol> block(primary.begin(), primary.end());
  if (policy.jitter > 0.0) {
    std::uniform_real_distribution<double> jitter(-policy.jitter, policy.jitter);
    for (std::size_t i = 0; i < factors.size(); ++i) block[i] *= factors[i] + jitter(rng);
  } else {
    for (std::size_t i = 0; i < factors.size(); ++i) block[i] *= factors[i];
  }
  return block;
}

EmbedOutcome generate_and_embed(TransmissionOpportunity& opportunity,
                                PacketSource& source, const EmbedPolicy& policy,
                                Rng& rng) {
  if (opportunity.size() == 0 && policy.dummy_primary && source.has_pending()) {
    opportunity.primary_bits = random_bits(policy.dummy_symbols * 2, rng);
    opportunity.primary_symbols = qpsk_modulate(opportunity.primary_bits);
    opportunity.dummy = true;
  }

  EmbedOutcome outcome;
  const auto budget = capacity(opportunity.size(), policy.payload_modulation);
  if (!budget || !source.has_pending()) {
    outcome.block = opportunity.primary_symbols;
    return outcome;
  }
  auto next = source.next_packet(*budget, policy, rng);
  if (!next) {
    outcome.block = opportunity.primary_symbols;
    return outcome;
  }

  outcome.block = embed_packet(opportunity.primary_symbols, next->wire, policy, rng);
  const auto header = packet::parse_header(
      std::span<const Byte>(next->wire).first(packet::kHeaderBytes),
      static_cast<std::uint32_t>(next->wire.size()));
  TransmitRecord record;
  record.packet_number = header->meta.packet_number;
  record.type = header->meta.type;
  record.payload_bytes = header->meta.payload_len;
  record.flag = header->meta.flag;
  record.modulation = header->meta.modulation;
  record.retransmission = next->retransmission;
  record.repeat = next->repeat;
  record.symbols_used =
      kHeaderSymbols + payload_symbols(header->meta.payload_len, header->meta.modulation);
  outcome.record = record;
  return outcome;
}

std::optional<packet::CovertHeader> detect(std::span<const IQSymbol> block) {
  if (block.size() < kHeaderSymbols) return std::nullopt;
  const auto amps = magnitudes(block.first(kHeaderSymbols));
  const auto bytes = codec::bits_to_bytes(ask_demodulate(amps, header_config()));
  const auto max_payload = capacity(block.size(), AskOrder::Four);
  if (!max_payload) return std::nullopt;
  auto header = packet::parse_header(bytes, static_cast<std::uint32_t>(*max_payload));
  if (!header) return std::nullopt;
  const std::size_t needed =
      kHeaderSymbols + payload_symbols(header->meta.payload_len, header->meta.modulation);
  if (needed > block.size()) return std::nullopt;
  return header;
}

std::optional<Bytes> extract(std::span<const IQSymbol> block,
                             const packet::CovertHeader& header,
                             const EmbedPolicy& policy) {
  const std::size_t len = header.meta.payload_len;
  const std::size_t count = payload_symbols(len, header.meta.modulation);
  if (kHeaderSymbols + count > block.size()) return std::nullopt;

  const auto cfg = policy.payload_config(header.meta.modulation, header.meta.flag);
  auto bits = ask_demodulate(magnitudes(block.subspan(kHeaderSymbols, count)), cfg);
  bits.resize((len + packet::kCrcBytes) * 8);
  const auto body = codec::bits_to_bytes(bits);

  const auto payload = std::span<const Byte>(body).first(len);
  if (codec::crc32(payload) != codec::get_be32(body.data() + len)) return std::nullopt;
  return Bytes(payload.begin(), payload.end());
}

}  // namespace covert::stego
