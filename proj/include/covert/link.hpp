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
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covert/packet.hpp"
#include "covert/rng.hpp"
#include "covert/stego.hpp"
#include "covert/types.hpp"

namespace covert::link {

enum class Role { BaseStation, UserEquipment };

enum class AuthState {
  Idle,
  ChallengeSent,
  PeerAuthenticated,
  SelfAuthenticated,
  Mutual,
  Failed,
};

const char* to_string(Role role);
const char* to_string(AuthState state);

inline constexpr std::size_t kMinPskBytes = 16;
inline constexpr std::uint32_t kMaxWindow = packet::kPacketNumberModulus / 2;

struct LinkConfig {
  Bytes psk;
  std::uint32_t timeout_subframes = 20;
  // Failed attempts (timer expiries plus NACKs) tolerated per packet.
  std::uint32_t max_retries = 8;
  // Outstanding data packets; 1 is stop-and-wait.
  std::uint32_t window = 1;
  // Unanswered challenge or response attempts before giving up on the peer.
  std::uint32_t auth_max_attempts = 4;
  packet::Msin msin{};

  void validate() const;
};

enum class EventKind {
  Transmitted,
  Authenticated,
  AuthFailed,
  DataDelivered,
  AckSent,
  NackSent,
  DuplicateDiscarded,
  TransferComplete,
  TransferFailed,
};

const char* to_string(EventKind kind);

struct Event {
  EventKind kind = EventKind::Transmitted;
  std::uint64_t subframe = 0;
  std::uint16_t packet_number = 0;
  packet::PacketType type = packet::PacketType::Data;
  std::size_t bytes = 0;
  bool retransmission = false;
  bool repeat = false;
  std::string reason;
};

Event transmitted_event(std::uint64_t subframe, const stego::TransmitRecord& record);

/// One event per line, space-separated key=value pairs starting with
/// t=<subframe> node=<bs|ue> event=<name>.
std::string format_event(Role node, const Event& event);

// Per-direction covert protocol endpoint: challenge/response mutual
// authentication followed by selective-repeat ARQ transfers.
class LinkSession final : public stego::PacketSource {
 public:
  LinkSession(Role role, LinkConfig config, std::uint64_t challenge_seed);

  /// Queues an AddressInfo packet followed by the data split into
  /// segment_bytes chunks. Throws ValidationError for an empty segment size
  /// or more than 65535 chunks.
  void queue_transfer(std::span<const Byte> data, const packet::Msin& destination,
                      std::size_t segment_bytes);

  stego::EmbedOutcome on_opportunity(stego::TransmissionOpportunity& opportunity,
                                     const stego::EmbedPolicy& policy, Rng& rng);

  /// Detects, extracts and dispatches the packet in an equalized block.
  std::vector<Event> on_receive(std::span<const IQSymbol> block,
                                const stego::EmbedPolicy& policy);

  /// Dispatches an already decoded packet; nullopt payload means the
  /// payload CRC failed.
  std::vector<Event> handle(const packet::CovertHeader& header,
                            const std::optional<Bytes>& payload);

  /// Advances the clock; expired timers schedule retransmissions or fail.
  std::vector<Event> tick(std::uint64_t subframe);

  bool has_pending() const override;
  std::optional<stego::OutgoingPacket> next_packet(std::size_t payload_capacity,
                                                   const stego::EmbedPolicy& policy,
                                                   Rng& rng) override;

  Role role() const { return role_; }
  const LinkConfig& config() const { return config_; }
  AuthState auth_state() const;
  bool mutual() const { return peer_authenticated_ && self_authenticated_ && !auth_failed_; }
  bool auth_failed() const { return auth_failed_; }
  bool transfer_failed() const { return transfer_failed_; }
  bool transfer_complete() const { return rx_complete_; }
  const Bytes& delivered() const { return delivered_; }
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t queued_count() const { return send_queue_.size(); }
  std::uint64_t now() const { return now_; }

 private:
  struct Queued {
    packet::PacketType type;
    Bytes payload;
  };

  struct PendingEntry {
    std::uint16_t number = 0;
    std::size_t payload_len = 0;
    Bytes wire;
    std::uint32_t failures = 0;
    std::uint64_t deadline = 0;
    bool eligible = false;
  };

  // A challenge or response awaiting its answer.
  struct AuthExchange {
    packet::TypedPayload payload;
    Bytes wire;
    std::uint32_t sends = 0;
    std::uint32_t expiries = 0;
    std::uint64_t deadline = 0;
    bool due = true;
  };

  struct RecentAck {
    std::uint16_t number;
    std::uint64_t expiry;
  };

  std::uint16_t next_control_number();
  Bytes build(packet::PacketType type, const Bytes& payload, std::uint16_t number,
              const stego::EmbedPolicy& policy, Rng& rng);
  stego::OutgoingPacket send_exchange(AuthExchange& exchange,
                                      const stego::EmbedPolicy& policy, Rng& rng);
  void start_challenge();
  void queue_ack(std::uint16_t number, std::vector<Event>& events);
  void fail_auth(const std::string& reason, std::vector<Event>& events);
  void fail_transfer(std::uint16_t number, std::vector<Event>& events);
  void maybe_mutual(std::vector<Event>& events);

  void on_challenge(const packet::Challenge& challenge);
  void on_response(const packet::Response& response, std::vector<Event>& events);
  void on_auth_ack(std::vector<Event>& events);
  void on_ack(std::uint16_t number);
  // Next sequence number within window of the oldest unacknowledged one.
  bool window_open() const;
  void on_nack(std::uint16_t number, std::vector<Event>& events);
  void on_data(std::uint16_t number, packet::PacketType type, Bytes payload,
               std::vector<Event>& events);
  void deliver_in_order(std::vector<Event>& events);

  Event make_event(EventKind kind) const;

  Role role_;
  LinkConfig config_;
  Rng challenge_rng_;
  std::uint64_t now_ = 0;

  // Authentication.
  std::optional<AuthExchange> challenge_;
  std::optional<AuthExchange> response_;
  bool auth_ack_due_ = false;
  std::uint32_t auth_ack_sends_ = 0;
  bool peer_authenticated_ = false;
  bool self_authenticated_ = false;
  bool auth_failed_ = false;

  // Sender.
  std::deque<Queued> send_queue_;
  std::deque<PendingEntry> pending_;
  std::uint16_t next_seq_ = 0;
  std::uint16_t control_seq_ = 0;
  bool transfer_failed_ = false;

  // Receiver.
  std::deque<std::pair<packet::PacketType, std::uint16_t>> control_queue_;
  std::deque<RecentAck> recent_acks_;
  std::uint16_t rx_base_ = 0;
  std::map<std::uint16_t, std::pair<packet::PacketType, Bytes>> rx_buffer_;
  std::optional<std::uint16_t> rx_total_;
  std::uint32_t rx_data_count_ = 0;
  bool rx_complete_ = false;
  Bytes delivered_;
};

}  // namespace covert::link
