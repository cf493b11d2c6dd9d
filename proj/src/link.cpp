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

#include "covert/link.hpp"

#include <algorithm>
#include <sstream>

#include "covert/codec.hpp"

namespace covert::link {
namespace {

using packet::PacketType;

constexpr std::uint16_t kModulus = packet::kPacketNumberModulus;

std::uint16_t seq_add(std::uint16_t a, std::uint16_t b) {
  return static_cast<std::uint16_t>((a + b) % kModulus);
}

std::uint16_t seq_diff(std::uint16_t a, std::uint16_t b) {
  return static_cast<std::uint16_t>((a + kModulus - b) % kModulus);
}

bool is_data_path(PacketType type) {
  return type == PacketType::Data || type == PacketType::Address;
}

}  // namespace

const char* to_string(Role role) {
  return role == Role::BaseStation ? "bs" : "ue";
}

const char* to_string(AuthState state) {
  switch (state) {
    case AuthState::Idle: return "idle";
    case AuthState::ChallengeSent: return "challenge_sent";
    case AuthState::PeerAuthenticated: return "peer_authenticated";
    case AuthState::SelfAuthenticated: return "self_authenticated";
    case AuthState::Mutual: return "mutual";
    case AuthState::Failed: return "failed";
  }
  return "unknown";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Transmitted: return "tx";
    case EventKind::Authenticated: return "authenticated";
    case EventKind::AuthFailed: return "auth_failed";
    case EventKind::DataDelivered: return "data_delivered";
    case EventKind::AckSent: return "ack_sent";
    case EventKind::NackSent: return "nack_sent";
    case EventKind::DuplicateDiscarded: return "duplicate_discarded";
    case EventKind::TransferComplete: return "transfer_complete";
    case EventKind::TransferFailed: return "transfer_failed";
  }
  return "unknown";
}

void LinkConfig::validate() const {
  if (psk.size() < kMinPskBytes)
    throw ValidationError("pre-shared key must be at least 16 bytes");
  if (timeout_subframes == 0) throw ValidationError("timeout must be at least 1 subframe");
  if (max_retries == 0) throw ValidationError("max_retries must be at least 1");
  if (window == 0 || window > kMaxWindow)
    throw ValidationError("window must lie in [1, 512]");
  if (auth_max_attempts == 0) throw ValidationError("auth_max_attempts must be at least 1");
}

Event transmitted_event(std::uint64_t subframe, const stego::TransmitRecord& record) {
  Event e;
  e.kind = EventKind::Transmitted;
  e.subframe = subframe;
  e.packet_number = record.packet_number;
  e.type = record.type;
  e.bytes = record.payload_bytes;
  e.retransmission = record.retransmission;
  e.repeat = record.repeat;
  std::ostringstream detail;
  detail << "flag=" << unsigned{record.flag.value()}
         << " mod=" << static_cast<unsigned>(record.modulation)
         << " symbols=" << record.symbols_used;
  e.reason = detail.str();
  return e;
}

std::string format_event(Role node, const Event& event) {
  std::ostringstream out;
  out << "t=" << event.subframe << " node=" << to_string(node)
      << " event=" << to_string(event.kind);
  switch (event.kind) {
    case EventKind::Transmitted:
      out << " type=" << static_cast<unsigned>(event.type) << " pkt=" << event.packet_number
          << " bytes=" << event.bytes << " retx=" << (event.retransmission ? 1 : 0)
          << " repeat=" << (event.repeat ? 1 : 0);
      if (!event.reason.empty()) out << ' ' << event.reason;
      break;
    case EventKind::DataDelivered:
    case EventKind::TransferComplete:
      out << " pkt=" << event.packet_number << " bytes=" << event.bytes;
      break;
    case EventKind::AckSent:
    case EventKind::NackSent:
    case EventKind::DuplicateDiscarded:
    case EventKind::TransferFailed:
      out << " pkt=" << event.packet_number;
      break;
    case EventKind::AuthFailed:
      out << " reason=" << event.reason;
      break;
    case EventKind::Authenticated:
      break;
  }
  return out.str();
}

LinkSession::LinkSession(Role role, LinkConfig config, std::uint64_t challenge_seed)
    : role_(role), config_(std::move(config)), challenge_rng_(challenge_seed) {
  config_.validate();
  // The base station authenticates the UE first.
  if (role_ == Role::BaseStation) start_challenge();
}

AuthState LinkSession::auth_state() const {
  if (auth_failed_) return AuthState::Failed;
  if (peer_authenticated_ && self_authenticated_) return AuthState::Mutual;
  if (peer_authenticated_) return AuthState::PeerAuthenticated;
  if (self_authenticated_) return AuthState::SelfAuthenticated;
  if (challenge_ && challenge_->sends > 0) return AuthState::ChallengeSent;
  return AuthState::Idle;
}

void LinkSession::queue_transfer(std::span<const Byte> data,
                                 const packet::Msin& destination,
                                 std::size_t segment_bytes) {
  if (segment_bytes == 0) throw ValidationError("segment size must be positive");
  const std::size_t chunks = (data.size() + segment_bytes - 1) / segment_bytes;
  if (chunks > 0xFFFF)
    throw ValidationError("transfer needs " + std::to_string(chunks) +
                          " packets, more than 65535");

  packet::AddressInfo address;
  address.source_msin = config_.msin;
  address.destination_msin = destination;
  address.total_packets = static_cast<std::uint16_t>(chunks);
  send_queue_.push_back({PacketType::Address, packet::build_typed_payload(address)});
  for (std::size_t off = 0; off < data.size(); off += segment_bytes) {
    const std::size_t n = std::min(segment_bytes, data.size() - off);
    send_queue_.push_back({PacketType::Data, Bytes(data.begin() + off, data.begin() + off + n)});
  }
  transfer_failed_ = false;
}

stego::EmbedOutcome LinkSession::on_opportunity(stego::TransmissionOpportunity& opportunity,
                                                const stego::EmbedPolicy& policy, Rng& rng) {
  return stego::generate_and_embed(opportunity, *this, policy, rng);
}

std::vector<Event> LinkSession::on_receive(std::span<const IQSymbol> block,
                                           const stego::EmbedPolicy& policy) {
  if (auth_failed_) return {};
  const auto header = stego::detect(block);
  if (!header) return {};
  return handle(*header, stego::extract(block, *header, policy));
}

std::vector<Event> LinkSession::handle(const packet::CovertHeader& header,
                                       const std::optional<Bytes>& payload) {
  std::vector<Event> events;
  if (auth_failed_) return events;
  const PacketType type = header.meta.type;

  if (!payload) {
    if (is_data_path(type) && mutual()) {
      const std::uint16_t n = header.meta.packet_number;
      const bool queued = std::any_of(control_queue_.begin(), control_queue_.end(),
                                      [n](const auto& c) {
                                        return c.first == PacketType::Nack && c.second == n;
                                      });
      if (!queued) control_queue_.emplace_back(PacketType::Nack, n);
      Event e = make_event(EventKind::NackSent);
      e.packet_number = n;
      events.push_back(e);
    }
    return events;
  }

  packet::TypedPayload parsed;
  try {
    parsed = packet::parse_typed_payload(type, *payload);
  } catch (const ValidationError&) {
    return events;
  }

  switch (type) {
    case PacketType::Challenge:
      on_challenge(std::get<packet::Challenge>(parsed));
      break;
    case PacketType::Response:
      on_response(std::get<packet::Response>(parsed), events);
      break;
    case PacketType::AuthAck:
      on_auth_ack(events);
      break;
    case PacketType::Ack:
      on_ack(std::get<packet::Ack>(parsed).packet_number);
      break;
    case PacketType::Nack:
      on_nack(std::get<packet::Nack>(parsed).packet_number, events);
      break;
    case PacketType::Data:
    case PacketType::Address:
      // Data is refused until both sides are authenticated.
      if (mutual()) on_data(header.meta.packet_number, type, *payload, events);
      break;
    case PacketType::Reserved:
      break;
  }
  return events;
}

std::vector<Event> LinkSession::tick(std::uint64_t subframe) {
  now_ = subframe;
  std::vector<Event> events;
  if (auth_failed_) return events;

  for (auto& entry : pending_) {
    if (entry.eligible || entry.deadline > now_) continue;
    if (++entry.failures >= config_.max_retries) {
      fail_transfer(entry.number, events);
      break;
    }
    entry.eligible = true;
  }

  auto expire = [&](std::optional<AuthExchange>& exchange, const char* reason) {
    if (!exchange || exchange->due || exchange->sends == 0 || exchange->deadline > now_)
      return;
    if (++exchange->expiries >= config_.auth_max_attempts) {
      fail_auth(reason, events);
      return;
    }
    exchange->due = true;
  };
  expire(challenge_, "challenge_unanswered");
  if (!auth_failed_) expire(response_, "auth_ack_missing");

  while (!recent_acks_.empty() && recent_acks_.front().expiry < now_) recent_acks_.pop_front();
  return events;
}

bool LinkSession::has_pending() const {
  if (auth_failed_) return false;
  if (!control_queue_.empty() || auth_ack_due_) return true;
  if ((challenge_ && challenge_->due) || (response_ && response_->due)) return true;
  if (std::any_of(pending_.begin(), pending_.end(), [](const auto& p) { return p.eligible; }))
    return true;
  if (mutual() && window_open() && !send_queue_.empty()) return true;
  return !recent_acks_.empty();
}

std::optional<stego::OutgoingPacket> LinkSession::next_packet(std::size_t payload_capacity,
                                                              const stego::EmbedPolicy& policy,
                                                              Rng& rng) {
  if (auth_failed_) return std::nullopt;

  // Fresh feedback first.
  for (auto it = control_queue_.begin(); it != control_queue_.end(); ++it) {
    if (payload_capacity < 2) break;
    const auto [type, number] = *it;
    control_queue_.erase(it);
    const Bytes body = type == PacketType::Ack
                           ? packet::build_typed_payload(packet::Ack{number})
                           : packet::build_typed_payload(packet::Nack{number});
    return stego::OutgoingPacket{build(type, body, next_control_number(), policy, rng)};
  }

  if (auth_ack_due_) {
    auth_ack_due_ = false;
    ++auth_ack_sends_;
    const Bytes wire = build(PacketType::AuthAck, {}, next_control_number(), policy, rng);
    return stego::OutgoingPacket{wire, auth_ack_sends_ > 1};
  }
  if (response_ && response_->due && payload_capacity >= codec::Digest{}.size())
    return send_exchange(*response_, policy, rng);
  if (challenge_ && challenge_->due && payload_capacity >= packet::kChallengeBytes)
    return send_exchange(*challenge_, policy, rng);

  for (auto& entry : pending_) {
    if (!entry.eligible || entry.payload_len > payload_capacity) continue;
    entry.eligible = false;
    entry.deadline = now_ + config_.timeout_subframes;
    return stego::OutgoingPacket{entry.wire, true};
  }

  if (mutual() && window_open() && !send_queue_.empty() &&
      send_queue_.front().payload.size() <= payload_capacity) {
    Queued next = std::move(send_queue_.front());
    send_queue_.pop_front();
    PendingEntry entry;
    entry.number = next_seq_;
    entry.payload_len = next.payload.size();
    entry.wire = build(next.type, next.payload, next_seq_, policy, rng);
    entry.deadline = now_ + config_.timeout_subframes;
    next_seq_ = seq_add(next_seq_, 1);
    pending_.push_back(std::move(entry));
    return stego::OutgoingPacket{pending_.back().wire};
  }

  // Idle opportunity: repeat a recent ACK in case the original was lost.
  if (!recent_acks_.empty() && payload_capacity >= 2) {
    const RecentAck ack = recent_acks_.front();
    recent_acks_.pop_front();
    recent_acks_.push_back(ack);
    const Bytes body = packet::build_typed_payload(packet::Ack{ack.number});
    return stego::OutgoingPacket{build(PacketType::Ack, body, next_control_number(), policy, rng),
                                 false, true};
  }
  return std::nullopt;
}

std::uint16_t LinkSession::next_control_number() {
  const std::uint16_t n = control_seq_;
  control_seq_ = seq_add(control_seq_, 1);
  return n;
}

Bytes LinkSession::build(PacketType type, const Bytes& payload, std::uint16_t number,
                         const stego::EmbedPolicy& policy, Rng& rng) {
  return stego::make_packet(type, payload, number, policy, rng);
}

stego::OutgoingPacket LinkSession::send_exchange(AuthExchange& exchange,
                                                 const stego::EmbedPolicy& policy, Rng& rng) {
  if (exchange.wire.empty()) {
    const auto type = packet::type_of(exchange.payload);
    exchange.wire =
        build(type, packet::build_typed_payload(exchange.payload), next_control_number(),
              policy, rng);
  }
  ++exchange.sends;
  exchange.due = false;
  exchange.deadline = now_ + config_.timeout_subframes;
  return stego::OutgoingPacket{exchange.wire, exchange.sends > 1};
}

void LinkSession::start_challenge() {
  packet::Challenge challenge;
  for (auto& b : challenge.nonce) b = static_cast<Byte>(challenge_rng_() >> 56);
  challenge_ = AuthExchange{challenge, {}, 0, 0, 0, true};
}

void LinkSession::queue_ack(std::uint16_t number, std::vector<Event>& events) {
  const bool queued = std::any_of(control_queue_.begin(), control_queue_.end(),
                                  [number](const auto& c) {
                                    return c.first == PacketType::Ack && c.second == number;
                                  });
  if (!queued) control_queue_.emplace_back(PacketType::Ack, number);
  std::erase_if(recent_acks_, [number](const RecentAck& a) { return a.number == number; });
  recent_acks_.push_back({number, now_ + config_.timeout_subframes});
  Event e = make_event(EventKind::AckSent);
  e.packet_number = number;
  events.push_back(e);
}

void LinkSession::fail_auth(const std::string& reason, std::vector<Event>& events) {
  auth_failed_ = true;
  challenge_.reset();
  response_.reset();
  auth_ack_due_ = false;
  control_queue_.clear();
  recent_acks_.clear();
  send_queue_.clear();
  pending_.clear();
  Event e = make_event(EventKind::AuthFailed);
  e.reason = reason;
  events.push_back(e);
}

void LinkSession::fail_transfer(std::uint16_t number, std::vector<Event>& events) {
  transfer_failed_ = true;
  pending_.clear();
  send_queue_.clear();
  Event e = make_event(EventKind::TransferFailed);
  e.packet_number = number;
  events.push_back(e);
}

void LinkSession::maybe_mutual(std::vector<Event>& events) {
  if (mutual()) events.push_back(make_event(EventKind::Authenticated));
}

void LinkSession::on_challenge(const packet::Challenge& challenge) {
  if (response_) {
    const auto& answered = std::get<packet::Response>(response_->payload);
    const auto expected = codec::hmac(config_.psk, challenge.nonce);
    if (answered.mac == expected) {
      // Our response was lost; send it again.
      response_->due = true;
      return;
    }
  }
  packet::Response response{codec::hmac(config_.psk, challenge.nonce)};
  response_ = AuthExchange{response, {}, 0, 0, 0, true};
}

void LinkSession::on_response(const packet::Response& response, std::vector<Event>& events) {
  if (!challenge_) return;
  const auto& nonce = std::get<packet::Challenge>(challenge_->payload).nonce;
  if (response.mac != codec::hmac(config_.psk, nonce)) {
    if (!peer_authenticated_) fail_auth("response_mismatch", events);
    return;
  }
  auth_ack_due_ = true;
  if (peer_authenticated_) return;
  peer_authenticated_ = true;
  // The challenge is answered; stop its timer.
  challenge_->due = false;
  challenge_->deadline = UINT64_MAX;
  maybe_mutual(events);
}

void LinkSession::on_auth_ack(std::vector<Event>& events) {
  if (!response_ || self_authenticated_) return;
  self_authenticated_ = true;
  response_->due = false;
  response_->deadline = UINT64_MAX;
  // The UE authenticates the base station once it has been authenticated.
  if (!challenge_) start_challenge();
  maybe_mutual(events);
}

bool LinkSession::window_open() const {
  return pending_.empty() || seq_diff(next_seq_, pending_.front().number) < config_.window;
}

void LinkSession::on_ack(std::uint16_t number) {
  std::erase_if(pending_, [number](const PendingEntry& p) { return p.number == number; });
}

void LinkSession::on_nack(std::uint16_t number, std::vector<Event>& events) {
  for (auto& entry : pending_) {
    if (entry.number != number || entry.eligible) continue;
    if (++entry.failures >= config_.max_retries) {
      fail_transfer(number, events);
      return;
    }
    entry.eligible = true;
    return;
  }
}

void LinkSession::on_data(std::uint16_t number, PacketType type, Bytes payload,
                          std::vector<Event>& events) {
  const std::uint16_t ahead = seq_diff(number, rx_base_);
  const std::uint16_t behind = seq_diff(rx_base_, number);
  if (ahead < config_.window) {
    if (rx_buffer_.contains(number)) {
      Event e = make_event(EventKind::DuplicateDiscarded);
      e.packet_number = number;
      events.push_back(e);
    } else {
      rx_buffer_.emplace(number, std::make_pair(type, std::move(payload)));
    }
    queue_ack(number, events);
    deliver_in_order(events);
  } else if (behind >= 1 && behind <= config_.window) {
    Event e = make_event(EventKind::DuplicateDiscarded);
    e.packet_number = number;
    events.push_back(e);
    queue_ack(number, events);
  }
}

void LinkSession::deliver_in_order(std::vector<Event>& events) {
  for (auto it = rx_buffer_.find(rx_base_); it != rx_buffer_.end();
       it = rx_buffer_.find(rx_base_)) {
    auto [type, payload] = std::move(it->second);
    const std::uint16_t number = it->first;
    rx_buffer_.erase(it);
    rx_base_ = seq_add(rx_base_, 1);

    if (type == PacketType::Address) {
      const auto info = std::get<packet::AddressInfo>(
          packet::parse_typed_payload(PacketType::Address, payload));
      rx_total_ = info.total_packets;
      rx_data_count_ = 0;
      rx_complete_ = false;
      delivered_.clear();
      if (info.total_packets == 0) {
        rx_complete_ = true;
        Event e = make_event(EventKind::TransferComplete);
        e.packet_number = number;
        events.push_back(e);
      }
      continue;
    }

    delivered_.insert(delivered_.end(), payload.begin(), payload.end());
    Event e = make_event(EventKind::DataDelivered);
    e.packet_number = number;
    e.bytes = payload.size();
    events.push_back(e);
    ++rx_data_count_;
    if (rx_total_ && rx_data_count_ == *rx_total_) {
      rx_complete_ = true;
      Event done = make_event(EventKind::TransferComplete);
      done.packet_number = number;
      done.bytes = delivered_.size();
      events.push_back(done);
    }
  }
}

Event LinkSession::make_event(EventKind kind) const {
  Event e;
  e.kind = kind;
  e.subframe = now_;
  return e;
}

}  // namespace covert::link
