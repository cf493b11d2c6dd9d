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

#include <functional>
#include <optional>
#include <random>

#include "covert/link.hpp"
#include "doctest.h"

using namespace covert;
using namespace covert::link;
using packet::PacketType;

namespace {

Bytes key(Byte fill) { return Bytes(32, fill); }

LinkConfig config(Byte fill, std::uint32_t window = 1) {
  LinkConfig c;
  c.psk = key(fill);
  c.window = window;
  return c;
}

struct Sent {
  Role from;
  stego::TransmitRecord record;
};

// Two sessions exchanging noiseless 1200-symbol opportunities each subframe,
// downlink first, with an optional drop rule per emission.
struct Pair {
  LinkSession bs;
  LinkSession ue;
  stego::EmbedPolicy policy;
  Rng rng{1};
  std::vector<Sent> sent;
  std::vector<std::pair<Role, Event>> events;
  std::function<bool(Role, std::uint64_t, const stego::TransmitRecord&)> drop;
  std::uint64_t t = 0;
  std::size_t max_pending = 0;

  Pair(LinkConfig b, LinkConfig u) : bs(Role::BaseStation, b, 11), ue(Role::UserEquipment, u, 22) {}

  void record(Role r, const std::vector<Event>& es) {
    for (const auto& e : es) events.emplace_back(r, e);
  }

  void send(LinkSession& tx, LinkSession& rx) {
    stego::TransmissionOpportunity opp;
    opp.primary_symbols.assign(1200, IQSymbol(M_SQRT1_2, M_SQRT1_2));
    opp.primary_bits.assign(2400, 0);
    const auto out = tx.on_opportunity(opp, policy, rng);
    max_pending = std::max(max_pending, tx.pending_count());
    if (!out.record) return;
    sent.push_back({tx.role(), *out.record});
    if (drop && drop(tx.role(), t, *out.record)) return;
    record(rx.role(), rx.on_receive(out.block, policy));
  }

  void step() {
    record(Role::BaseStation, bs.tick(t));
    record(Role::UserEquipment, ue.tick(t));
    send(bs, ue);
    send(ue, bs);
    ++t;
  }

  bool run_until(const std::function<bool()>& done, std::uint64_t limit) {
    for (std::uint64_t k = 0; k < limit; ++k) {
      if (done()) return true;
      step();
    }
    return done();
  }

  std::size_t count(Role from, PacketType type) const {
    return static_cast<std::size_t>(std::count_if(sent.begin(), sent.end(), [&](const Sent& s) {
      return s.from == from && s.record.type == type;
    }));
  }

  bool has_event(Role r, EventKind kind) const {
    return std::any_of(events.begin(), events.end(),
                       [&](const auto& e) { return e.first == r && e.second.kind == kind; });
  }
};

Bytes random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Bytes out(n);
  for (auto& b : out) b = static_cast<Byte>(gen());
  return out;
}

packet::CovertHeader header_of(const Bytes& wire) {
  return *packet::parse_header(std::span<const Byte>(wire.data(), packet::kHeaderBytes));
}

}  // namespace

TEST_CASE("a fresh base station challenges first") {
  Pair p(config(1), config(1));
  CHECK(p.bs.auth_state() == AuthState::Idle);
  p.bs.tick(0);
  p.send(p.bs, p.ue);
  REQUIRE_FALSE(p.sent.empty());
  CHECK(p.sent.front().from == Role::BaseStation);
  CHECK(p.sent.front().record.type == PacketType::Challenge);
  CHECK(p.bs.auth_state() == AuthState::ChallengeSent);
}

TEST_CASE("lossless mutual authentication takes three packets per side") {
  Pair p(config(7), config(7));
  REQUIRE(p.run_until([&] { return p.bs.mutual() && p.ue.mutual(); }, 10));
  for (Role r : {Role::BaseStation, Role::UserEquipment}) {
    CHECK(p.count(r, PacketType::Challenge) == 1);
    CHECK(p.count(r, PacketType::Response) == 1);
    CHECK(p.count(r, PacketType::AuthAck) == 1);
  }
  CHECK(p.bs.auth_state() == AuthState::Mutual);
  CHECK(p.has_event(Role::BaseStation, EventKind::Authenticated));
  CHECK(p.has_event(Role::UserEquipment, EventKind::Authenticated));
}

TEST_CASE("mismatched keys fail authentication and never carry data") {
  Pair p(config(1), config(2));
  p.bs.queue_transfer(random_bytes(500, 1), {0, 0, 0, 0, 2}, 100);
  p.ue.queue_transfer(random_bytes(500, 2), {0, 0, 0, 0, 1}, 100);
  for (int k = 0; k < 300; ++k) p.step();
  CHECK(p.bs.auth_failed());
  CHECK(p.bs.auth_state() == AuthState::Failed);
  CHECK_FALSE(p.ue.mutual());
  CHECK(p.has_event(Role::BaseStation, EventKind::AuthFailed));
  CHECK(p.count(Role::BaseStation, PacketType::Data) == 0);
  CHECK(p.count(Role::UserEquipment, PacketType::Data) == 0);
  CHECK(p.count(Role::BaseStation, PacketType::Address) == 0);
  // A failed session goes silent.
  const auto before = p.count(Role::BaseStation, PacketType::Challenge);
  for (int k = 0; k < 50; ++k) p.step();
  CHECK(p.count(Role::BaseStation, PacketType::Challenge) == before);
}

TEST_CASE("lost response leads to a challenge retransmission") {
  Pair p(config(3), config(3));
  bool dropped = false;
  p.drop = [&](Role from, std::uint64_t, const stego::TransmitRecord& r) {
    if (from == Role::UserEquipment && r.type == PacketType::Response && !dropped) {
      dropped = true;
      return true;
    }
    return false;
  };
  REQUIRE(p.run_until([&] { return p.bs.mutual() && p.ue.mutual(); }, 100));
  CHECK(dropped);
  const auto it = std::find_if(p.sent.begin(), p.sent.end(), [](const Sent& s) {
    return s.from == Role::BaseStation && s.record.type == PacketType::Challenge &&
           s.record.retransmission;
  });
  REQUIRE(it != p.sent.end());
}

TEST_CASE("auth gives up after the configured number of unanswered attempts") {
  LinkConfig c = config(3);
  c.auth_max_attempts = 3;
  Pair p(c, c);
  p.drop = [](Role from, std::uint64_t, const stego::TransmitRecord&) {
    return from == Role::BaseStation;
  };
  for (int k = 0; k < 200; ++k) p.step();
  CHECK(p.bs.auth_failed());
  CHECK(p.count(Role::BaseStation, PacketType::Challenge) == 3);
}

TEST_CASE("retransmission timer behaviour") {
  Pair p(config(5), config(5));
  REQUIRE(p.run_until([&] { return p.bs.mutual() && p.ue.mutual(); }, 10));
  LinkSession& bs = p.bs;
  const auto start = p.t;
  CHECK(bs.tick(start).empty());  // nothing pending: no-op

  bs.queue_transfer(random_bytes(50, 3), {0, 0, 0, 0, 2}, 50);
  Rng rng(9);
  const auto first = bs.next_packet(200, p.policy, rng);
  REQUIRE(first);
  CHECK_FALSE(first->retransmission);
  CHECK(bs.pending_count() == 1);

  SUBCASE("timed out packet is re-sent byte for byte") {
    CHECK(bs.tick(start + 19).empty());
    CHECK_FALSE(bs.has_pending());
    CHECK(bs.tick(start + 20).empty());
    const auto again = bs.next_packet(200, p.policy, rng);
    REQUIRE(again);
    CHECK(again->retransmission);
    CHECK(again->wire == first->wire);
  }

  SUBCASE("eighth expiry with max_retries 8 fails the transfer") {
    std::uint64_t now = start;
    for (int expiry = 1; expiry <= 8; ++expiry) {
      now += 20;
      const auto events = bs.tick(now);
      if (expiry < 8) {
        REQUIRE(events.empty());
        REQUIRE(bs.next_packet(200, p.policy, rng));
      } else {
        REQUIRE(events.size() == 1);
        CHECK(events[0].kind == EventKind::TransferFailed);
        CHECK(bs.transfer_failed());
        CHECK(bs.pending_count() == 0);
      }
    }
  }

  SUBCASE("a NACK schedules an immediate retransmission") {
    const auto nack = packet::build_packet(PacketType::Nack,
                                           packet::build_typed_payload(packet::Nack{0}), 0,
                                           AskOrder::Four, ThresholdFlag());
    bs.handle(header_of(nack), packet::build_typed_payload(packet::Nack{0}));
    const auto again = bs.next_packet(200, p.policy, rng);
    REQUIRE(again);
    CHECK(again->retransmission);
    CHECK(again->wire == first->wire);
  }

  SUBCASE("an ACK clears the pending entry") {
    const auto ack = packet::build_packet(PacketType::Ack,
                                          packet::build_typed_payload(packet::Ack{0}), 0,
                                          AskOrder::Four, ThresholdFlag());
    bs.handle(header_of(ack), packet::build_typed_payload(packet::Ack{0}));
    CHECK(bs.pending_count() == 0);
    CHECK(bs.tick(start + 100).empty());
  }
}

TEST_CASE("receiver: duplicates, CRC failures and the auth gate") {
  const Bytes chunk{1, 2, 3, 4};
  const auto data = packet::build_packet(PacketType::Data, chunk, 0, AskOrder::Four, ThresholdFlag());

  SUBCASE("data before mutual authentication is ignored") {
    LinkSession ue(Role::UserEquipment, config(1), 1);
    CHECK(ue.handle(header_of(data), chunk).empty());
    CHECK(ue.delivered().empty());
    CHECK_FALSE(ue.has_pending());
  }

  Pair p(config(4), config(4));
  REQUIRE(p.run_until([&] { return p.bs.mutual() && p.ue.mutual(); }, 10));
  LinkSession& ue = p.ue;

  SUBCASE("duplicates are acknowledged but delivered once") {
    const auto first = ue.handle(header_of(data), chunk);
    REQUIRE_FALSE(first.empty());
    CHECK(first[0].kind == EventKind::AckSent);
    CHECK(ue.delivered() == chunk);
    const auto second = ue.handle(header_of(data), chunk);
    CHECK(std::any_of(second.begin(), second.end(), [](const Event& e) {
      return e.kind == EventKind::DuplicateDiscarded;
    }));
    CHECK(ue.delivered() == chunk);
  }

  SUBCASE("payload CRC failure produces a NACK") {
    const auto events = ue.handle(header_of(data), std::nullopt);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::NackSent);
    Rng rng(1);
    const auto out = ue.next_packet(200, p.policy, rng);
    REQUIRE(out);
    CHECK(header_of(out->wire).meta.type == PacketType::Nack);
  }
}

TEST_CASE("transfers survive random loss") {
  for (std::uint32_t window : {1u, 8u}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      LinkConfig c = config(9, window);
      c.max_retries = 16;
      c.auth_max_attempts = 16;
      Pair p(c, c);
      std::mt19937_64 gen(seed);
      std::bernoulli_distribution lose(0.3);
      p.drop = [&](Role, std::uint64_t, const stego::TransmitRecord&) { return lose(gen); };
      const auto input = random_bytes(5000, seed);
      p.bs.queue_transfer(input, {0, 0, 0, 0, 2}, 200);
      REQUIRE(p.run_until([&] { return p.ue.transfer_complete() || p.bs.transfer_failed(); },
                          20000));
      CAPTURE(window);
      CAPTURE(seed);
      CHECK(p.ue.transfer_complete());
      CHECK(p.ue.delivered() == input);
      CHECK(p.max_pending <= window);
      CHECK(p.has_event(Role::UserEquipment, EventKind::TransferComplete));
      // Idle reverse opportunities carried repeated ACKs.
      CHECK(std::any_of(p.sent.begin(), p.sent.end(), [](const Sent& s) {
        return s.from == Role::UserEquipment && s.record.repeat;
      }));
    }
  }
}

TEST_CASE("sequence numbers wrap around") {
  LinkConfig c = config(6, 64);
  Pair p(c, c);
  std::mt19937_64 gen(3);
  std::bernoulli_distribution lose(0.1);
  p.drop = [&](Role, std::uint64_t, const stego::TransmitRecord&) { return lose(gen); };
  const auto input = random_bytes(3000 * 4, 8);
  p.ue.queue_transfer(input, {0, 0, 0, 0, 1}, 4);
  REQUIRE(p.run_until([&] { return p.bs.transfer_complete() || p.ue.transfer_failed(); }, 50000));
  CHECK(p.bs.delivered() == input);
}

TEST_CASE("the sender window spans sequence numbers from the oldest unacked packet") {
  const std::uint32_t window = 8;
  Pair p(config(9, window), config(9, window));
  const std::uint16_t stuck = 3;
  int drops_left = 5;
  std::optional<std::uint64_t> delivered_at;
  std::vector<std::uint16_t> sent_before;
  p.drop = [&](Role from, std::uint64_t t, const stego::TransmitRecord& r) {
    if (from != Role::BaseStation || r.type != PacketType::Data) return false;
    if (!delivered_at) sent_before.push_back(r.packet_number);
    if (r.packet_number != stuck) return false;
    if (drops_left > 0) {
      --drops_left;
      return true;
    }
    if (!delivered_at) delivered_at = t;
    return false;
  };
  const auto input = random_bytes(200 * 60, 4);
  p.bs.queue_transfer(input, {0, 0, 0, 0, 2}, 200);
  REQUIRE(p.run_until([&] { return p.ue.transfer_complete() || p.bs.transfer_failed(); }, 5000));
  CHECK(p.ue.delivered() == input);
  REQUIRE(delivered_at);
  for (std::uint16_t n : sent_before) {
    CAPTURE(n);
    CHECK(n < stuck + window);
  }
}

TEST_CASE("empty transfer completes on the address packet") {
  Pair p(config(2), config(2));
  p.bs.queue_transfer({}, {0, 0, 0, 0, 2}, 100);
  REQUIRE(p.run_until([&] { return p.ue.transfer_complete(); }, 50));
  CHECK(p.ue.delivered().empty());
}

TEST_CASE("configuration validation") {
  LinkConfig c = config(1);
  c.psk.resize(15);
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config(1, 0);
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config(1, 513);
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config(1, 512);
  CHECK_NOTHROW(c.validate());
  LinkSession s(Role::BaseStation, config(1), 1);
  CHECK_THROWS_AS(s.queue_transfer(Bytes(10), {}, 0), ValidationError);
  CHECK_THROWS_AS(s.queue_transfer(Bytes(70000), {}, 1), ValidationError);
}

TEST_CASE("event formatting") {
  stego::TransmitRecord r;
  r.packet_number = 5;
  r.type = PacketType::Data;
  r.payload_bytes = 232;
  r.flag = ThresholdFlag(2);
  r.modulation = AskOrder::Four;
  r.retransmission = true;
  r.symbols_used = 1200;
  CHECK(format_event(Role::BaseStation, transmitted_event(12, r)) ==
        "t=12 node=bs event=tx type=2 pkt=5 bytes=232 retx=1 repeat=0 flag=2 mod=4 symbols=1200");
  Event e;
  e.kind = EventKind::DataDelivered;
  e.subframe = 3;
  e.packet_number = 9;
  e.bytes = 100;
  CHECK(format_event(Role::UserEquipment, e) == "t=3 node=ue event=data_delivered pkt=9 bytes=100");
}
