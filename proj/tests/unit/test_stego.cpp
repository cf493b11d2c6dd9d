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

#include <cmath>
#include <deque>
#include <random>
#include <set>

#include "covert/channel.hpp"
#include "covert/stego.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace covert;
using namespace covert::stego;

namespace {

// Hands out prebuilt data payloads, truncated to whatever fits.
class QueueSource final : public PacketSource {
 public:
  void push(Bytes payload) { queue_.push_back(std::move(payload)); }
  bool has_pending() const override { return !queue_.empty(); }
  std::optional<OutgoingPacket> next_packet(std::size_t cap, const EmbedPolicy& policy,
                                            Rng& rng) override {
    if (queue_.empty()) return std::nullopt;
    Bytes p = std::move(queue_.front());
    queue_.pop_front();
    if (p.size() > cap) p.resize(cap);
    OutgoingPacket out;
    out.wire = make_packet(packet::PacketType::Data, p, number_++, policy, rng);
    return out;
  }

 private:
  std::deque<Bytes> queue_;
  std::uint16_t number_ = 0;
};

TransmissionOpportunity opportunity(std::size_t symbols, std::mt19937_64& gen) {
  TransmissionOpportunity opp;
  opp.primary_bits.resize(symbols * 2);
  for (auto& b : opp.primary_bits) b = static_cast<Bit>(gen() & 1u);
  opp.primary_symbols = qpsk_modulate(opp.primary_bits);
  return opp;
}

Bytes random_bytes(std::size_t n, std::mt19937_64& gen) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<Byte>(gen());
  return out;
}

}  // namespace

TEST_CASE("capacity rule") {
  CHECK(capacity(288, AskOrder::Two) == std::optional<std::size_t>(0));
  CHECK_FALSE(capacity(287, AskOrder::Two));
  CHECK(capacity(1000, AskOrder::Four) == std::optional<std::size_t>(182));
  CHECK_FALSE(capacity(0, AskOrder::Four));
  CHECK_FALSE(capacity(255, AskOrder::Four));
  CHECK(capacity(1200, AskOrder::Two) == std::optional<std::size_t>(114));
  CHECK(payload_symbols(182, AskOrder::Four) == 744);
  CHECK(payload_symbols(0, AskOrder::Two) == 32);
}

TEST_CASE("embedded magnitudes match the python oracle") {
  for (const auto& row : fixtures::rows("embed.txt")) {
    EmbedPolicy policy;
    policy.undetectable = row[0] == "1";
    const auto wire = fixtures::hex(row[1]);
    const auto expected = fixtures::doubles(row[2]);
    const std::vector<IQSymbol> primary(expected.size() + 10, IQSymbol(M_SQRT1_2, -M_SQRT1_2));
    Rng rng(1);
    const auto block = embed_packet(primary, wire, policy, rng);
    REQUIRE(block.size() == primary.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      REQUIRE(std::abs(block[i]) == doctest::Approx(expected[i]).epsilon(1e-12));
    for (std::size_t i = expected.size(); i < block.size(); ++i) CHECK(block[i] == primary[i]);
  }
}

TEST_CASE("pass-through cases") {
  std::mt19937_64 gen(3);
  EmbedPolicy policy;
  Rng rng(2);
  SUBCASE("opportunity too small") {
    policy.payload_modulation = AskOrder::Two;
    QueueSource source;
    source.push(Bytes(10, 1));
    auto opp = opportunity(287, gen);
    const auto out = generate_and_embed(opp, source, policy, rng);
    CHECK_FALSE(out.record);
    CHECK(out.block == opp.primary_symbols);
    CHECK(source.has_pending());
  }
  SUBCASE("nothing queued") {
    QueueSource source;
    auto opp = opportunity(1200, gen);
    const auto out = generate_and_embed(opp, source, policy, rng);
    CHECK_FALSE(out.record);
    CHECK(out.block == opp.primary_symbols);
  }
  SUBCASE("empty opportunity without dummy traffic") {
    QueueSource source;
    source.push(Bytes(10, 1));
    auto opp = opportunity(0, gen);
    CHECK_FALSE(generate_and_embed(opp, source, policy, rng).record);
  }
}

TEST_CASE("full-capacity embedding") {
  std::mt19937_64 gen(4);
  for (bool undetectable : {false, true}) {
    EmbedPolicy policy;
    policy.undetectable = undetectable;
    QueueSource source;
    const auto payload = random_bytes(182, gen);
    source.push(payload);
    auto opp = opportunity(1000, gen);
    Rng rng(5);
    const auto out = generate_and_embed(opp, source, policy, rng);
    REQUIRE(out.record);
    CHECK(out.record->payload_bytes == 182);
    CHECK(out.record->symbols_used == 1000);

    const auto header = detect(out.block);
    REQUIRE(header);
    const auto cfg = policy.payload_config(AskOrder::Four, header->meta.flag);
    for (std::size_t i = 256; i < out.block.size(); ++i) {
      const double m = std::abs(out.block[i]);
      CHECK(std::any_of(cfg.levels.begin(), cfg.levels.end(),
                        [m](double l) { return std::abs(l - m) < 1e-9; }));
    }
    CHECK(extract(out.block, *header, policy) == payload);
    // Primary transparency and power invariance.
    CHECK(qpsk_demodulate(out.block) == opp.primary_bits);
    for (const auto& s : out.block) CHECK(std::abs(s) <= 1.0 + 1e-12);
  }
}

TEST_CASE("noiseless round trip for every type and modulation") {
  std::mt19937_64 gen(6);
  for (AskOrder order : {AskOrder::Two, AskOrder::Four})
    for (bool undetectable : {false, true})
      for (int t = 0; t <= 6; ++t) {
        EmbedPolicy policy;
        policy.payload_modulation = order;
        policy.undetectable = undetectable;
        const auto type = static_cast<packet::PacketType>(t);
        const Bytes payload = random_bytes(t == 6 ? 0 : 40, gen);
        Rng rng(gen());
        const auto wire = make_packet(type, payload, static_cast<std::uint16_t>(gen() % 1024),
                                      policy, rng);
        auto opp = opportunity(1200, gen);
        const auto block = embed_packet(opp.primary_symbols, wire, policy, rng);
        const auto header = detect(block);
        REQUIRE(header);
        CHECK(header->meta.type == type);
        CHECK(extract(block, *header, policy) == payload);
      }
}

TEST_CASE("detection misses") {
  std::mt19937_64 gen(8);
  SUBCASE("too short") {
    const std::vector<IQSymbol> block(100, IQSymbol(1.0, 0.0));
    CHECK_FALSE(detect(block));
  }
  SUBCASE("clean noisy primary blocks") {
    channel::ChannelModel model;
    model.snr_db = 10.0;
    channel::Channel ch(model, 99);
    int accepted = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
      auto opp = opportunity(300, gen);
      accepted += detect(*ch.transmit(opp.primary_symbols)).has_value();
    }
    CHECK(static_cast<double>(accepted) / trials < 0.004);
  }
}

TEST_CASE("decision margin") {
  std::mt19937_64 gen(10);
  EmbedPolicy policy;
  policy.undetectable = false;
  const auto payload = random_bytes(100, gen);
  Rng rng(3);
  const auto wire = make_packet(packet::PacketType::Data, payload, 7, policy, rng);
  auto opp = opportunity(1200, gen);
  const auto block = embed_packet(opp.primary_symbols, wire, policy, rng);

  SUBCASE("perturbation below half the minimum gap") {
    auto noisy = block;
    // Half the smallest gap is the header's 0.08.
    std::uniform_real_distribution<double> u(-0.079, 0.079);
    for (auto& s : noisy) {
      const double m = std::abs(s);
      s *= (m + u(gen)) / m;
    }
    const auto header = detect(noisy);
    REQUIRE(header);
    CHECK(extract(noisy, *header, policy) == payload);
  }
  SUBCASE("one symbol across a threshold") {
    auto bad = block;
    const std::size_t i = 256 + 17;
    const double m = std::abs(bad[i]);
    const double target = m > 0.6 ? m - 0.25 : m + 0.25;
    bad[i] *= target / m;
    const auto header = detect(bad);
    REQUIRE(header);
    CHECK_FALSE(extract(bad, *header, policy));
  }
}

TEST_CASE("threshold flags are uniform in undetectable mode") {
  EmbedPolicy policy;
  Rng rng(2024);
  std::array<int, 4> counts{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[policy.draw_flag(rng).value()];
  double chi2 = 0.0;
  for (int c : counts) {
    CHECK(static_cast<double>(c) / n == doctest::Approx(0.25).epsilon(0.08));
    chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  }
  // 99.9th percentile of chi-square with 3 degrees of freedom.
  CHECK(chi2 < 16.27);

  policy.undetectable = false;
  for (int i = 0; i < 100; ++i) CHECK(policy.draw_flag(rng).value() == 0);
}

TEST_CASE("jitter") {
  EmbedPolicy policy;
  policy.undetectable = false;
  // The 0.16 header distance binds before the 0.25 payload distance.
  policy.jitter = 0.079;
  CHECK_NOTHROW(policy.validate());
  policy.jitter = 0.08;
  CHECK_THROWS_AS(policy.validate(), ValidationError);
  policy.undetectable = true;
  policy.jitter = 0.0012;
  CHECK_NOTHROW(policy.validate());
  policy.jitter = 0.00125;
  CHECK_THROWS_AS(policy.validate(), ValidationError);
  policy.jitter = -1.0;
  CHECK_THROWS_AS(policy.validate(), ValidationError);

  std::mt19937_64 gen(12);
  policy.undetectable = false;
  policy.jitter = 0.079;
  const auto payload = random_bytes(150, gen);
  Rng rng(4);
  const auto wire = make_packet(packet::PacketType::Data, payload, 1, policy, rng);
  auto opp = opportunity(1200, gen);
  const auto block = embed_packet(opp.primary_symbols, wire, policy, rng);
  const auto header = detect(block);
  REQUIRE(header);
  CHECK(extract(block, *header, policy) == payload);
}

TEST_CASE("dummy primary traffic") {
  std::mt19937_64 gen(13);
  EmbedPolicy policy;
  policy.dummy_primary = true;
  policy.dummy_symbols = 600;
  QueueSource source;
  source.push(Bytes(20, 0x5A));
  auto opp = opportunity(0, gen);
  Rng rng(6);
  const auto out = generate_and_embed(opp, source, policy, rng);
  CHECK(opp.dummy);
  CHECK(opp.size() == 600);
  REQUIRE(out.record);
  CHECK(out.block.size() == 600);

  QueueSource empty;
  auto idle = opportunity(0, gen);
  CHECK(generate_and_embed(idle, empty, policy, rng).block.empty());
  CHECK_FALSE(idle.dummy);
}

TEST_CASE("embedding an oversized packet is a length error") {
  EmbedPolicy policy;
  Rng rng(1);
  const auto wire = make_packet(packet::PacketType::Data, Bytes(200), 0, policy, rng);
  const std::vector<IQSymbol> primary(1000, IQSymbol(1.0, 0.0));
  CHECK_THROWS_AS(embed_packet(primary, wire, policy, rng), LengthError);
}
