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

#include <random>
#include <string>

#include "covert/codec.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace covert;

namespace {

Bytes ascii(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST_CASE("crc8 check values") {
  CHECK(codec::crc8({}) == 0x00);
  CHECK(codec::crc8(ascii("123456789")) == 0xF4);
}

TEST_CASE("crc32 check values") {
  CHECK(codec::crc32(ascii("123456789")) == 0xCBF43926u);
  CHECK(codec::crc32({}) == 0x00000000u);
}

TEST_CASE("crc values match the bitwise and zlib oracles") {
  for (const auto& row : fixtures::rows("crc.txt")) {
    const auto data = fixtures::hex(row[0]);
    CAPTURE(row[0]);
    CHECK(codec::crc8(data) == std::stoul(row[1], nullptr, 16));
    CHECK(codec::crc32(data) == std::stoul(row[2], nullptr, 16));
  }
}

TEST_CASE("both CRCs detect every single-bit error") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Bytes data(1 + rng() % 64);
    for (auto& b : data) b = static_cast<Byte>(rng());
    const auto c8 = codec::crc8(data);
    const auto c32 = codec::crc32(data);
    for (std::size_t bit = 0; bit < data.size() * 8; ++bit) {
      auto flipped = data;
      flipped[bit / 8] ^= static_cast<Byte>(0x80 >> (bit % 8));
      REQUIRE(codec::crc8(flipped) != c8);
      REQUIRE(codec::crc32(flipped) != c32);
    }
  }
}

TEST_CASE("hmac matches RFC 4231 and python hmac") {
  const auto rows = fixtures::rows("hmac.txt");
  REQUIRE(rows.size() >= 6);
  for (const auto& row : rows) {
    const auto mac = codec::hmac(fixtures::hex(row[0]), fixtures::hex(row[1]));
    CHECK(Bytes(mac.begin(), mac.end()) == fixtures::hex(row[2]));
  }
}

TEST_CASE("hmac is deterministic and key sensitive") {
  Bytes key(32, 0x42);
  const auto msg = ascii("challenge");
  CHECK(codec::hmac(key, msg) == codec::hmac(key, msg));
  for (std::size_t bit = 0; bit < key.size() * 8; bit += 13) {
    auto other = key;
    other[bit / 8] ^= static_cast<Byte>(1u << (bit % 8));
    CHECK(codec::hmac(other, msg) != codec::hmac(key, msg));
  }
}

TEST_CASE("bit expansion is MSB first") {
  const Bytes one{0xA5};
  CHECK(codec::bytes_to_bits(one) == BitStream{1, 0, 1, 0, 0, 1, 0, 1});
  CHECK(codec::bytes_to_bits({}).empty());
  CHECK(codec::bits_to_bytes({}).empty());
}

TEST_CASE("bytes to bits round trip") {
  std::mt19937_64 rng(5);
  Bytes data(10000);
  for (auto& b : data) b = static_cast<Byte>(rng());
  const auto bits = codec::bytes_to_bits(data);
  CHECK(bits.size() == data.size() * 8);
  CHECK(codec::bits_to_bytes(bits) == data);
}

TEST_CASE("bits_to_bytes rejects partial bytes") {
  const BitStream bits(13, 1);
  CHECK_THROWS_AS(codec::bits_to_bytes(bits), LengthError);
}

TEST_CASE("big-endian helpers") {
  Byte buf[4];
  codec::put_be32(buf, 0x01020304u);
  CHECK(buf[0] == 1);
  CHECK(buf[3] == 4);
  CHECK(codec::get_be32(buf) == 0x01020304u);
  codec::put_be16(buf, 0xBEEF);
  CHECK(codec::get_be16(buf) == 0xBEEF);
}
