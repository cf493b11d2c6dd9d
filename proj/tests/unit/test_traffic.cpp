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
#include <filesystem>
#include <fstream>

#include "covert/traffic.hpp"
#include "doctest.h"

using namespace covert;
using namespace covert::traffic;

namespace {

TrafficModel model_of(Kind kind) {
  TrafficModel m;
  m.kind = std::move(kind);
  return m;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("constant budgets") {
  TrafficGenerator gen(model_of(Constant{1200}), stego::Direction::Uplink);
  Rng rng(1);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto opp = gen.next_opportunity(t, rng);
    REQUIRE(opp);
    CHECK(opp->size() == 1200);
    CHECK(opp->primary_bits.size() == 2400);
    CHECK(opp->subframe_index == t);
    CHECK(opp->direction == stego::Direction::Uplink);
    CHECK(std::abs(std::abs(opp->primary_symbols[t]) - 1.0) < 1e-9);
    CHECK(qpsk_demodulate(opp->primary_symbols) == opp->primary_bits);
  }
}

TEST_CASE("bursty empty fraction") {
  TrafficGenerator gen(model_of(Bursty{0.5, 1200}), stego::Direction::Downlink);
  Rng rng(2);
  int empty = 0;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const auto opp = gen.next_opportunity(static_cast<std::uint64_t>(t), rng);
    REQUIRE(opp);
    CHECK((opp->size() == 0 || opp->size() == 1200));
    empty += opp->size() == 0;
  }
  CHECK(std::abs(static_cast<double>(empty) / n - 0.5) < 0.02);
}

TEST_CASE("trace replay then end of trace") {
  const auto path = temp_file("covert_trace_test.txt", "0\n300\n\n1000\n");
  const auto trace = load_trace(path);
  CHECK(trace == std::vector<std::size_t>{0, 300, 1000});
  TrafficModel model = model_of(Trace{trace});
  CHECK(model.peak_symbols() == 1000);
  TrafficGenerator gen(model, stego::Direction::Downlink);
  Rng rng(3);
  for (std::size_t expected : {0, 300, 1000}) {
    const auto opp = gen.next_opportunity(0, rng);
    REQUIRE(opp);
    CHECK(opp->size() == expected);
  }
  CHECK_FALSE(gen.next_opportunity(3, rng));
}

TEST_CASE("malformed trace names the line") {
  const auto path = temp_file("covert_trace_bad.txt", "10\n20\nabc\n");
  try {
    load_trace(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.txt"), ParseError);
}

TEST_CASE("file stream primary bits loop over the file") {
  TrafficModel model = model_of(Constant{8});
  model.source = PrimarySource::FileStream;
  model.primary_stream = {0xA5, 0x0F};
  TrafficGenerator gen(model, stego::Direction::Downlink);
  Rng rng(4);
  const auto opp = gen.next_opportunity(0, rng);
  REQUIRE(opp);
  const BitStream expected{1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1};
  CHECK(opp->primary_bits == expected);
  CHECK(gen.next_opportunity(1, rng)->primary_bits == expected);
}

TEST_CASE("traffic model validation") {
  CHECK_THROWS_AS(model_of(Bursty{1.5, 10}).validate(), ValidationError);
  TrafficModel file = model_of(Constant{10});
  file.source = PrimarySource::FileStream;
  CHECK_THROWS_AS(file.validate(), ValidationError);
}
