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

#include "covert/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "covert/constellation.hpp"

namespace covert::traffic {

void TrafficModel::validate() const {
  if (const auto* b = std::get_if<Bursty>(&kind)) {
    if (!(b->on_prob >= 0.0 && b->on_prob <= 1.0))
      throw ValidationError("bursty on_prob must lie in [0, 1]");
  }
  if (source == PrimarySource::FileStream && primary_stream.empty())
    throw ValidationError("file primary source needs a non-empty stream");
}

std::size_t TrafficModel::peak_symbols() const {
  if (const auto* c = std::get_if<Constant>(&kind)) return c->symbols;
  if (const auto* b = std::get_if<Bursty>(&kind)) return b->symbols_on;
  const auto& t = std::get<Trace>(kind).symbols;
  return t.empty() ? 0 : *std::max_element(t.begin(), t.end());
}

std::vector<std::size_t> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  std::vector<std::size_t> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::size_t value = 0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": not a symbol count: '" + line + "'");
    out.push_back(value);
  }
  return out;
}

TrafficGenerator::TrafficGenerator(TrafficModel model, stego::Direction direction)
    : model_(std::move(model)), direction_(direction) {
  model_.validate();
}

std::optional<stego::TransmissionOpportunity> TrafficGenerator::next_opportunity(
    std::uint64_t subframe, Rng& rng) {
  std::size_t symbols = 0;
  if (const auto* c = std::get_if<Constant>(&model_.kind)) {
    symbols = c->symbols;
  } else if (const auto* b = std::get_if<Bursty>(&model_.kind)) {
    std::bernoulli_distribution on(b->on_prob);
    symbols = on(rng) ? b->symbols_on : 0;
  } else {
    const auto& trace = std::get<Trace>(model_.kind).symbols;
    if (trace_pos_ >= trace.size()) return std::nullopt;
    symbols = trace[trace_pos_++];
  }

  stego::TransmissionOpportunity opp;
  opp.direction = direction_;
  opp.subframe_index = subframe;
  opp.primary_bits = primary_bits(symbols * 2, rng);
  opp.primary_symbols = qpsk_modulate(opp.primary_bits);
  return opp;
}

BitStream TrafficGenerator::primary_bits(std::size_t count, Rng& rng) {
  BitStream bits(count);
  if (model_.source == PrimarySource::RandomBits) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (i % 64 == 0) word = rng();
      bits[i] = static_cast<Bit>(word & 1u);
      word >>= 1;
    }
    return bits;
  }
  const std::size_t total = model_.primary_stream.size() * 8;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = stream_bit_ % total;
    bits[i] = static_cast<Bit>((model_.primary_stream[pos / 8] >> (7 - pos % 8)) & 1u);
    ++stream_bit_;
  }
  return bits;
}

}  // namespace covert::traffic
