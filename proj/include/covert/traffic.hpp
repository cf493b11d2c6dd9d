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
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "covert/rng.hpp"
#include "covert/stego.hpp"
#include "covert/types.hpp"

namespace covert::traffic {

struct Constant {
  std::size_t symbols = 1200;
};

struct Bursty {
  double on_prob = 0.5;
  std::size_t symbols_on = 1200;
};

struct Trace {
  std::vector<std::size_t> symbols;
};

using Kind = std::variant<Constant, Bursty, Trace>;

enum class PrimarySource { RandomBits, FileStream };

struct TrafficModel {
  Kind kind = Constant{};
  PrimarySource source = PrimarySource::RandomBits;
  // Looped as the primary bit stream when source is FileStream.
  Bytes primary_stream;

  void validate() const;

  /// Largest budget the model can emit.
  std::size_t peak_symbols() const;
};

/// Reads one decimal symbol count per line. Blank lines are skipped.
/// Throws ParseError naming the offending line.
std::vector<std::size_t> load_trace(const std::filesystem::path& path);

// Per-subframe opportunity source; one instance per direction.
class TrafficGenerator {
 public:
  TrafficGenerator(TrafficModel model, stego::Direction direction);

  /// Next opportunity with QPSK-modulated primary bits, or nullopt once a
  /// trace is exhausted.
  std::optional<stego::TransmissionOpportunity> next_opportunity(std::uint64_t subframe,
                                                                 Rng& rng);

 private:
  BitStream primary_bits(std::size_t count, Rng& rng);

  TrafficModel model_;
  stego::Direction direction_;
  std::size_t trace_pos_ = 0;
  std::size_t stream_bit_ = 0;
};

}  // namespace covert::traffic
