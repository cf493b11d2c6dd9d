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
#include <span>
#include <vector>

#include "covert/types.hpp"

namespace covert {

// Covert amplitude constellation order M_C.
enum class AskOrder : std::uint8_t { Two = 2, Four = 4 };

constexpr std::size_t bits_per_symbol(AskOrder order) {
  return order == AskOrder::Two ? 1 : 2;
}

constexpr std::size_t level_count(AskOrder order) {
  return static_cast<std::size_t>(order);
}

// 2-bit header field selecting one of four distance configurations.
class ThresholdFlag {
 public:
  constexpr ThresholdFlag() = default;
  explicit ThresholdFlag(unsigned value);

  constexpr std::uint8_t value() const { return value_; }
  friend constexpr bool operator==(ThresholdFlag, ThresholdFlag) = default;

 private:
  std::uint8_t value_ = 0;
};

enum class AskRole { Header, PayloadFixed, PayloadUndetectable };

// Amplitude levels 1 - (M_C - 1 - k) * distance for k = 0..M_C-1, with the
// decision thresholds halfway between neighbours.
struct AskConfig {
  AskOrder order = AskOrder::Two;
  double distance = 0.0;
  std::vector<double> levels;
  std::vector<double> thresholds;

  static AskConfig make(AskOrder order, double distance);

  /// Level index for a received amplitude. A value exactly on a threshold
  /// resolves to the higher level.
  std::size_t decide(double amplitude) const;
};

/// Per-flag distance for randomized payload constellations.
double undetectable_distance(AskOrder order, ThresholdFlag flag);

/// Smallest distance the undetectable table uses for this order.
double min_undetectable_distance(AskOrder order);

inline constexpr double kHeaderDistance = 0.16;

AskConfig ask_config(AskOrder order, ThresholdFlag flag, AskRole role);

/// Fixed 2-ASK configuration every covert header is modulated with.
const AskConfig& header_config();

/// Gray-mapped unit-energy QPSK, one symbol per bit pair (b1, b0).
std::vector<IQSymbol> qpsk_modulate(std::span<const Bit> bits);

/// Hard quadrant decision; amplitude is ignored, zero resolves to bit 0.
BitStream qpsk_demodulate(std::span<const IQSymbol> symbols);

/// Maps each MSB-first group of log2(M_C) bits to levels[group value].
std::vector<double> ask_modulate(std::span<const Bit> bits,
                                 const AskConfig& config);

BitStream ask_demodulate(std::span<const double> amplitudes,
                         const AskConfig& config);

}  // namespace covert
