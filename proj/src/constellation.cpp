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

#include "covert/constellation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace covert {
namespace {

// Randomized distance tables, indexed by threshold flag. Kept well inside
// the AWGN magnitude spread at moderate SNR so the stego magnitude
// distribution stays close to the clean one.
constexpr std::array<double, 4> kUndetectableTwoAsk{0.005, 0.010, 0.015, 0.020};
constexpr std::array<double, 4> kUndetectableFourAsk{0.0025, 0.0050, 0.0075,
                                                     0.0100};

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

ThresholdFlag::ThresholdFlag(unsigned value) : value_(static_cast<std::uint8_t>(value)) {
  if (value > 3)
    throw ValidationError("threshold flag " + std::to_string(value) +
                          " exceeds 2 bits");
}

AskConfig AskConfig::make(AskOrder order, double distance) {
  const std::size_t m = level_count(order);
  if (!(distance > 0.0) || !(distance * static_cast<double>(m - 1) < 1.0))
    throw ValidationError("ASK distance " + std::to_string(distance) +
                          " outside (0, 1/(M_C-1))");
  AskConfig c;
  c.order = order;
  c.distance = distance;
  c.levels.resize(m);
  for (std::size_t k = 0; k < m; ++k)
    c.levels[k] = 1.0 - static_cast<double>(m - 1 - k) * distance;
  c.levels[m - 1] = 1.0;
  c.thresholds.resize(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k)
    c.thresholds[k] = (c.levels[k] + c.levels[k + 1]) / 2.0;
  return c;
}

std::size_t AskConfig::decide(double amplitude) const {
  std::size_t index = 0;
  for (double t : thresholds)
    if (amplitude >= t) ++index;
  return index;
}

double undetectable_distance(AskOrder order, ThresholdFlag flag) {
  return order == AskOrder::Two ? kUndetectableTwoAsk[flag.value()]
                                : kUndetectableFourAsk[flag.value()];
}

double min_undetectable_distance(AskOrder order) {
  const auto& table =
      order == AskOrder::Two ? kUndetectableTwoAsk : kUndetectableFourAsk;
  return *std::min_element(table.begin(), table.end());
}

AskConfig ask_config(AskOrder order, ThresholdFlag flag, AskRole role) {
  switch (role) {
    case AskRole::Header:
      return header_config();
    case AskRole::PayloadFixed:
      return AskConfig::make(order, 1.0 / static_cast<double>(level_count(order)));
    case AskRole::PayloadUndetectable:
      return AskConfig::make(order, undetectable_distance(order, flag));
  }
  throw ValidationError("unknown ASK role");
}

const AskConfig& header_config() {
  static const AskConfig config = AskConfig::make(AskOrder::Two, kHeaderDistance);
  return config;
}

std::vector<IQSymbol> qpsk_modulate(std::span<const Bit> bits) {
  if (bits.size() % 2 != 0)
    throw LengthError("QPSK needs an even bit count, got " +
                      std::to_string(bits.size()));
  std::vector<IQSymbol> out(bits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double re = bits[2 * i] ? -kInvSqrt2 : kInvSqrt2;
    const double im = bits[2 * i + 1] ? -kInvSqrt2 : kInvSqrt2;
    out[i] = {re, im};
  }
  return out;
}

BitStream qpsk_demodulate(std::span<const IQSymbol> symbols) {
  BitStream bits(symbols.size() * 2);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
    bits[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
  }
  return bits;
}

std::vector<double> ask_modulate(std::span<const Bit> bits,
                                 const AskConfig& config) {
  const std::size_t b = bits_per_symbol(config.order);
  if (bits.size() % b != 0)
    throw LengthError("ASK bit count " + std::to_string(bits.size()) +
                      " not divisible by " + std::to_string(b));
  std::vector<double> out(bits.size() / b);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t group = 0;
    for (std::size_t k = 0; k < b; ++k) group = (group << 1) | (bits[i * b + k] & 1u);
    out[i] = config.levels[group];
  }
  return out;
}

BitStream ask_demodulate(std::span<const double> amplitudes,
                         const AskConfig& config) {
  const std::size_t b = bits_per_symbol(config.order);
  BitStream bits(amplitudes.size() * b);
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const std::size_t index = config.decide(amplitudes[i]);
    for (std::size_t k = 0; k < b; ++k)
      bits[i * b + k] = static_cast<Bit>((index >> (b - 1 - k)) & 1u);
  }
  return bits;
}

}  // namespace covert
