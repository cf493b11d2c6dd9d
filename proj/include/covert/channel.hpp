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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "covert/rng.hpp"
#include "covert/types.hpp"

namespace covert::channel {

enum class Fading { None, RayleighBlock, RicianBlock };
enum class PhaseOffset { None, UniformRandomPerBlock };

const char* to_string(Fading fading);
const char* to_string(PhaseOffset phase);

struct ChannelModel {
  // Infinity disables noise.
  double snr_db = std::numeric_limits<double>::infinity();
  Fading fading = Fading::None;
  double k_factor = 0.0;
  PhaseOffset phase_offset = PhaseOffset::None;
  // Probability that a whole opportunity is lost.
  double loss = 0.0;
  // Receiver output is scaled by (1 + estimation_error) after equalization.
  double estimation_error = 0.0;

  void validate() const;

  /// Complex noise variance relative to unit symbol energy.
  double noise_variance() const;
};

// Block-fading AWGN channel with genie equalization. Random draws per block
// happen in a fixed order (drop, fading, phase, noise) so identical seeds
// give identical outputs.
class Channel {
 public:
  Channel(ChannelModel model, std::uint64_t seed);

  /// Equalized received block, or nullopt when the opportunity is dropped.
  std::optional<std::vector<IQSymbol>> transmit(std::span<const IQSymbol> block);

  /// Coefficient applied to the most recent non-dropped block.
  IQSymbol last_coefficient() const { return last_h_; }

  const ChannelModel& model() const { return model_; }

 private:
  IQSymbol draw_coefficient();

  ChannelModel model_;
  Rng rng_;
  IQSymbol last_h_{1.0, 0.0};
};

}  // namespace covert::channel
