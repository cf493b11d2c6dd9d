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

#include "covert/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace covert::channel {

const char* to_string(Fading fading) {
  switch (fading) {
    case Fading::None: return "none";
    case Fading::RayleighBlock: return "rayleigh_block";
    case Fading::RicianBlock: return "rician_block";
  }
  return "unknown";
}

const char* to_string(PhaseOffset phase) {
  return phase == PhaseOffset::None ? "none" : "uniform_random_per_block";
}

void ChannelModel::validate() const {
  if (std::isnan(snr_db)) throw ValidationError("snr_db is NaN");
  if (!(loss >= 0.0 && loss <= 1.0))
    throw ValidationError("loss probability must lie in [0, 1]");
  if (fading == Fading::RicianBlock && !(k_factor >= 0.0))
    throw ValidationError("Rician K factor must be non-negative");
  if (!(estimation_error > -1.0))
    throw ValidationError("estimation error must exceed -1");
}

double ChannelModel::noise_variance() const {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

Channel::Channel(ChannelModel model, std::uint64_t seed)
    : model_(model), rng_(seed) {
  model_.validate();
}

IQSymbol Channel::draw_coefficient() {
  std::normal_distribution<double> unit(0.0, std::numbers::sqrt2 / 2.0);
  IQSymbol h{1.0, 0.0};
  switch (model_.fading) {
    case Fading::None:
      break;
    case Fading::RayleighBlock:
      h = {unit(rng_), unit(rng_)};
      break;
    case Fading::RicianBlock: {
      const double k = model_.k_factor;
      const IQSymbol scatter{unit(rng_), unit(rng_)};
      h = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * scatter;
      break;
    }
  }
  if (model_.phase_offset == PhaseOffset::UniformRandomPerBlock) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    h *= std::polar(1.0, phase(rng_));
  }
  return h;
}

std::optional<std::vector<IQSymbol>> Channel::transmit(std::span<const IQSymbol> block) {
  if (model_.loss > 0.0) {
    std::bernoulli_distribution drop(model_.loss);
    if (drop(rng_)) return std::nullopt;
  }
  const IQSymbol h = draw_coefficient();
  last_h_ = h;

  const double variance = model_.noise_variance();
  const IQSymbol gain = (1.0 + model_.estimation_error) / h;
  std::vector<IQSymbol> out(block.size());
  if (variance > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(variance / 2.0));
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double ni = noise(rng_);
      const double nq = noise(rng_);
      out[i] = (h * block[i] + IQSymbol{ni, nq}) * gain;
    }
  } else if (model_.fading == Fading::None && model_.phase_offset == PhaseOffset::None &&
             model_.estimation_error == 0.0) {
    out.assign(block.begin(), block.end());
  } else {
    for (std::size_t i = 0; i < block.size(); ++i) out[i] = h * block[i] * gain;
  }
  return out;
}

}  // namespace covert::channel
