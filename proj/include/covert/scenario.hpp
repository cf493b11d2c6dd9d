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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covert/analysis.hpp"
#include "covert/channel.hpp"
#include "covert/link.hpp"
#include "covert/stego.hpp"
#include "covert/traffic.hpp"
#include "json.hpp"

namespace covert::scenario {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrafficSpec {
  std::string kind = "constant";  // constant | bursty | trace
  std::size_t symbols = 1200;
  double on_prob = 0.5;
  std::string trace_file;
  std::string primary_source = "random_bits";  // random_bits | file_stream
  std::string primary_file;
};

struct LinkSpec {
  std::uint32_t timeout = 20;
  std::uint32_t max_retries = 8;
  std::uint32_t window = 1;
  std::uint32_t auth_max_attempts = 4;
  // 0 picks the payload capacity of the peak traffic opportunity.
  std::size_t segment_bytes = 0;
};

struct ScenarioConfig {
  std::string name = "custom";
  channel::ChannelModel channel;
  TrafficSpec traffic;
  stego::EmbedPolicy policy;
  LinkSpec link;
  Bytes psk;
  // UE key; empty means the same key as the base station.
  Bytes peer_psk;
  // Covert file; when empty a seeded random payload of covert_input_bytes
  // is generated.
  std::string covert_input;
  std::size_t covert_input_bytes = 10000;
  stego::Direction transfer_direction = stego::Direction::Downlink;
  std::uint64_t duration = 20000;
  std::string outputs;
  // Downlink symbols to capture for steganalysis; 0 disables captures.
  std::size_t capture_symbols = 0;
  // Payload modulations `run` iterates over; empty means just the policy's.
  std::vector<AskOrder> modulations;

  /// Throws ConfigError.
  void validate() const;
};

/// Relative paths are resolved against base_dir. Throws ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ScenarioConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
ScenarioConfig preset(std::string_view name);

traffic::TrafficModel build_traffic_model(const ScenarioConfig& config);
std::size_t segment_bytes(const ScenarioConfig& config);
std::vector<AskOrder> run_modulations(const ScenarioConfig& config);
Bytes covert_input(const ScenarioConfig& config, std::uint64_t seed);

enum class RunStatus { Success, TransferFailed, AuthFailed };

const char* to_string(RunStatus status);

/// 0 success, 2 transfer failed, 3 authentication failed.
int exit_code(RunStatus status);
inline constexpr int kConfigErrorExit = 4;

struct RunResult {
  RunStatus status = RunStatus::TransferFailed;
  std::string diagnostic;
  Bytes input;
  Bytes delivered;
  std::vector<std::string> log;
  analysis::RunContext context;
  analysis::RunMetrics metrics;
  std::string csv_row;
  std::vector<IQSymbol> stego_capture;
  std::vector<IQSymbol> clean_capture;
};

/// Authenticates a base station and a UE over full-duplex opportunity
/// streams, then transfers the covert input in the configured direction.
/// Deterministic in (config, seed).
RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Writes delivered.bin, events.log, metrics.csv and, when captured,
/// stego.iq / clean.iq with JSON sidecars.
void write_artifacts(const RunResult& result, const std::filesystem::path& out_dir);

/// "start:stop:step", inclusive of stop within half a step.
std::vector<double> parse_snr_range(std::string_view spec);

struct SweepSpec {
  std::vector<double> snrs;
  std::vector<AskOrder> modulations;
  std::size_t trials = 1;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  std::size_t trial = 0;
  double snr_db = 0.0;
  AskOrder modulation = AskOrder::Four;
  RunStatus status = RunStatus::TransferFailed;
  analysis::RunMetrics metrics;
  std::string csv_row;
};

/// Rows ordered by (trial, snr, modulation) regardless of completion order.
std::vector<SweepRow> sweep(const ScenarioConfig& config, const SweepSpec& spec);

/// Equalized received symbols of back-to-back opportunities that each carry
/// one full-capacity covert data packet, or clean primary traffic when
/// policy is null. Truncated to `symbols`.
std::vector<IQSymbol> embedding_capture(const stego::EmbedPolicy* policy,
                                        const channel::ChannelModel& channel,
                                        std::size_t symbols,
                                        std::size_t opportunity_symbols,
                                        std::uint64_t seed);

struct PrimaryImpact {
  std::size_t opportunities = 0;
  double per_baseline = 0.0;
  double per_covert = 0.0;
  // 1 - (1 - per_covert) / (1 - per_baseline).
  double throughput_loss = 0.0;
};

/// Primary packet error rate with and without full-capacity embedding on
/// every opportunity, using identical channel realizations for both.
PrimaryImpact measure_primary_impact(const stego::EmbedPolicy& policy,
                                     const channel::ChannelModel& channel,
                                     std::size_t opportunities,
                                     std::size_t opportunity_symbols, std::uint64_t seed);

}  // namespace covert::scenario
