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

#include "covert/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "covert/codec.hpp"
#include "covert/constellation.hpp"

namespace covert::scenario {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr packet::Msin kBsMsin{0x00, 0x00, 0x00, 0x00, 0x01};
constexpr packet::Msin kUeMsin{0x00, 0x00, 0x00, 0x00, 0x02};

std::string to_hex(std::span<const Byte> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (Byte b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0F]);
  }
  return out;
}

Bytes from_hex(const std::string& hex, const char* field) {
  if (hex.size() % 2 != 0)
    throw ConfigError(std::string(field) + ": hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned v = 0;
    const char* b = hex.data() + 2 * i;
    const auto [ptr, ec] = std::from_chars(b, b + 2, v, 16);
    if (ec != std::errc{} || ptr != b + 2)
      throw ConfigError(std::string(field) + ": invalid hex digit near offset " +
                        std::to_string(2 * i));
    out[i] = static_cast<Byte>(v);
  }
  return out;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; }))
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double number_field(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("expected a number or \"inf\", got " + j.dump());
}

json number_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

AskOrder order_from_int(int m) {
  if (m == 2) return AskOrder::Two;
  if (m == 4) return AskOrder::Four;
  throw ConfigError("modulation must be 2 or 4, got " + std::to_string(m));
}

std::string resolve(const std::string& path, const fs::path& base) {
  if (path.empty() || base.empty()) return path;
  const fs::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

channel::ChannelModel channel_from_json(const json& j) {
  check_keys(j, "channel",
             {"snr_db", "fading", "k_factor", "phase_offset", "loss", "estimation_error"});
  channel::ChannelModel m;
  if (j.contains("snr_db")) m.snr_db = number_field(j["snr_db"]);
  if (j.contains("fading")) {
    const auto f = j["fading"].get<std::string>();
    if (f == "none")
      m.fading = channel::Fading::None;
    else if (f == "rayleigh_block")
      m.fading = channel::Fading::RayleighBlock;
    else if (f == "rician_block")
      m.fading = channel::Fading::RicianBlock;
    else
      throw ConfigError("channel.fading: unknown value '" + f + "'");
  }
  if (j.contains("phase_offset")) {
    const auto p = j["phase_offset"].get<std::string>();
    if (p == "none")
      m.phase_offset = channel::PhaseOffset::None;
    else if (p == "uniform_random_per_block")
      m.phase_offset = channel::PhaseOffset::UniformRandomPerBlock;
    else
      throw ConfigError("channel.phase_offset: unknown value '" + p + "'");
  }
  m.k_factor = j.value("k_factor", m.k_factor);
  m.loss = j.value("loss", m.loss);
  m.estimation_error = j.value("estimation_error", m.estimation_error);
  return m;
}

}  // namespace

void ScenarioConfig::validate() const {
  try {
    if (duration < 1) throw ConfigError("duration must be at least 1 subframe");
    if (psk.size() < link::kMinPskBytes)
      throw ConfigError("psk must be at least " + std::to_string(link::kMinPskBytes) +
                        " bytes");
    if (!peer_psk.empty() && peer_psk.size() < link::kMinPskBytes)
      throw ConfigError("peer_psk must be at least " + std::to_string(link::kMinPskBytes) +
                        " bytes");
    for (const auto* path : {&covert_input, &traffic.trace_file, &traffic.primary_file}) {
      if (!path->empty() && !fs::is_regular_file(*path))
        throw ConfigError("referenced file does not exist: " + *path);
    }
    channel.validate();
    policy.validate();
    const auto model = build_traffic_model(*this);
    model.validate();

    link::LinkConfig lc;
    lc.psk = psk;
    lc.timeout_subframes = link.timeout;
    lc.max_retries = link.max_retries;
    lc.window = link.window;
    lc.auth_max_attempts = link.auth_max_attempts;
    lc.validate();

    for (AskOrder m : run_modulations(*this)) {
      ScenarioConfig c = *this;
      c.policy.payload_modulation = m;
      const std::size_t seg = segment_bytes(c);
      const std::size_t input_bytes =
          covert_input.empty() ? covert_input_bytes : fs::file_size(covert_input);
      if ((input_bytes + seg - 1) / seg > 65535)
        throw ConfigError("covert input needs more than 65535 segments of " +
                          std::to_string(seg) + " bytes");
    }
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

ScenarioConfig config_from_json(const json& j, const fs::path& base_dir) {
  try {
    check_keys(j, "config",
               {"scenario", "channel", "traffic", "policy", "link", "psk", "peer_psk",
                "covert_input", "covert_input_bytes", "transfer_direction", "duration",
                "outputs", "capture_symbols", "modulations"});
    ScenarioConfig c;
    c.name = j.value("scenario", c.name);
    if (j.contains("channel")) c.channel = channel_from_json(j["channel"]);

    if (j.contains("traffic")) {
      const auto& t = j["traffic"];
      check_keys(t, "traffic",
                 {"kind", "symbols", "on_prob", "trace", "source", "primary_file"});
      c.traffic.kind = t.value("kind", c.traffic.kind);
      c.traffic.symbols = t.value("symbols", c.traffic.symbols);
      c.traffic.on_prob = t.value("on_prob", c.traffic.on_prob);
      c.traffic.trace_file = resolve(t.value("trace", std::string{}), base_dir);
      c.traffic.primary_source = t.value("source", c.traffic.primary_source);
      c.traffic.primary_file = resolve(t.value("primary_file", std::string{}), base_dir);
    }

    if (j.contains("policy")) {
      const auto& p = j["policy"];
      check_keys(p, "policy",
                 {"modulation", "undetectable", "jitter", "dummy_primary", "dummy_symbols"});
      if (p.contains("modulation"))
        c.policy.payload_modulation = order_from_int(p["modulation"].get<int>());
      c.policy.undetectable = p.value("undetectable", c.policy.undetectable);
      c.policy.jitter = p.value("jitter", c.policy.jitter);
      c.policy.dummy_primary = p.value("dummy_primary", c.policy.dummy_primary);
      c.policy.dummy_symbols = p.value("dummy_symbols", c.policy.dummy_symbols);
    }

    if (j.contains("link")) {
      const auto& l = j["link"];
      check_keys(l, "link",
                 {"timeout", "max_retries", "window", "auth_max_attempts", "segment_bytes"});
      c.link.timeout = l.value("timeout", c.link.timeout);
      c.link.max_retries = l.value("max_retries", c.link.max_retries);
      c.link.window = l.value("window", c.link.window);
      c.link.auth_max_attempts = l.value("auth_max_attempts", c.link.auth_max_attempts);
      c.link.segment_bytes = l.value("segment_bytes", c.link.segment_bytes);
    }

    if (j.contains("psk")) c.psk = from_hex(j["psk"].get<std::string>(), "psk");
    if (j.contains("peer_psk"))
      c.peer_psk = from_hex(j["peer_psk"].get<std::string>(), "peer_psk");
    c.covert_input = resolve(j.value("covert_input", std::string{}), base_dir);
    c.covert_input_bytes = j.value("covert_input_bytes", c.covert_input_bytes);
    if (j.contains("transfer_direction")) {
      const auto d = j["transfer_direction"].get<std::string>();
      if (d == "dl")
        c.transfer_direction = stego::Direction::Downlink;
      else if (d == "ul")
        c.transfer_direction = stego::Direction::Uplink;
      else
        throw ConfigError("transfer_direction must be \"dl\" or \"ul\"");
    }
    c.duration = j.value("duration", c.duration);
    c.outputs = resolve(j.value("outputs", std::string{}), base_dir);
    c.capture_symbols = j.value("capture_symbols", c.capture_symbols);
    if (j.contains("modulations")) {
      for (const auto& m : j["modulations"]) c.modulations.push_back(order_from_int(m.get<int>()));
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.name;
  j["channel"] = {
      {"snr_db", number_json(c.channel.snr_db)},
      {"fading", channel::to_string(c.channel.fading)},
      {"k_factor", c.channel.k_factor},
      {"phase_offset", channel::to_string(c.channel.phase_offset)},
      {"loss", c.channel.loss},
      {"estimation_error", c.channel.estimation_error},
  };
  json t = {{"kind", c.traffic.kind},
            {"symbols", c.traffic.symbols},
            {"on_prob", c.traffic.on_prob},
            {"source", c.traffic.primary_source}};
  if (!c.traffic.trace_file.empty()) t["trace"] = c.traffic.trace_file;
  if (!c.traffic.primary_file.empty()) t["primary_file"] = c.traffic.primary_file;
  j["traffic"] = t;
  j["policy"] = {
      {"modulation", static_cast<int>(c.policy.payload_modulation)},
      {"undetectable", c.policy.undetectable},
      {"jitter", c.policy.jitter},
      {"dummy_primary", c.policy.dummy_primary},
      {"dummy_symbols", c.policy.dummy_symbols},
  };
  j["link"] = {
      {"timeout", c.link.timeout},
      {"max_retries", c.link.max_retries},
      {"window", c.link.window},
      {"auth_max_attempts", c.link.auth_max_attempts},
      {"segment_bytes", c.link.segment_bytes},
  };
  j["psk"] = to_hex(c.psk);
  if (!c.peer_psk.empty()) j["peer_psk"] = to_hex(c.peer_psk);
  if (!c.covert_input.empty())
    j["covert_input"] = c.covert_input;
  else
    j["covert_input_bytes"] = c.covert_input_bytes;
  j["transfer_direction"] = stego::to_string(c.transfer_direction);
  j["duration"] = c.duration;
  if (!c.outputs.empty()) j["outputs"] = c.outputs;
  j["capture_symbols"] = c.capture_symbols;
  if (!c.modulations.empty()) {
    json mods = json::array();
    for (AskOrder m : c.modulations) mods.push_back(static_cast<int>(m));
    j["modulations"] = mods;
  }
  return j;
}

std::vector<std::string> preset_names() {
  return {"noiseless-smoke",
          "fig9-like",
          "high-snr-fixed",
          "steganalysis-undetectable",
          "steganalysis-fixed",
          "mismatched-psk",
          "lossy-arq",
          "rayleigh-outdoor",
          "bursty-dummy"};
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.name = std::string(name);
  c.psk = from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f", "psk");

  if (name == "noiseless-smoke") {
    c.covert_input_bytes = 10000;
  } else if (name == "fig9-like") {
    // Full-buffer downlink at an SNR where symbol errors matter.
    c.channel.snr_db = 12.0;
    c.policy.undetectable = false;
    c.modulations = {AskOrder::Two, AskOrder::Four};
    c.covert_input_bytes = 50000;
    c.duration = 5000;
  } else if (name == "high-snr-fixed") {
    c.channel.snr_db = 30.0;
    c.policy.undetectable = false;
    c.modulations = {AskOrder::Two, AskOrder::Four};
    c.covert_input_bytes = 50000;
    c.duration = 5000;
  } else if (name == "steganalysis-undetectable" || name == "steganalysis-fixed") {
    c.channel.snr_db = 20.0;
    c.policy.undetectable = name == "steganalysis-undetectable";
    c.covert_input_bytes = 50000;
    c.duration = 2000;
    c.capture_symbols = 100000;
  } else if (name == "mismatched-psk") {
    c.peer_psk =
        from_hex("f0e0d0c0b0a090807060504030201000f1e1d1c1b1a191817161514131211101", "peer_psk");
    c.duration = 2000;
  } else if (name == "lossy-arq") {
    c.channel.loss = 0.3;
    c.link.max_retries = 16;
    c.link.window = 64;
    c.link.auth_max_attempts = 16;
    c.covert_input_bytes = 100000;
  } else if (name == "rayleigh-outdoor") {
    c.channel.snr_db = 35.0;
    c.channel.fading = channel::Fading::RayleighBlock;
    c.channel.phase_offset = channel::PhaseOffset::UniformRandomPerBlock;
    c.policy.payload_modulation = AskOrder::Two;
    c.policy.undetectable = false;
    c.link.max_retries = 16;
    c.link.auth_max_attempts = 16;
    c.covert_input_bytes = 20000;
  } else if (name == "bursty-dummy") {
    c.traffic.kind = "bursty";
    c.traffic.on_prob = 0.3;
    c.policy.dummy_primary = true;
    c.covert_input_bytes = 20000;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

traffic::TrafficModel build_traffic_model(const ScenarioConfig& c) {
  traffic::TrafficModel m;
  const auto& t = c.traffic;
  if (t.kind == "constant") {
    m.kind = traffic::Constant{t.symbols};
  } else if (t.kind == "bursty") {
    m.kind = traffic::Bursty{t.on_prob, t.symbols};
  } else if (t.kind == "trace") {
    if (t.trace_file.empty()) throw ConfigError("trace traffic needs traffic.trace");
    m.kind = traffic::Trace{traffic::load_trace(t.trace_file)};
  } else {
    throw ConfigError("traffic.kind: unknown value '" + t.kind + "'");
  }
  if (t.primary_source == "random_bits") {
    m.source = traffic::PrimarySource::RandomBits;
  } else if (t.primary_source == "file_stream") {
    m.source = traffic::PrimarySource::FileStream;
    if (t.primary_file.empty()) throw ConfigError("file_stream traffic needs primary_file");
    m.primary_stream = read_file(t.primary_file);
  } else {
    throw ConfigError("traffic.source: unknown value '" + t.primary_source + "'");
  }
  return m;
}

std::size_t segment_bytes(const ScenarioConfig& c) {
  if (c.link.segment_bytes > 0) return c.link.segment_bytes;
  std::size_t peak = build_traffic_model(c).peak_symbols();
  if (c.policy.dummy_primary) peak = std::max(peak, c.policy.dummy_symbols);
  const auto cap = stego::capacity(peak, c.policy.payload_modulation);
  // Challenge and response payloads are the largest control packets.
  if (!cap || *cap < packet::kChallengeBytes)
    throw ConfigError("traffic opportunities of " + std::to_string(peak) +
                      " symbols cannot carry authentication packets");
  return *cap;
}

std::vector<AskOrder> run_modulations(const ScenarioConfig& c) {
  if (c.modulations.empty()) return {c.policy.payload_modulation};
  return c.modulations;
}

Bytes covert_input(const ScenarioConfig& c, std::uint64_t seed) {
  if (!c.covert_input.empty()) return read_file(c.covert_input);
  Rng rng = make_rng(seed, "covert-input");
  Bytes out(c.covert_input_bytes);
  for (auto& b : out) b = static_cast<Byte>(rng() >> 56);
  return out;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Success: return "success";
    case RunStatus::TransferFailed: return "transfer_failed";
    case RunStatus::AuthFailed: return "auth_failed";
  }
  return "unknown";
}

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::Success: return 0;
    case RunStatus::TransferFailed: return 2;
    case RunStatus::AuthFailed: return 3;
  }
  return 2;
}

namespace {

std::size_t count_bit_errors(std::span<const IQSymbol> received, const BitStream& sent) {
  const BitStream bits = qpsk_demodulate(received);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) errors += bits[i] != sent[i];
  return errors;
}

struct DirectionState {
  traffic::TrafficGenerator traffic;
  channel::Channel channel;
  Rng traffic_rng;
  Rng flag_rng;
  bool trace_ended = false;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();

  RunResult result;
  result.input = covert_input(config, seed);

  link::LinkConfig base;
  base.timeout_subframes = config.link.timeout;
  base.max_retries = config.link.max_retries;
  base.window = config.link.window;
  base.auth_max_attempts = config.link.auth_max_attempts;

  link::LinkConfig bs_cfg = base;
  bs_cfg.psk = config.psk;
  bs_cfg.msin = kBsMsin;
  link::LinkConfig ue_cfg = base;
  ue_cfg.psk = config.peer_psk.empty() ? config.psk : config.peer_psk;
  ue_cfg.msin = kUeMsin;

  link::LinkSession bs(link::Role::BaseStation, bs_cfg, derive_seed(seed, "challenge-bs"));
  link::LinkSession ue(link::Role::UserEquipment, ue_cfg, derive_seed(seed, "challenge-ue"));

  const bool downlink = config.transfer_direction == stego::Direction::Downlink;
  link::LinkSession& sender = downlink ? bs : ue;
  link::LinkSession& receiver = downlink ? ue : bs;
  sender.queue_transfer(result.input, downlink ? kUeMsin : kBsMsin, segment_bytes(config));

  const auto model = build_traffic_model(config);
  DirectionState dl{traffic::TrafficGenerator(model, stego::Direction::Downlink),
                    channel::Channel(config.channel, derive_seed(seed, "channel-dl")),
                    make_rng(seed, "traffic-dl"), make_rng(seed, "flags-bs")};
  DirectionState ul{traffic::TrafficGenerator(model, stego::Direction::Uplink),
                    channel::Channel(config.channel, derive_seed(seed, "channel-ul")),
                    make_rng(seed, "traffic-ul"), make_rng(seed, "flags-ue")};

  // The clean reference sees the same channel statistics but never drops,
  // so every primary block yields reference symbols.
  channel::ChannelModel reference_model = config.channel;
  reference_model.loss = 0.0;
  channel::Channel reference(reference_model, derive_seed(seed, "channel-reference"));

  auto log_events = [&result](link::Role node, const std::vector<link::Event>& events) {
    for (const auto& e : events) result.log.push_back(link::format_event(node, e));
  };

  auto step = [&](link::LinkSession& tx, link::LinkSession& rx, DirectionState& dir,
                  std::uint64_t t, bool capture) {
    auto opp = dir.traffic.next_opportunity(t, dir.traffic_rng);
    if (!opp) {
      dir.trace_ended = true;
      return;
    }
    auto outcome = tx.on_opportunity(*opp, config.policy, dir.flag_rng);
    if (outcome.record)
      result.log.push_back(
          link::format_event(tx.role(), link::transmitted_event(t, *outcome.record)));

    const auto received = dir.channel.transmit(outcome.block);
    std::size_t bits = opp->dummy ? 0 : opp->primary_bits.size();
    std::size_t errors = 0;
    if (received) {
      if (bits > 0) errors = count_bit_errors(*received, opp->primary_bits);
      log_events(rx.role(), rx.on_receive(*received, config.policy));
    }
    std::ostringstream line;
    line << "t=" << t << " node=" << link::to_string(tx.role())
         << " event=primary dir=" << stego::to_string(opp->direction) << " bits=" << bits
         << " errors=" << errors << " dropped=" << (received ? 0 : 1);
    result.log.push_back(line.str());

    if (capture && !opp->dummy && opp->size() > 0 &&
        result.stego_capture.size() < config.capture_symbols) {
      if (received) {
        const std::size_t take =
            std::min(received->size(), config.capture_symbols - result.stego_capture.size());
        result.stego_capture.insert(result.stego_capture.end(), received->begin(),
                                    received->begin() + static_cast<std::ptrdiff_t>(take));
      }
    }
    if (capture && !opp->dummy && opp->size() > 0 &&
        result.clean_capture.size() < config.capture_symbols) {
      const auto clean = reference.transmit(opp->primary_symbols);
      const std::size_t take =
          std::min(clean->size(), config.capture_symbols - result.clean_capture.size());
      result.clean_capture.insert(result.clean_capture.end(), clean->begin(),
                                  clean->begin() + static_cast<std::ptrdiff_t>(take));
    }
  };

  const bool capture = config.capture_symbols > 0;
  std::uint64_t subframes = 0;
  for (std::uint64_t t = 0; t < config.duration; ++t) {
    log_events(bs.role(), bs.tick(t));
    log_events(ue.role(), ue.tick(t));
    step(bs, ue, dl, t, capture);
    step(ue, bs, ul, t, false);
    if (dl.trace_ended || ul.trace_ended) break;
    subframes = t + 1;
    if (receiver.transfer_complete() || bs.auth_failed() || ue.auth_failed() ||
        sender.transfer_failed())
      break;
  }
  result.log.push_back("t=" + std::to_string(subframes) + " event=end subframes=" +
                       std::to_string(subframes));

  result.delivered = receiver.delivered();
  if (bs.auth_failed() || ue.auth_failed()) {
    result.status = RunStatus::AuthFailed;
    result.diagnostic = "mutual authentication failed (bs state " +
                        std::string(link::to_string(bs.auth_state())) + ", ue state " +
                        link::to_string(ue.auth_state()) + ")";
  } else if (receiver.transfer_complete() && result.delivered == result.input) {
    result.status = RunStatus::Success;
  } else {
    result.status = RunStatus::TransferFailed;
    if (sender.transfer_failed())
      result.diagnostic = "retry limit exhausted";
    else if (!receiver.transfer_complete())
      result.diagnostic = "transfer incomplete after " + std::to_string(subframes) +
                          " subframes (" + std::to_string(result.delivered.size()) + " of " +
                          std::to_string(result.input.size()) + " bytes)";
    else
      result.diagnostic = "delivered bytes differ from input";
  }

  result.context.scenario = config.name;
  result.context.seed = seed;
  result.context.snr_db = config.channel.snr_db;
  result.context.modulation = static_cast<int>(config.policy.payload_modulation);
  result.context.undetectable = config.policy.undetectable;
  result.context.ks_vs_clean = std::numeric_limits<double>::quiet_NaN();
  if (!result.stego_capture.empty() && !result.clean_capture.empty()) {
    const auto a = analysis::magnitudes(result.stego_capture);
    const auto b = analysis::magnitudes(result.clean_capture);
    result.context.ks_vs_clean = analysis::ks_distance(a, b);
  }
  result.metrics = analysis::aggregate_metrics(result.log);
  result.csv_row = analysis::csv_row(result.context, result.metrics);
  return result;
}

void write_artifacts(const RunResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "delivered.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(result.delivered.data()),
              static_cast<std::streamsize>(result.delivered.size()));
  }
  {
    std::ofstream out(out_dir / "events.log");
    for (const auto& line : result.log) out << line << '\n';
  }
  {
    std::ofstream out(out_dir / "metrics.csv");
    out << analysis::csv_header() << '\n' << result.csv_row << '\n';
  }
  analysis::CaptureMetadata meta;
  meta.seed = result.context.seed;
  meta.scenario = result.context.scenario;
  meta.snr_db = result.context.snr_db;
  meta.modulation = result.context.modulation;
  meta.undetectable = result.context.undetectable;
  if (!result.stego_capture.empty())
    analysis::write_capture(out_dir / "stego.iq", result.stego_capture, meta);
  if (!result.clean_capture.empty())
    analysis::write_capture(out_dir / "clean.iq", result.clean_capture, meta);
}

std::vector<double> parse_snr_range(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    const std::string token(spec.substr(start, colon - start));
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError("bad SNR range '" + std::string(spec) + "'");
    }
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw ConfigError("SNR range must be start:stop:step with step > 0 and stop >= start");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double v = parts[0] + static_cast<double>(k) * parts[2];
    if (v > parts[1] + parts[2] / 2) break;
    out.push_back(v);
  }
  return out;
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  for (std::size_t trial = 0; trial < spec.trials; ++trial)
    for (double snr : spec.snrs)
      for (AskOrder m : spec.modulations) {
        SweepRow row;
        row.trial = trial;
        row.snr_db = snr;
        row.modulation = m;
        rows.push_back(row);
      }

  // Validate every combination up front so workers only see runtime outcomes.
  auto configure = [&config](const SweepRow& row) {
    ScenarioConfig c = config;
    c.channel.snr_db = row.snr_db;
    c.policy.payload_modulation = row.modulation;
    c.modulations.clear();
    return c;
  };
  for (const auto& row : rows) configure(row).validate();

  unsigned threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        const auto r = run_scenario(configure(rows[i]), spec.base_seed + rows[i].trial);
        rows[i].status = r.status;
        rows[i].metrics = r.metrics;
        rows[i].csv_row = r.csv_row;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

namespace {

// Emits one full-capacity data packet per opportunity.
class SaturatingSource final : public stego::PacketSource {
 public:
  explicit SaturatingSource(std::uint64_t seed) : payload_rng_(make_rng(seed, "payload")) {}

  bool has_pending() const override { return true; }

  std::optional<stego::OutgoingPacket> next_packet(std::size_t capacity,
                                                   const stego::EmbedPolicy& policy,
                                                   Rng& rng) override {
    Bytes payload(capacity);
    for (auto& b : payload) b = static_cast<Byte>(payload_rng_() >> 56);
    stego::OutgoingPacket out;
    out.wire = stego::make_packet(packet::PacketType::Data, payload, number_, policy, rng);
    number_ = static_cast<std::uint16_t>((number_ + 1) % packet::kPacketNumberModulus);
    return out;
  }

 private:
  Rng payload_rng_;
  std::uint16_t number_ = 0;
};

stego::TransmissionOpportunity random_opportunity(std::size_t symbols, Rng& rng) {
  stego::TransmissionOpportunity opp;
  opp.primary_bits.resize(symbols * 2);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < opp.primary_bits.size(); ++i) {
    if (i % 64 == 0) word = rng();
    opp.primary_bits[i] = static_cast<Bit>(word & 1u);
    word >>= 1;
  }
  opp.primary_symbols = qpsk_modulate(opp.primary_bits);
  return opp;
}

}  // namespace

std::vector<IQSymbol> embedding_capture(const stego::EmbedPolicy* policy,
                                        const channel::ChannelModel& model,
                                        std::size_t symbols,
                                        std::size_t opportunity_symbols,
                                        std::uint64_t seed) {
  if (opportunity_symbols == 0) throw ValidationError("opportunity size must be positive");
  channel::Channel ch(model, derive_seed(seed, "capture-channel"));
  Rng traffic_rng = make_rng(seed, "capture-traffic");
  Rng flag_rng = make_rng(seed, "capture-flags");
  SaturatingSource source(seed);

  std::vector<IQSymbol> out;
  out.reserve(symbols);
  while (out.size() < symbols) {
    auto opp = random_opportunity(opportunity_symbols, traffic_rng);
    std::vector<IQSymbol> block;
    if (policy)
      block = stego::generate_and_embed(opp, source, *policy, flag_rng).block;
    else
      block = opp.primary_symbols;
    const auto rx = ch.transmit(block);
    if (!rx) continue;
    const std::size_t take = std::min(rx->size(), symbols - out.size());
    out.insert(out.end(), rx->begin(), rx->begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

PrimaryImpact measure_primary_impact(const stego::EmbedPolicy& policy,
                                     const channel::ChannelModel& model,
                                     std::size_t opportunities,
                                     std::size_t opportunity_symbols, std::uint64_t seed) {
  // Common random numbers: both channels replay the same fading and noise.
  channel::Channel baseline(model, derive_seed(seed, "impact-channel"));
  channel::Channel covert(model, derive_seed(seed, "impact-channel"));
  Rng traffic_rng = make_rng(seed, "impact-traffic");
  Rng flag_rng = make_rng(seed, "impact-flags");
  SaturatingSource source(seed);

  std::size_t errored_baseline = 0;
  std::size_t errored_covert = 0;
  for (std::size_t k = 0; k < opportunities; ++k) {
    auto opp = random_opportunity(opportunity_symbols, traffic_rng);
    const auto clean_rx = baseline.transmit(opp.primary_symbols);
    const auto stego_block = stego::generate_and_embed(opp, source, policy, flag_rng).block;
    const auto stego_rx = covert.transmit(stego_block);
    if (!clean_rx || count_bit_errors(*clean_rx, opp.primary_bits) > 0) ++errored_baseline;
    if (!stego_rx || count_bit_errors(*stego_rx, opp.primary_bits) > 0) ++errored_covert;
  }
  PrimaryImpact r;
  r.opportunities = opportunities;
  const double n = static_cast<double>(std::max<std::size_t>(opportunities, 1));
  r.per_baseline = static_cast<double>(errored_baseline) / n;
  r.per_covert = static_cast<double>(errored_covert) / n;
  r.throughput_loss =
      r.per_baseline < 1.0 ? 1.0 - (1.0 - r.per_covert) / (1.0 - r.per_baseline) : 0.0;
  return r;
}

}  // namespace covert::scenario
