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

#include "covert/analysis.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace covert::analysis {
namespace {

using json = nlohmann::json;

std::map<std::string, std::string> parse_fields(const std::string& line, std::size_t lineno) {
  std::map<std::string, std::string> fields;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ParseError("event log line " + std::to_string(lineno) +
                       ": token without key=value: '" + line + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  if (!fields.contains("t") || !fields.contains("event"))
    throw ParseError("event log line " + std::to_string(lineno) +
                     ": missing t= or event=: '" + line + "'");
  return fields;
}

std::uint64_t field_u64(const std::map<std::string, std::string>& fields,
                        const std::string& key, const std::string& line,
                        std::size_t lineno) {
  const auto it = fields.find(key);
  if (it == fields.end())
    throw ParseError("event log line " + std::to_string(lineno) + ": missing " + key +
                     "=: '" + line + "'");
  std::uint64_t value = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("event log line " + std::to_string(lineno) + ": bad " + key +
                     " value '" + s + "'");
  return value;
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw ParseError("expected a number in capture sidecar");
}

}  // namespace

std::vector<double> magnitudes(std::span<const IQSymbol> symbols) {
  std::vector<double> out(symbols.size());
  std::transform(symbols.begin(), symbols.end(), out.begin(),
                 [](const IQSymbol& s) { return std::abs(s); });
  return out;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS distance needs non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  // Step both ECDFs past every copy of the next merged value before
  // comparing, so ties are evaluated at the right-continuous CDF value.
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j]))
      v = x[i];
    else
      v = y[j];
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return best;
}

Histogram magnitude_histogram(std::span<const double> sample, std::size_t bins) {
  if (bins < 2) throw ValidationError("histogram needs at least 2 bins");
  if (sample.empty()) throw ValidationError("histogram of an empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  Histogram h;
  h.density.assign(bins, 0.0);
  const double n = static_cast<double>(sample.size());
  if (*lo_it == *hi_it) {
    h.bin_width = 1.0 / static_cast<double>(bins);
    h.density[bins / 2] = 1.0 / h.bin_width;
    h.lower = *lo_it - (static_cast<double>(bins / 2) + 0.5) * h.bin_width;
    return h;
  }
  h.lower = *lo_it;
  h.bin_width = (*hi_it - *lo_it) / static_cast<double>(bins);
  for (double v : sample) {
    auto idx = static_cast<std::size_t>((v - h.lower) / h.bin_width);
    if (idx >= bins) idx = bins - 1;
    h.density[idx] += 1.0;
  }
  for (double& d : h.density) d /= n * h.bin_width;
  return h;
}

RunMetrics aggregate_metrics(std::span<const std::string> log_lines) {
  RunMetrics m;
  std::uint64_t primary_packets = 0;
  std::uint64_t primary_errored = 0;
  std::uint64_t primary_good_bits = 0;

  for (std::size_t k = 0; k < log_lines.size(); ++k) {
    const auto& line = log_lines[k];
    const std::size_t lineno = k + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = parse_fields(line, lineno);
    field_u64(fields, "t", line, lineno);
    const auto& event = fields.at("event");

    if (event == "tx") {
      ++m.emissions;
      if (field_u64(fields, "retx", line, lineno) != 0) ++m.retransmissions;
      if (field_u64(fields, "type", line, lineno) == 2) ++m.data_emissions;
    } else if (event == "data_delivered") {
      m.delivered_bytes += field_u64(fields, "bytes", line, lineno);
    } else if (event == "primary") {
      const auto bits = field_u64(fields, "bits", line, lineno);
      const auto errors = field_u64(fields, "errors", line, lineno);
      const auto dropped = field_u64(fields, "dropped", line, lineno);
      if (bits == 0) continue;
      ++primary_packets;
      m.primary_bit_errors += errors;
      if (errors > 0 || dropped != 0)
        ++primary_errored;
      else
        primary_good_bits += bits;
    } else if (event == "end") {
      m.subframes = field_u64(fields, "subframes", line, lineno);
    }
  }

  const double seconds = static_cast<double>(m.subframes) * 1e-3;
  if (seconds > 0.0) {
    m.covert_throughput_bps = static_cast<double>(m.delivered_bytes) * 8.0 / seconds;
    m.primary_throughput_bps = static_cast<double>(primary_good_bits) / seconds;
  }
  if (m.emissions > 0)
    m.retx_pct = 100.0 * static_cast<double>(m.retransmissions) /
                 static_cast<double>(m.emissions);
  if (primary_packets > 0)
    m.primary_packet_error_rate =
        static_cast<double>(primary_errored) / static_cast<double>(primary_packets);
  return m;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string csv_header() {
  return "scenario,seed,snr_db,modulation,undetectable,covert_tput_bps,retx_pct,"
         "primary_per,primary_tput_bps,ks_vs_clean";
}

std::string csv_row(const RunContext& c, const RunMetrics& m) {
  std::ostringstream out;
  out << c.scenario << ',' << c.seed << ',' << format_number(c.snr_db) << ','
      << c.modulation << ',' << (c.undetectable ? 1 : 0) << ','
      << format_number(m.covert_throughput_bps) << ',' << format_number(m.retx_pct) << ','
      << format_number(m.primary_packet_error_rate) << ','
      << format_number(m.primary_throughput_bps) << ',' << format_number(c.ks_vs_clean);
  return out.str();
}

std::filesystem::path sidecar_path(const std::filesystem::path& capture) {
  auto p = capture;
  p += ".json";
  return p;
}

void write_capture(const std::filesystem::path& path, std::span<const IQSymbol> samples,
                   CaptureMetadata metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write capture " + path.string());
  std::vector<char> buf(samples.size() * 8);
  auto put = [&buf](std::size_t off, float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int k = 0; k < 4; ++k) buf[off + k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    put(8 * i, static_cast<float>(samples[i].real()));
    put(8 * i + 4, static_cast<float>(samples[i].imag()));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  metadata.sample_count = samples.size();
  json j;
  j["sample_count"] = metadata.sample_count;
  j["seed"] = metadata.seed;
  j["scenario"] = metadata.scenario;
  j["snr_db"] = number_or_string(metadata.snr_db);
  j["modulation"] = metadata.modulation;
  j["undetectable"] = metadata.undetectable;
  std::ofstream side(sidecar_path(path));
  side << j.dump(2) << '\n';
}

std::vector<IQSymbol> read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open capture " + path.string());
  const std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (raw.size() % 8 != 0)
    throw ParseError("capture " + path.string() + " is not a whole number of I/Q pairs");
  auto get = [&raw](std::size_t off) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= std::uint32_t{raw[off + k]} << (8 * k);
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  std::vector<IQSymbol> out(raw.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {get(8 * i), get(8 * i + 4)};
  return out;
}

CaptureMetadata read_capture_metadata(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw ParseError("missing capture sidecar " + sidecar_path(path).string());
  try {
    const json j = json::parse(in);
    CaptureMetadata m;
    m.sample_count = j.at("sample_count").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scenario = j.at("scenario").get<std::string>();
    m.snr_db = read_number(j.at("snr_db"));
    m.modulation = j.at("modulation").get<int>();
    m.undetectable = j.at("undetectable").get<bool>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError("bad capture sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
}

}  // namespace covert::analysis
