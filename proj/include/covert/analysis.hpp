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
#include <span>
#include <string>
#include <vector>

#include "covert/types.hpp"

namespace covert::analysis {

/// |y| of each captured symbol.
std::vector<double> magnitudes(std::span<const IQSymbol> symbols);

/// Two-sample Kolmogorov-Smirnov statistic: sup_x |F_a(x) - F_b(x)| over the
/// empirical CDFs, evaluated exactly at every merged sample point.
/// Throws ValidationError if either sample is empty.
double ks_distance(std::span<const double> a, std::span<const double> b);

struct Histogram {
  double lower = 0.0;
  double bin_width = 0.0;
  // Probability density per bin; sum(density) * bin_width == 1.
  std::vector<double> density;

  double bin_center(std::size_t i) const {
    return lower + (static_cast<double>(i) + 0.5) * bin_width;
  }
};

/// Equal-width bins spanning [min, max] of the sample. A constant sample
/// puts all mass into a single unit-width bin.
Histogram magnitude_histogram(std::span<const double> sample, std::size_t bins);

struct RunMetrics {
  double covert_throughput_bps = 0.0;
  double retx_pct = 0.0;
  double primary_packet_error_rate = 0.0;
  double primary_throughput_bps = 0.0;
  std::uint64_t subframes = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t emissions = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t data_emissions = 0;
  std::uint64_t primary_bit_errors = 0;
};

// Run identification carried into the CSV row.
struct RunContext {
  std::string scenario;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  int modulation = 4;
  bool undetectable = true;
  // NaN when no capture was taken.
  double ks_vs_clean = 0.0;
};

/// Aggregates event log lines (see link::format_event plus the runner's
/// primary and end lines). Throws ParseError naming the first malformed
/// line.
RunMetrics aggregate_metrics(std::span<const std::string> log_lines);

std::string csv_header();
std::string csv_row(const RunContext& context, const RunMetrics& metrics);

// IQ capture files: little-endian float32 I then Q per sample, plus a JSON
// sidecar at <path>.json.
struct CaptureMetadata {
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  double snr_db = 0.0;
  int modulation = 4;
  bool undetectable = true;
};

std::filesystem::path sidecar_path(const std::filesystem::path& capture);

void write_capture(const std::filesystem::path& path, std::span<const IQSymbol> samples,
                   CaptureMetadata metadata);

std::vector<IQSymbol> read_capture(const std::filesystem::path& path);

CaptureMetadata read_capture_metadata(const std::filesystem::path& path);

/// Formats a double for CSV and logs: "inf", "-inf", "nan" or %.6f.
std::string format_number(double value);

}  // namespace covert::analysis
