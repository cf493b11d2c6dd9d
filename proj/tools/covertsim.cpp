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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covert/analysis.hpp"
#include "covert/scenario.hpp"

namespace fs = std::filesystem;
using namespace covert;

namespace {

struct Overrides {
  std::optional<double> snr;
  std::optional<int> modulation;
  std::optional<double> loss;
  std::optional<std::uint64_t> duration;
  std::optional<std::uint32_t> window;
  std::optional<std::uint32_t> max_retries;
  std::optional<std::size_t> capture_symbols;
  bool fixed = false;
  bool undetectable = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--snr-db", o.snr, "Override channel SNR in dB");
  cmd->add_option("--mod", o.modulation, "Override payload modulation")
      ->check(CLI::IsMember({2, 4}));
  cmd->add_option("--loss", o.loss, "Override opportunity loss probability");
  cmd->add_option("--duration", o.duration, "Override duration in subframes");
  cmd->add_option("--window", o.window, "Override ARQ window");
  cmd->add_option("--max-retries", o.max_retries, "Override ARQ retry limit");
  cmd->add_option("--capture-symbols", o.capture_symbols, "Downlink symbols to capture");
  auto* fixed = cmd->add_flag("--fixed", o.fixed, "Use the fixed ASK configuration");
  cmd->add_flag("--undetectable", o.undetectable, "Use randomized threshold flags")
      ->excludes(fixed);
}

void apply(const Overrides& o, scenario::ScenarioConfig& c) {
  if (o.snr) c.channel.snr_db = *o.snr;
  if (o.modulation) {
    c.policy.payload_modulation = *o.modulation == 2 ? AskOrder::Two : AskOrder::Four;
    c.modulations.clear();
  }
  if (o.loss) c.channel.loss = *o.loss;
  if (o.duration) c.duration = *o.duration;
  if (o.window) c.link.window = *o.window;
  if (o.max_retries) c.link.max_retries = *o.max_retries;
  if (o.capture_symbols) c.capture_symbols = *o.capture_symbols;
  if (o.fixed) c.policy.undetectable = false;
  if (o.undetectable) c.policy.undetectable = true;
}

scenario::ScenarioConfig load(const std::string& config_path, const std::string& preset_name) {
  if (!config_path.empty() && !preset_name.empty())
    throw scenario::ConfigError("give either --config or --preset, not both");
  if (!config_path.empty()) return scenario::load_config(config_path);
  if (!preset_name.empty()) return scenario::preset(preset_name);
  throw scenario::ConfigError("one of --config or --preset is required");
}

int cmd_run(const std::string& config_path, const std::string& preset_name,
            std::uint64_t seed, std::string out, const Overrides& o) {
  auto config = load(config_path, preset_name);
  apply(o, config);
  if (out.empty()) out = config.outputs;
  if (out.empty()) throw scenario::ConfigError("no output directory (--out or outputs)");
  config.validate();

  const auto mods = scenario::run_modulations(config);
  fs::create_directories(out);
  std::ofstream csv(fs::path(out) / "metrics.csv");
  csv << analysis::csv_header() << '\n';

  int worst = 0;
  for (AskOrder m : mods) {
    auto c = config;
    c.policy.payload_modulation = m;
    c.modulations.clear();
    const auto result = scenario::run_scenario(c, seed);
    const fs::path dir =
        mods.size() == 1 ? fs::path(out) : fs::path(out) / ("ask" + std::to_string(int(m)));
    scenario::write_artifacts(result, dir);
    csv << result.csv_row << '\n';
    std::cout << result.csv_row << '\n';
    if (result.status != scenario::RunStatus::Success)
      std::cerr << "covertsim: " << int(m) << "-ASK run " << scenario::to_string(result.status)
                << ": " << result.diagnostic << '\n';
    worst = std::max(worst, scenario::exit_code(result.status));
  }
  return worst;
}

int cmd_sweep(const std::string& config_path, const std::string& preset_name,
              const std::string& snr, const std::vector<int>& mods, std::size_t trials,
              std::uint64_t seed, unsigned threads, std::string out, const Overrides& o) {
  auto config = load(config_path, preset_name);
  apply(o, config);
  if (out.empty()) out = config.outputs;
  if (out.empty()) throw scenario::ConfigError("no output directory (--out or outputs)");

  scenario::SweepSpec spec;
  spec.snrs = snr.empty() ? std::vector<double>{config.channel.snr_db}
                          : scenario::parse_snr_range(snr);
  for (int m : mods) spec.modulations.push_back(m == 2 ? AskOrder::Two : AskOrder::Four);
  spec.trials = trials;
  spec.base_seed = seed;
  spec.threads = threads;

  const auto rows = scenario::sweep(config, spec);
  fs::create_directories(out);
  std::ofstream csv(fs::path(out) / "sweep.csv");
  csv << analysis::csv_header() << '\n';
  std::cout << analysis::csv_header() << '\n';
  for (const auto& row : rows) {
    csv << row.csv_row << '\n';
    std::cout << row.csv_row << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& capture, const std::string& reference) {
  std::vector<IQSymbol> a;
  std::vector<IQSymbol> b;
  try {
    a = analysis::read_capture(capture);
    b = analysis::read_capture(reference);
  } catch (const ParseError& e) {
    throw scenario::ConfigError(e.what());
  }
  if (a.empty() || b.empty()) throw scenario::ConfigError("captures must not be empty");
  const double ks = analysis::ks_distance(analysis::magnitudes(a), analysis::magnitudes(b));
  std::printf("%.10g\n", ks);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covert LTE physical-layer channel simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::uint64_t seed = 1;
  std::string out;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "Authenticate and transfer the covert input once");
  run->add_option("--config", config_path, "Scenario JSON file");
  run->add_option("--preset", preset_name, "Built-in scenario name");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  add_overrides(run, overrides);

  std::string snr;
  std::vector<int> mods{2, 4};
  std::size_t trials = 1;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run an SNR x modulation x trial grid");
  sweep->add_option("--config", config_path, "Scenario JSON file");
  sweep->add_option("--preset", preset_name, "Built-in scenario name");
  sweep->add_option("--snr", snr, "start:stop:step in dB");
  sweep->add_option("--mods", mods, "Payload modulations")
      ->delimiter(',')
      ->check(CLI::IsMember({2, 4}));
  sweep->add_option("--trials", trials, "Seeds per grid point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Seed of trial 0; trial k uses seed + k");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out", out, "Output directory");
  add_overrides(sweep, overrides);

  std::string capture;
  std::string reference;
  auto* analyze = app.add_subcommand("analyze", "KS distance between two captures");
  analyze->add_option("--capture", capture, "IQ capture")->required();
  analyze->add_option("--reference", reference, "Reference IQ capture")->required();

  std::string show;
  auto* presets = app.add_subcommand("presets", "List built-in scenarios");
  presets->add_option("--show", show, "Print one preset as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : scenario::kConfigErrorExit;
  }

  try {
    if (*run) return cmd_run(config_path, preset_name, seed, out, overrides);
    if (*sweep)
      return cmd_sweep(config_path, preset_name, snr, mods, trials, seed, threads, out,
                       overrides);
    if (*analyze) return cmd_analyze(capture, reference);
    if (*presets) {
      if (!show.empty()) {
        std::cout << scenario::config_to_json(scenario::preset(show)).dump(2) << '\n';
      } else {
        for (const auto& name : scenario::preset_names()) std::cout << name << '\n';
      }
      return 0;
    }
  } catch (const scenario::ConfigError& e) {
    std::cerr << "covertsim: config error: " << e.what() << '\n';
    return scenario::kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "covertsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
