// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simnoc/engine.hpp"
#include "simnoc/metrics.hpp"
#include "simnoc/topology.hpp"
#include "simnoc/traffic.hpp"

namespace simnoc {

std::string_view version();

/// Named starting points for [noc]. Explicit keys override them.
std::optional<NocConfig> preset_config(std::string_view name);
const std::vector<std::string>& preset_names();

struct RunSection {
  Cycle warmup = 10'000;
  Cycle cycles = 100'000;
  Cycle cycle_limit = 50'000'000;
  bool drain = false;
  std::vector<double> loads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<TrafficKind> patterns{TrafficKind::AllGlobal, TrafficKind::MaxTwoHop, TrafficKind::MaxSingleHop};
  std::vector<std::uint64_t> burst_sizes{4, 64, 1024, 10240, 65536};
  double saturation_threshold = 0.02;
  unsigned jobs = 1;
  std::string out = "out";

  bool operator==(const RunSection&) const = default;
};

struct ExperimentConfig {
  std::string preset;  // informational once resolved
  NocConfig noc;
  TrafficSpec traffic;
  EngineParams engine;
  RunSection run;

  RunOptions run_options() const;
  bool operator==(const ExperimentConfig& o) const;
};

/// INI text with [noc], [traffic], [engine] and [run] sections. Syntax errors
/// throw ParseError with the line; bad keys or values throw ConfigError naming
/// "section.key". The result satisfies NocConfig::validate().
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved INI text. parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& cfg);

// Modes -------------------------------------------------------------------------

enum class Mode : std::uint8_t { Run, Sweep, Matrix, Replay };
std::string_view to_string(Mode m);

struct ModeResult {
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
};

/// Seed of matrix cell (pattern p, burst b).
std::uint64_t cell_seed(std::uint64_t base, std::size_t pattern, std::size_t burst);

/// Traffic for one matrix cell. Transfers range over [beat, max(burst, beat)].
TrafficSpec matrix_cell_spec(const ExperimentConfig& cfg, std::size_t pattern, std::size_t burst);

/// Runs `mode` and writes its CSV plus manifest.json under `out`. Replay reads
/// cfg.traffic.trace_path. `event_log` enables the per-cycle log for single runs.
ModeResult run_mode(Mode mode, const ExperimentConfig& cfg, const std::filesystem::path& out,
                    bool event_log = false);

/// Header and row of the single-run stats CSV.
void write_run_csv(std::ostream& os, const ExperimentConfig& cfg, const RunOutcome& r);
void write_links_csv(std::ostream& os, const SimStats& stats);

}  // namespace simnoc
