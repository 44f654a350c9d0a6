// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

// simnoc command-line front end.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "simnoc/error.hpp"
#include "simnoc/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace simnoc;

enum Exit : int { kOk = 0, kConfig = 1, kRuntime = 2, kValidation = 3 };

struct Flags {
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  bool verbose = false;
};

ExperimentConfig resolve(const std::string& path, const Flags& flags) {
  ExperimentConfig cfg = load_config(path);
  if (flags.seed) cfg.traffic.seed = *flags.seed;
  if (flags.jobs > 0) cfg.run.jobs = flags.jobs;
  if (!flags.out.empty()) cfg.run.out = flags.out;
  return cfg;
}

bool looks_like_config(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ini" || ext == ".cfg" || ext == ".conf") return true;
  std::ifstream is(path);
  std::string line;
  while (std::getline(is, line)) {
    const auto at = line.find_first_not_of(" \t\r");
    if (at == std::string::npos || line[at] == '#' || line[at] == ';') continue;
    return line[at] == '[';
  }
  return false;
}

std::vector<TraceRecord> load_trace(const std::string& path, const NocConfig& noc) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read trace " + path);
  auto records = read_trace(is);
  validate_trace(records, noc);
  return records;
}

void report(const ModeResult& r, bool verbose) {
  for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
  if (verbose) std::cerr << "wall time " << r.wall_seconds << " s\n";
}

int run_experiment(Mode mode, const std::string& config, const Flags& flags,
                   const std::string& trace = {}) {
  ExperimentConfig cfg;
  try {
    cfg = resolve(config, flags);
  } catch (const Error& e) {
    std::cerr << "simnoc: config error: " << e.what() << '\n';
    return kConfig;
  }
  if (mode == Mode::Replay) {
    try {
      const auto records = load_trace(trace, cfg.noc);
      if (flags.verbose) std::cerr << "trace " << trace << ": " << records.size() << " records\n";
    } catch (const Error& e) {
      std::cerr << "simnoc: invalid trace: " << e.what() << '\n';
      return kValidation;
    }
    cfg.traffic.kind = TrafficKind::TraceReplay;
    cfg.traffic.trace_path = fs::absolute(trace).string();
  }
  try {
    report(run_mode(mode, cfg, cfg.run.out, flags.verbose), flags.verbose);
  } catch (const ConfigError& e) {
    std::cerr << "simnoc: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "simnoc: " << to_string(mode) << " failed: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}

int validate(const std::string& path, const std::string& config) {
  if (!fs::is_regular_file(path)) {
    std::cerr << "simnoc: no such file " << path << '\n';
    return kRuntime;
  }
  if (looks_like_config(path)) {
    try {
      const auto cfg = load_config(path);
      std::cout << "config ok: " << cfg.noc.rows << "x" << cfg.noc.cols << " DW=" << cfg.noc.data_width
                << " traffic=" << to_string(cfg.traffic.kind) << '\n';
      return kOk;
    } catch (const Error& e) {
      std::cerr << "simnoc: config error: " << e.what() << '\n';
      return kConfig;
    }
  }
  NocConfig noc = *preset_config("slim_4x4");
  if (!config.empty()) {
    try {
      noc = load_config(config).noc;
    } catch (const Error& e) {
      std::cerr << "simnoc: config error: " << e.what() << '\n';
      return kConfig;
    }
  }
  try {
    const auto records = load_trace(path, noc);
    std::cout << "trace ok: " << records.size() << " records\n";
    return kOk;
  } catch (const Error& e) {
    std::cerr << "simnoc: invalid trace: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level simulator of a burst-based AXI mesh network-on-chip"};
  app.set_version_flag("--version", "simnoc " + std::string(simnoc::version()));
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--out", flags.out, "Output directory (overrides run.out)");
  app.add_option("--seed", flags.seed, "Seed override");
  app.add_option("--jobs", flags.jobs, "Concurrent simulations")->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", flags.verbose, "Write the per-cycle event log and progress");

  std::string config;
  std::string trace;
  auto* run = app.add_subcommand("run", "Single simulation");
  run->add_option("config", config, "Experiment config")->required();
  auto* sweep = app.add_subcommand("sweep", "Injected-load sweep");
  sweep->add_option("config", config, "Experiment config")->required();
  auto* matrix = app.add_subcommand("matrix", "Pattern x burst size grid");
  matrix->add_option("config", config, "Experiment config")->required();
  auto* replay = app.add_subcommand("replay", "Replay a transfer trace");
  replay->add_option("trace", trace, "Trace file")->required();
  replay->add_option("config", config, "Experiment config")->required();
  auto* check = app.add_subcommand("validate", "Check a config or a trace");
  std::string target;
  check->add_option("file", target, "Config or trace")->required();
  check->add_option("config", config, "Config the trace must fit (default slim_4x4)");
  for (auto* sub : {run, sweep, matrix, replay, check}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*run) return run_experiment(Mode::Run, config, flags);
  if (*sweep) return run_experiment(Mode::Sweep, config, flags);
  if (*matrix) return run_experiment(Mode::Matrix, config, flags);
  if (*replay) return run_experiment(Mode::Replay, config, flags, trace);
  return validate(target, config);
}
