// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simnoc/engine.hpp"
#include "simnoc/topology.hpp"
#include "simnoc/traffic.hpp"

namespace simnoc {

/// Delivered payload bytes per second over the measurement window. Throws
/// MeasurementError when nothing was measured.
double aggregated_throughput(const SimStats& stats, double clock_hz);

/// Both directions of every link crossing the midline cut of the longer
/// dimension, times DW/8 and the clock.
double bisection_bandwidth(const NocConfig& cfg);
/// Number of unidirectional links crossing that cut.
int bisection_links(const NocConfig& cfg);

double utilization(double throughput_bps, const NocConfig& cfg);

/// True when no channel of any link handshook more than once per cycle.
bool link_ceiling_holds(const SimStats& stats);

struct LatencyStats {
  double mean = 0.0;
  Cycle p50 = 0;
  Cycle p95 = 0;
  Cycle p99 = 0;
  Cycle max = 0;
};

/// Nearest-rank order statistics. Throws MeasurementError on no samples.
LatencyStats latency_stats(std::span<const Cycle> samples);

// Running experiments ----------------------------------------------------------

struct RunOptions {
  EngineParams engine;
  Cycle warmup = 10'000;
  Cycle cycles = 100'000;
  // Finite workloads run until drained or this many cycles pass.
  Cycle cycle_limit = 50'000'000;
  // Open-loop runs: drain with injection off after measuring.
  bool drain = false;
};

struct RunOutcome {
  SimStats stats;
  ByteLedger ledger;
  bool drained = false;
  double throughput_bps = 0.0;
};

/// One simulation. Synthetic traffic is measured over [warmup, warmup+cycles);
/// DNN workloads and traces run to completion with no warmup.
RunOutcome simulate(const NocConfig& cfg, const TrafficSpec& spec, const RunOptions& opts);

// Sweeps -----------------------------------------------------------------------

struct SweepPoint {
  double load = 0.0;
  double throughput_bps = 0.0;
  double utilization = 0.0;
  std::optional<LatencyStats> latency;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  std::size_t saturation = 0;  // index into points

  const SweepPoint& saturation_point() const { return points.at(saturation); }
};

/// First index whose relative gain over its predecessor is below `threshold`;
/// the last index when the curve never flattens.
std::size_t saturation_index(std::span<const double> throughputs, double threshold = 0.02);

struct SweepOptions {
  RunOptions run;
  unsigned jobs = 1;
  double saturation_threshold = 0.02;
};

/// One independent simulation per load; point i uses seed spec.seed ^ i.
SweepCurve sweep(const NocConfig& cfg, const TrafficSpec& spec, std::span<const double> loads,
                 const SweepOptions& opts);

/// Runs `n` independent tasks on at most `jobs` threads. The first failure is
/// rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task);

// CSV --------------------------------------------------------------------------

void write_sweep_csv(std::ostream& os, const SweepCurve& curve);

struct MatrixCell {
  std::string pattern;
  std::uint64_t burst_bytes = 0;
  double throughput_bps = 0.0;
  double utilization = 0.0;
};
void write_matrix_csv(std::ostream& os, std::span<const MatrixCell> cells);

}  // namespace simnoc
