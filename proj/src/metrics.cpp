// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "simnoc/error.hpp"

namespace simnoc {

double aggregated_throughput(const SimStats& stats, double clock_hz) {
  if (stats.measured_cycles == 0) throw MeasurementError("throughput needs at least one measured cycle");
  return static_cast<double>(stats.delivered_payload_bytes()) / static_cast<double>(stats.measured_cycles) *
         clock_hz;
}

int bisection_links(const NocConfig& cfg) {
  if (std::max(cfg.rows, cfg.cols) < 2) return 0;
  return 2 * std::min(cfg.rows, cfg.cols);
}

double bisection_bandwidth(const NocConfig& cfg) {
  return static_cast<double>(bisection_links(cfg)) * cfg.beat_bytes() * cfg.clock_hz;
}

double utilization(double throughput_bps, const NocConfig& cfg) {
  const double bis = bisection_bandwidth(cfg);
  if (bis <= 0.0) throw MeasurementError("utilization needs a mesh with a bisection");
  return throughput_bps / bis;
}

bool link_ceiling_holds(const SimStats& stats) {
  for (const auto& l : stats.links)
    for (auto busy : l.busy)
      if (busy > stats.measured_cycles) return false;
  return true;
}

LatencyStats latency_stats(std::span<const Cycle> samples) {
  if (samples.empty()) throw MeasurementError("latency statistics need at least one sample");
  std::vector<Cycle> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  auto rank = [&](double p) {
    auto k = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(s.size())));
    return s[std::clamp<std::size_t>(k, 1, s.size()) - 1];
  };
  LatencyStats out;
  long double sum = 0;
  for (Cycle c : s) sum += c;
  out.mean = static_cast<double>(sum / s.size());
  out.p50 = rank(50);
  out.p95 = rank(95);
  out.p99 = rank(99);
  out.max = s.back();
  return out;
}

RunOutcome simulate(const NocConfig& cfg, const TrafficSpec& spec, const RunOptions& opts) {
  const bool finite = is_dnn(spec.kind) || spec.kind == TrafficKind::TraceReplay;
  auto source = make_traffic(spec, cfg);
  EngineParams params = opts.engine;
  params.warmup_cycles = finite ? 0 : opts.warmup;
  Simulator sim(cfg, params, source.get());

  RunOutcome out;
  if (finite) {
    out.drained = sim.drain(opts.cycle_limit);
    out.stats = sim.stats();
  } else {
    sim.run(opts.warmup + opts.cycles);
    out.stats = sim.stats();
    if (opts.drain) {
      sim.set_injection(false);
      out.drained = sim.drain(opts.cycle_limit);
    }
  }
  out.ledger = sim.byte_ledger();
  if (!link_ceiling_holds(out.stats)) throw EngineError("a link channel exceeded one transfer per cycle");
  out.throughput_bps = out.stats.measured_cycles > 0 ? aggregated_throughput(out.stats, cfg.clock_hz) : 0.0;
  return out;
}

std::size_t saturation_index(std::span<const double> throughputs, double threshold) {
  if (throughputs.empty()) throw MeasurementError("empty sweep");
  for (std::size_t i = 1; i < throughputs.size(); ++i) {
    const double prev = throughputs[i - 1];
    const double gain = prev > 0.0 ? (throughputs[i] - prev) / prev : (throughputs[i] > 0.0 ? 1.0 : 0.0);
    if (gain < threshold) return i;
  }
  return throughputs.size() - 1;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  std::size_t failed_at = n;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

SweepCurve sweep(const NocConfig& cfg, const TrafficSpec& spec, std::span<const double> loads,
                 const SweepOptions& opts) {
  if (loads.empty()) throw ConfigError("loads", "at least one load point is required");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (!(loads[i] > 0.0 && loads[i] <= 1.0)) throw ConfigError("loads", "every load must lie in (0, 1]");
    if (i > 0 && loads[i] <= loads[i - 1]) throw ConfigError("loads", "loads must be strictly increasing");
  }
  cfg.validate();
  spec.validate(cfg);

  SweepCurve curve;
  curve.points.resize(loads.size());
  parallel_for(loads.size(), opts.jobs, [&](std::size_t i) {
    TrafficSpec point = spec;
    point.injected_load = loads[i];
    point.seed = spec.seed ^ i;
    RunOutcome r;
    try {
      r = simulate(cfg, point, opts.run);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "sweep point " << i << " (load " << loads[i] << "): " << e.what();
      throw EngineError(os.str());
    }
    SweepPoint& p = curve.points[i];
    p.load = loads[i];
    p.throughput_bps = r.throughput_bps;
    p.utilization = utilization(r.throughput_bps, cfg);
    if (!r.stats.latencies.empty()) p.latency = latency_stats(r.stats.latencies);
  });
  std::vector<double> t;
  for (const auto& p : curve.points) t.push_back(p.throughput_bps);
  curve.saturation = saturation_index(t, opts.saturation_threshold);
  return curve;
}

void write_sweep_csv(std::ostream& os, const SweepCurve& curve) {
  os << "load,throughput_bps,utilization,mean_lat,p50,p95,p99\n";
  for (const auto& p : curve.points) {
    os << std::setprecision(6) << p.load << ',' << std::fixed << std::setprecision(1) << p.throughput_bps << ','
       << std::setprecision(6) << p.utilization << ',';
    if (p.latency) {
      os << std::setprecision(3) << p.latency->mean << ',' << p.latency->p50 << ',' << p.latency->p95 << ','
         << p.latency->p99;
    } else {
      os << ",,,";
    }
    os << std::defaultfloat << '\n';
  }
}

void write_matrix_csv(std::ostream& os, std::span<const MatrixCell> cells) {
  os << "pattern,burst_bytes,throughput_bps,utilization\n";
  for (const auto& c : cells)
    os << c.pattern << ',' << c.burst_bytes << ',' << std::fixed << std::setprecision(1) << c.throughput_bps << ','
       << std::setprecision(6) << c.utilization << std::defaultfloat << '\n';
}

}  // namespace simnoc
