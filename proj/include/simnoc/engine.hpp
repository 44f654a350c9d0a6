// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "simnoc/axi.hpp"
#include "simnoc/crosspoint.hpp"
#include "simnoc/topology.hpp"

namespace simnoc {

/// How the outstanding-transaction limit is applied at a master.
enum class MotMode : std::uint8_t { PerDirection, Combined };
std::string_view to_string(MotMode m);
std::optional<MotMode> parse_mot_mode(std::string_view s);

struct EngineParams {
  std::size_t fifo_depth = 2;
  Cycle slave_latency = 1;
  MotMode mot_mode = MotMode::PerDirection;
  std::uint32_t max_burst_beats = kAxiMaxBeats;
  // Commands a DMA master holds before its traffic source is back-pressured.
  std::size_t command_queue_depth = 4096;
  Cycle warmup_cycles = 0;
  std::ostream* event_log = nullptr;
  // Receives the same handshakes as the log, unformatted.
  EventObserver* observer = nullptr;
};

/// Pull-based injection process. Each master owns an independent stream
/// ordered by issue cycle.
class TrafficSource {
 public:
  virtual ~TrafficSource() = default;
  /// Next request of master `master` (index into master_coords()), or nullptr
  /// when that stream is exhausted.
  virtual const TransferRequest* peek(std::size_t master) = 0;
  virtual void pop(std::size_t master) = 0;
};

struct LinkStats {
  std::string name;
  std::array<std::uint64_t, kNumChannels> busy{};  // handshakes per channel

  bool operator==(const LinkStats&) const = default;
};

/// Counters of one run. Everything except `cycles`, `injected_*` and the peaks
/// covers only the measurement window after warmup.
struct SimStats {
  Cycle cycles = 0;
  Cycle warmup_cycles = 0;
  Cycle measured_cycles = 0;
  std::uint64_t delivered_read_bytes = 0;   // R beats reaching masters
  std::uint64_t delivered_write_bytes = 0;  // W beats accepted by slaves
  std::uint64_t injected_transfers = 0;
  std::uint64_t injected_bytes = 0;
  std::uint64_t completed_transfers = 0;
  std::uint64_t decode_errors = 0;  // bursts answered with an error
  std::vector<Cycle> latencies;     // issue to last response, per transfer
  std::vector<LinkStats> links;
  std::uint32_t peak_outstanding = 0;

  std::uint64_t delivered_payload_bytes() const { return delivered_read_bytes + delivered_write_bytes; }
  bool operator==(const SimStats&) const = default;
};

/// Whole-run byte accounting over every transfer ever injected.
struct ByteLedger {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t resident = 0;

  bool balanced() const { return injected == delivered + resident; }
};

enum class InjectResult : std::uint8_t { Accepted, Deferred };

/// DMA engine endpoint. Splits transfers into bursts and issues them while
/// the outstanding limit allows.
class DmaMaster {
 public:
  DmaMaster(std::size_t index, Coord at, const NocConfig& cfg, const EngineParams& params, Connection* link);

  Coord at() const { return at_; }
  InjectResult inject(const TransferRequest& req);
  std::size_t queued() const { return pending_[0].size() + pending_[1].size(); }
  void step(Cycle now);

  std::uint32_t outstanding(Direction d) const { return outstanding_[static_cast<std::size_t>(d)]; }
  bool idle() const;
  std::uint64_t resident_bytes() const;

  // Running totals read by the simulator.
  std::uint64_t read_bytes_all = 0;
  std::uint64_t read_bytes_window = 0;
  std::uint64_t completed_window = 0;
  std::uint64_t decode_errors_window = 0;
  std::vector<Cycle> latencies;
  std::uint32_t peak_outstanding = 0;
  Cycle window_start = 0;

 private:
  struct Transfer {
    Cycle issue_cycle = 0;
    std::uint32_t bursts_left = 0;
  };
  struct InFlight {
    std::uint64_t tag = 0;
    std::uint64_t transfer = 0;
  };
  struct WriteData {
    std::uint64_t tag = 0;
    std::uint32_t id = 0;
    std::uint32_t beats = 0;
    std::uint32_t next = 0;
  };

  bool has_headroom(Direction d) const;
  void refill(Direction d);
  void complete(Cycle now, Direction d, std::uint32_t id, std::uint64_t tag, bool error);

  std::size_t index_;
  Coord at_;
  const NocConfig* cfg_;
  const EngineParams* params_;
  Connection* link_;
  std::array<std::deque<TransferRequest>, 2> pending_;
  std::array<std::deque<Burst>, 2> issue_;
  std::array<std::uint32_t, 2> outstanding_{};
  std::deque<WriteData> w_data_;
  // Issue order per (direction, id); responses must match the front.
  std::array<std::unordered_map<std::uint32_t, std::deque<InFlight>>, 2> order_;
  std::unordered_map<std::uint64_t, Transfer> transfers_;
  std::uint64_t next_transfer_ = 0;
  std::uint64_t next_tag_ = 0;
};

/// Idealized memory: fixed service latency, then one beat per cycle per
/// channel, requests served in arrival order.
class MemorySlave {
 public:
  MemorySlave(Coord at, const NocConfig& cfg, const EngineParams& params, Connection* link);

  Coord at() const { return at_; }
  void step(Cycle now);
  bool idle() const { return writes_.empty() && b_queue_.empty() && reads_.empty(); }
  std::uint64_t resident_bytes() const;

  std::uint64_t write_bytes_all = 0;
  std::uint64_t write_bytes_window = 0;
  Cycle window_start = 0;

 private:
  struct PendingWrite {
    std::uint32_t id = 0;
    std::uint64_t tag = 0;
    std::uint32_t beats_left = 0;
  };
  struct PendingB {
    WriteResponse resp;
    Cycle ready = 0;
  };
  struct PendingRead {
    std::uint32_t id = 0;
    std::uint64_t tag = 0;
    std::uint32_t beats = 0;
    std::uint32_t next = 0;
    Cycle start = 0;
  };

  Coord at_;
  std::uint32_t beat_bytes_;
  Cycle latency_;
  Connection* link_;
  std::deque<PendingWrite> writes_;
  std::deque<PendingB> b_queue_;
  std::deque<PendingRead> reads_;
};

/// One simulation instance: mesh of crosspoints, DMA masters, memory slaves.
/// Single-threaded and deterministic.
class Simulator {
 public:
  explicit Simulator(NocConfig cfg, EngineParams params = {}, TrafficSource* source = nullptr);
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const NocConfig& config() const { return cfg_; }
  const EngineParams& params() const { return params_; }
  const Mesh& mesh() const { return mesh_; }
  const AddressMap& address_map() const { return map_; }
  const std::vector<RoutingTable>& routing_tables() const { return tables_; }

  /// Queues a transfer at its master directly, bypassing the traffic source.
  InjectResult inject(const TransferRequest& req);
  /// When false the traffic source is no longer polled.
  void set_injection(bool enabled) { injecting_ = enabled; }

  void step();
  void run(Cycle cycles);
  /// Steps until nothing is queued or in flight and the source is exhausted
  /// (or injection is off). Returns false if `limit` cycles pass first.
  bool drain(Cycle limit);
  bool idle() const;
  Cycle now() const { return now_; }

  SimStats stats() const;
  ByteLedger byte_ledger() const;
  std::size_t num_masters() const { return masters_.size(); }
  const DmaMaster& master(std::size_t i) const { return *masters_[i]; }
  const Crosspoint& crosspoint(Coord c) const { return *xps_[static_cast<std::size_t>(mesh_.index_of(c))]; }

 private:
  Connection* add_connection(std::string from, std::string to);
  void pull_traffic();
  bool source_exhausted();
  void open_window();

  NocConfig cfg_;
  EngineParams params_;
  TrafficSource* source_;
  Mesh mesh_;
  AddressMap map_;
  std::vector<RoutingTable> tables_;
  std::vector<std::unique_ptr<Connection>> links_;
  std::vector<std::unique_ptr<Crosspoint>> xps_;
  std::vector<std::unique_ptr<DmaMaster>> masters_;
  std::vector<std::unique_ptr<MemorySlave>> slaves_;
  std::unordered_map<int, std::size_t> master_at_;  // crosspoint index -> master
  std::vector<std::array<std::uint64_t, kNumChannels>> window_base_;
  Cycle now_ = 0;
  bool injecting_ = true;
  bool window_open_ = false;
  std::uint64_t injected_transfers_ = 0;
  std::uint64_t injected_bytes_ = 0;
};

}  // namespace simnoc
