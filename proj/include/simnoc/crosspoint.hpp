// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simnoc/axi.hpp"
#include "simnoc/lane.hpp"
#include "simnoc/topology.hpp"

namespace simnoc {

/// A handshake on a crosspoint egress, in the order it is logged.
struct LinkEvent {
  Cycle cycle = 0;
  Channel channel = Channel::AW;
  std::string_view src;
  std::string_view dst;
  std::uint32_t id = 0;
  std::uint32_t beat = 0;
  bool last = true;
};

class EventObserver {
 public:
  virtual ~EventObserver() = default;
  virtual void on_event(const LinkEvent& e) = 0;
};

/// One AXI link between a manager side and a subordinate side. Requests
/// (AW, W, AR) travel `from` -> `to`, responses (B, R) travel back.
struct Connection {
  std::string from;
  std::string to;
  Lane<AddressHeader> aw;
  Lane<Beat> w;
  Lane<WriteResponse> b;
  Lane<AddressHeader> ar;
  Lane<Beat> r;

  Connection(std::string from_name, std::string to_name, std::size_t fifo_depth, ChannelMask slices);

  std::uint64_t transfers(Channel ch) const;
};

/// Translates (ingress port, incoming id) pairs to ids unique on one egress
/// link. An entry lives while it has in-flight transactions; the lowest free
/// id is handed out first.
class IdRemapper {
 public:
  struct Origin {
    int ingress = -1;
    std::uint32_t id = 0;
  };

  explicit IdRemapper(unsigned id_width = 1);

  bool can_acquire(int ingress, std::uint32_t id) const;
  /// Returns the outbound id and counts one more in-flight transaction, or
  /// nullopt when every outbound id is taken by another pair.
  std::optional<std::uint32_t> acquire(int ingress, std::uint32_t id);
  /// Origin of an outbound id. Throws EngineError if the id is not in use.
  Origin lookup(std::uint32_t outbound) const;
  /// One transaction on `outbound` completed. The entry is freed at zero.
  void release(std::uint32_t outbound);

  std::size_t entries_in_use() const { return by_outbound_.size(); }
  std::uint32_t in_flight(std::uint32_t outbound) const;
  std::uint64_t capacity() const { return capacity_; }

 private:
  struct Entry {
    Origin origin;
    std::uint32_t in_flight = 0;
  };
  static std::uint64_t key(int ingress, std::uint32_t id) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ingress)) << 32) | id;
  }

  std::uint64_t capacity_;
  std::unordered_map<std::uint32_t, Entry> by_outbound_;
  std::unordered_map<std::uint64_t, std::uint32_t> by_origin_;
  std::vector<std::uint32_t> free_;  // min-heap of released ids
  std::uint32_t next_fresh_ = 0;
};

/// Round-robin arbiter. The pointer moves past a requester only when it is
/// actually granted.
class RoundRobinArbiter {
 public:
  explicit RoundRobinArbiter(int size = 0) : size_(size) {}
  /// Bit i of `requests` set means requester i is eligible. Returns -1 if none.
  int pick(std::uint32_t requests) const;
  void advance(int granted) { pointer_ = (granted + 1) % size_; }
  int pointer() const { return pointer_; }

 private:
  int size_;
  int pointer_ = 0;
};

/// Crossbar switch with per-egress ID remappers, address-based request routing
/// and path-retracing response routing.
class Crosspoint {
 public:
  /// Pseudo-egress index for requests whose address decodes nowhere.
  static constexpr int kErrorPort = kNumPorts;
  static constexpr int kTargets = kNumPorts + 1;

  Crosspoint(Coord at, const Mesh& mesh, RoutingTable table, unsigned id_width, std::uint32_t beat_bytes);

  Coord at() const { return at_; }
  /// Ingress side of `p`: requests arrive on `c`, responses leave on it.
  void attach_ingress(Port p, Connection* c) { ingress_[static_cast<std::size_t>(index(p))].link = c; }
  /// Egress side of `p`: requests leave on `c`, responses arrive on it.
  void attach_egress(Port p, Connection* c) { egress_[static_cast<std::size_t>(index(p))].link = c; }
  void set_event_log(std::ostream* log) { log_ = log; }
  void set_observer(EventObserver* observer) { observer_ = observer; }

  /// Egress for an AW/AR address, or nullopt on a decode error.
  std::optional<Port> route_request(Addr address) const { return table_.lookup(address); }

  void step(Cycle now);

  const IdRemapper& write_remapper(Port egress) const {
    return egress_[static_cast<std::size_t>(index(egress))].wr_remap;
  }
  const IdRemapper& read_remapper(Port egress) const {
    return egress_[static_cast<std::size_t>(index(egress))].rd_remap;
  }
  /// AW (Write) or AR (Read) grants handed to `ingress` at `egress`.
  std::uint64_t grants(Port egress, Port ingress, Direction dir) const;
  bool idle() const;
  /// Read payload bytes of decode-error bursts not yet answered.
  std::uint64_t pending_error_read_bytes() const;
  /// Write-data bytes already absorbed by the decode-error path.
  std::uint64_t absorbed_error_write_bytes() const { return absorbed_error_bytes_; }

 private:
  struct IdTrack {
    int target = -1;
    std::uint32_t count = 0;
  };
  struct ErrorRead {
    std::uint32_t id = 0;
    std::uint32_t beats_left = 0;
    std::uint32_t beats_sent = 0;
    std::uint64_t tag = 0;
    Cycle ready = 0;
  };
  struct ErrorWrite {
    std::uint32_t id = 0;
    std::uint64_t tag = 0;
    Cycle ready = 0;
  };
  struct Ingress {
    Connection* link = nullptr;
    std::deque<int> w_route;  // target of every granted write burst whose W beats have not passed
    std::unordered_map<std::uint32_t, IdTrack> write_ids;
    std::unordered_map<std::uint32_t, IdTrack> read_ids;
    RoundRobinArbiter b_arb{kTargets};
    RoundRobinArbiter r_arb{kTargets};
    int r_lock = -1;
    // Decode-error subordinate, answering on this port.
    std::deque<ErrorWrite> err_w;  // awaiting their W beats
    std::deque<ErrorWrite> err_b;
    std::deque<ErrorRead> err_r;
  };
  struct Egress {
    Connection* link = nullptr;
    RoundRobinArbiter aw_arb{kNumPorts};
    RoundRobinArbiter ar_arb{kNumPorts};
    std::deque<int> w_order;  // ingress owning each granted burst, in AW order
    IdRemapper wr_remap;
    IdRemapper rd_remap;
    std::array<std::uint64_t, kNumPorts> aw_grants{};
    std::array<std::uint64_t, kNumPorts> ar_grants{};
  };

  int target_of(const AddressHeader& h) const;
  bool admissible(int in, int target, Direction dir, std::uint32_t id) const;
  void grant(Cycle now, int in, int target, Direction dir);
  void forward_requests(Cycle now, Direction dir);
  void forward_write_data(Cycle now);
  void forward_write_responses(Cycle now);
  void forward_read_data(Cycle now);
  void retire(int in, Direction dir, std::uint32_t id);
  void log(Cycle now, Channel ch, const Connection& c, bool upstream, std::uint32_t id,
           std::uint32_t beat, bool last) const;

  Coord at_;
  const Mesh* mesh_;
  RoutingTable table_;
  std::array<Ingress, kNumPorts> ingress_;
  std::array<Egress, kNumPorts> egress_;
  std::uint32_t beat_bytes_;
  std::ostream* log_ = nullptr;
  EventObserver* observer_ = nullptr;
  std::uint64_t absorbed_error_bytes_ = 0;
};

}  // namespace simnoc
