// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simnoc/types.hpp"

namespace simnoc {

enum class Connectivity : std::uint8_t { Partial, Full };

/// Design-time parameters of a 2D mesh.
struct NocConfig {
  int rows = 4;
  int cols = 4;
  unsigned addr_width = 32;
  unsigned data_width = 32;
  unsigned id_width = 4;
  unsigned max_outstanding = 8;
  Connectivity connectivity = Connectivity::Partial;
  ChannelMask register_slice = ChannelMask::all();
  double clock_hz = 1e9;
  std::uint64_t endpoint_region_bytes = 1u << 20;
  Addr address_base = 0;
  // Empty means one endpoint on every crosspoint.
  std::vector<Coord> masters;
  std::vector<Coord> slaves;

  std::uint32_t beat_bytes() const { return data_width / 8; }
  int num_crosspoints() const { return rows * cols; }
  bool contains(Coord c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }

  /// Master coordinates in row-major order (resolving the empty default).
  std::vector<Coord> master_coords() const;
  /// Slave coordinates in row-major order (resolving the empty default).
  std::vector<Coord> slave_coords() const;

  /// Throws ConfigError naming the first field that breaks an invariant.
  void validate() const;

  bool operator==(const NocConfig&) const = default;
};

struct MeshLink {
  Coord a;  // a < b in row-major order
  Coord b;
};

/// Grid of crosspoints with NESW links. Port count depends on position.
class Mesh {
 public:
  explicit Mesh(const NocConfig& config);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_crosspoints() const { return rows_ * cols_; }
  Connectivity connectivity() const { return connectivity_; }

  int index_of(Coord c) const { return c.row * cols_ + c.col; }
  Coord coord_of(int index) const { return {index / cols_, index % cols_}; }
  bool contains(Coord c) const { return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_; }

  bool has_port(Coord c, Port p) const;
  /// Number of mesh-facing ports (2, 3 or 4 on meshes of at least 2x2).
  int mesh_port_count(Coord c) const;
  std::optional<Coord> neighbor(Coord c, Port p) const;
  /// Undirected inter-crosspoint links.
  const std::vector<MeshLink>& links() const { return links_; }

  /// Whether the crossbar at a crosspoint wires `ingress` to `egress`.
  bool xbar_connected(Port ingress, Port egress) const;

 private:
  int rows_;
  int cols_;
  Connectivity connectivity_;
  std::vector<MeshLink> links_;
};

Mesh build_mesh(const NocConfig& config);

enum class EndpointRole : std::uint8_t { Master, Slave, Memory };
std::string_view to_string(EndpointRole r);

struct Region {
  Addr base = 0;
  std::uint64_t size = 0;
  Coord endpoint;
  EndpointRole role = EndpointRole::Slave;

  Addr end() const { return base + size; }
  bool contains(Addr a) const { return a >= base && a - base < size; }
  bool operator==(const Region&) const = default;
};

/// Disjoint slave regions sorted by base address.
class AddressMap {
 public:
  AddressMap() = default;
  explicit AddressMap(std::vector<Region> regions);

  const std::vector<Region>& regions() const { return regions_; }
  const Region* find(Addr a) const;
  const Region* region_of(Coord endpoint) const;

  /// Throws AddressError on overlap, bad ordering or overflow past 2^addr_width.
  void validate(unsigned addr_width) const;

  bool operator==(const AddressMap&) const = default;

 private:
  std::vector<Region> regions_;
};

/// Row-major contiguous layout of uniform regions starting at config.address_base.
AddressMap allocate_address_map(const NocConfig& config);

/// Egress ports from `src` to `dst`: rows first, then columns, then Local.
std::vector<Port> yx_route(Coord src, Coord dst);

struct RouteEntry {
  Addr base = 0;
  std::uint64_t size = 0;
  Port port = Port::Local;

  Addr end() const { return base + size; }
  bool operator==(const RouteEntry&) const = default;
};

class RoutingTable {
 public:
  RoutingTable() = default;
  RoutingTable(Coord at, std::vector<RouteEntry> entries);

  Coord at() const { return at_; }
  const std::vector<RouteEntry>& entries() const { return entries_; }
  std::optional<Port> lookup(Addr a) const;

  bool operator==(const RoutingTable&) const = default;

 private:
  Coord at_;
  std::vector<RouteEntry> entries_;  // sorted, disjoint
};

/// One table per crosspoint in row-major order. Each entry names the first
/// YX hop toward the region's endpoint. `coalesce` merges adjacent ranges
/// sharing an egress port.
std::vector<RoutingTable> generate_routing_tables(const Mesh& mesh, const AddressMap& map,
                                                  bool coalesce = false);

/// Result of following table entries hop by hop from a crosspoint.
struct TableWalk {
  std::vector<Coord> crosspoints;  // starts at the source, ends where Local was chosen
  std::vector<Port> ports;         // egress port taken at each crosspoint
  bool reached_local = false;
};

/// Follows the tables for `addr` from `src`. Stops after rows*cols hops so a
/// looping table terminates. Unroutable addresses stop with reached_local=false.
TableWalk walk_tables(const Mesh& mesh, std::span<const RoutingTable> tables, Coord src, Addr addr);

struct DirectedLink {
  Coord from;
  Coord to;
  bool operator==(const DirectedLink&) const = default;
};

struct DeadlockVerdict {
  bool acyclic = true;
  std::string network;                // "request" or "response" when cyclic
  std::vector<DirectedLink> witness;  // channels forming the dependency cycle
};

/// Channel-dependency-graph check over every routed path, separately for the
/// request network and the (path-reversing) response network.
DeadlockVerdict check_deadlock_freedom(const Mesh& mesh, std::span<const RoutingTable> tables);

// Line-based text formats.
//   region <base-hex> <size-hex> <row> <col> <role>
//   route <row> <col> <base-hex> <size-hex> <port>
void write_address_map(std::ostream& os, const AddressMap& map);
void write_routing_tables(std::ostream& os, std::span<const RoutingTable> tables);
AddressMap read_address_map(std::istream& is);
/// Tables are returned in row-major order for a rows x cols mesh.
std::vector<RoutingTable> read_routing_tables(std::istream& is, int rows, int cols);

}  // namespace simnoc
