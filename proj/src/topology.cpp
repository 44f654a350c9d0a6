// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/topology.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "simnoc/error.hpp"

namespace simnoc {

namespace {

std::vector<Coord> every_crosspoint(int rows, int cols) {
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.push_back({r, c});
  return out;
}

std::vector<Coord> sorted_unique(std::vector<Coord> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::uint64_t parse_hex(const std::string& tok, std::size_t line) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(tok, &pos, 16);
    if (pos != tok.size()) throw ParseError(line, "bad hex value '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(line, "bad hex value '" + tok + "'");
  }
}

int parse_int(const std::string& tok, std::size_t line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw ParseError(line, "bad integer '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(line, "bad integer '" + tok + "'");
  }
}

// Tokenized non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::vector<std::string>>> tokenize(std::istream& is) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (!toks.empty()) out.emplace_back(n, std::move(toks));
  }
  return out;
}

}  // namespace

std::vector<Coord> NocConfig::master_coords() const {
  return masters.empty() ? every_crosspoint(rows, cols) : sorted_unique(masters);
}

std::vector<Coord> NocConfig::slave_coords() const {
  return slaves.empty() ? every_crosspoint(rows, cols) : sorted_unique(slaves);
}

void NocConfig::validate() const {
  if (rows < 1) throw ConfigError("rows", "must be at least 1");
  if (cols < 1) throw ConfigError("cols", "must be at least 1");
  if (addr_width != 32 && addr_width != 64) throw ConfigError("addr_width", "must be 32 or 64");
  if (data_width < 8 || data_width > 1024 || !std::has_single_bit(data_width))
    throw ConfigError("data_width", "must be a power of two in [8, 1024]");
  if (id_width < 1 || id_width > 16) throw ConfigError("id_width", "must be in [1, 16]");
  if (max_outstanding < 1 || max_outstanding > 128)
    throw ConfigError("max_outstanding", "must be in [1, 128]");
  if (!(clock_hz > 0)) throw ConfigError("clock_hz", "must be positive");
  if (endpoint_region_bytes == 0) throw ConfigError("endpoint_region_bytes", "must be positive");
  if (endpoint_region_bytes % beat_bytes() != 0)
    throw ConfigError("endpoint_region_bytes", "must be a multiple of data_width/8");
  if (address_base % beat_bytes() != 0)
    throw ConfigError("address_base", "must be aligned to data_width/8");
  for (Coord c : masters)
    if (!contains(c)) throw ConfigError("masters", "endpoint " + to_string(c) + " outside mesh");
  for (Coord c : slaves)
    if (!contains(c)) throw ConfigError("slaves", "endpoint " + to_string(c) + " outside mesh");
  const auto n_masters = master_coords().size();
  if (n_masters > static_cast<std::size_t>(rows * cols))
    throw ConfigError("masters", "more masters than crosspoints");
  if (id_width < 64 && (std::uint64_t{1} << id_width) < n_masters)
    throw ConfigError("id_width", "2^IW < masters (" + std::to_string(n_masters) + ")");
}

Mesh::Mesh(const NocConfig& config)
    : rows_(config.rows), cols_(config.cols), connectivity_(config.connectivity) {
  config.validate();
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      if (c + 1 < cols_) links_.push_back({{r, c}, {r, c + 1}});
      if (r + 1 < rows_) links_.push_back({{r, c}, {r + 1, c}});
    }
  }
}

Mesh build_mesh(const NocConfig& config) { return Mesh(config); }

bool Mesh::has_port(Coord c, Port p) const {
  if (!contains(c)) return false;
  return p == Port::Local || neighbor(c, p).has_value();
}

int Mesh::mesh_port_count(Coord c) const {
  int n = 0;
  for (Port p : {Port::North, Port::East, Port::South, Port::West}) n += has_port(c, p) ? 1 : 0;
  return n;
}

std::optional<Coord> Mesh::neighbor(Coord c, Port p) const {
  Coord n = c;
  switch (p) {
    case Port::North: n.row -= 1; break;
    case Port::South: n.row += 1; break;
    case Port::East: n.col += 1; break;
    case Port::West: n.col -= 1; break;
    case Port::Local: return std::nullopt;
  }
  if (!contains(n)) return std::nullopt;
  return n;
}

bool Mesh::xbar_connected(Port ingress, Port egress) const {
  if (connectivity_ == Connectivity::Full) return true;
  // Request-side turns permitted by YX routing. A transfer that arrives on a
  // horizontal port is already moving along its final row.
  if (ingress == egress && ingress != Port::Local) return false;
  if (ingress == Port::Local) return true;
  if (ingress == Port::East || ingress == Port::West)
    return egress == Port::East || egress == Port::West || egress == Port::Local;
  return true;
}

std::string_view to_string(EndpointRole r) {
  switch (r) {
    case EndpointRole::Master: return "master";
    case EndpointRole::Slave: return "slave";
    case EndpointRole::Memory: return "memory";
  }
  return "?";
}

AddressMap::AddressMap(std::vector<Region> regions) : regions_(std::move(regions)) {}

const Region* AddressMap::find(Addr a) const {
  auto it = std::upper_bound(regions_.begin(), regions_.end(), a,
                             [](Addr v, const Region& r) { return v < r.base; });
  if (it == regions_.begin()) return nullptr;
  --it;
  return it->contains(a) ? &*it : nullptr;
}

const Region* AddressMap::region_of(Coord endpoint) const {
  for (const auto& r : regions_)
    if (r.endpoint == endpoint) return &r;
  return nullptr;
}

namespace {

// True when [base, base + size) does not fit below 2^addr_width.
bool exceeds_space(Addr base, std::uint64_t size, unsigned addr_width) {
  if (addr_width >= 64) return base != 0 && size > (~base + 1);
  const std::uint64_t limit = std::uint64_t{1} << addr_width;
  return base > limit || size > limit - base;
}

}  // namespace

void AddressMap::validate(unsigned addr_width) const {
  std::set<Coord> owners;
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const auto& r = regions_[i];
    if (r.size == 0) throw AddressError("region " + std::to_string(i) + " is empty");
    if (exceeds_space(r.base, r.size, addr_width))
      throw AddressError("region " + std::to_string(i) + " exceeds 2^" + std::to_string(addr_width));
    if (i > 0 && regions_[i - 1].end() > r.base)
      throw AddressError("regions " + std::to_string(i - 1) + " and " + std::to_string(i) +
                         " overlap or are unsorted");
    if (!owners.insert(r.endpoint).second)
      throw AddressError("endpoint " + to_string(r.endpoint) + " owns more than one region");
  }
}

AddressMap allocate_address_map(const NocConfig& config) {
  if (config.endpoint_region_bytes == 0)
    throw ConfigError("endpoint_region_bytes", "must be positive");
  const auto slaves = config.slave_coords();
  const std::uint64_t n = slaves.size();
  if (n > 0 && (config.endpoint_region_bytes > ~std::uint64_t{0} / n ||
                exceeds_space(config.address_base, config.endpoint_region_bytes * n, config.addr_width)))
    throw AddressError("address map of " + std::to_string(n) + " regions of " +
                       std::to_string(config.endpoint_region_bytes) + " bytes exceeds the " +
                       std::to_string(config.addr_width) + "-bit space");
  std::vector<Region> regions;
  regions.reserve(slaves.size());
  Addr base = config.address_base;
  for (Coord s : slaves) {
    regions.push_back({base, config.endpoint_region_bytes, s, EndpointRole::Slave});
    base += config.endpoint_region_bytes;
  }
  return AddressMap(std::move(regions));
}

std::vector<Port> yx_route(Coord src, Coord dst) {
  std::vector<Port> out;
  out.reserve(static_cast<std::size_t>(manhattan(src, dst) + 1));
  for (int r = src.row; r != dst.row; r += (dst.row > r ? 1 : -1))
    out.push_back(dst.row > r ? Port::South : Port::North);
  for (int c = src.col; c != dst.col; c += (dst.col > c ? 1 : -1))
    out.push_back(dst.col > c ? Port::East : Port::West);
  out.push_back(Port::Local);
  return out;
}

RoutingTable::RoutingTable(Coord at, std::vector<RouteEntry> entries)
    : at_(at), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const RouteEntry& a, const RouteEntry& b) { return a.base < b.base; });
}

std::optional<Port> RoutingTable::lookup(Addr a) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), a,
                             [](Addr v, const RouteEntry& e) { return v < e.base; });
  if (it == entries_.begin()) return std::nullopt;
  --it;
  if (a - it->base < it->size) return it->port;
  return std::nullopt;
}

std::vector<RoutingTable> generate_routing_tables(const Mesh& mesh, const AddressMap& map, bool coalesce) {
  for (const auto& r : map.regions())
    if (!mesh.contains(r.endpoint))
      throw AddressError("region at " + hex(r.base) + " has no owning endpoint in the mesh (" +
                         to_string(r.endpoint) + ")");
  std::vector<RoutingTable> tables;
  tables.reserve(static_cast<std::size_t>(mesh.num_crosspoints()));
  for (int i = 0; i < mesh.num_crosspoints(); ++i) {
    const Coord at = mesh.coord_of(i);
    std::vector<RouteEntry> entries;
    for (const auto& r : map.regions()) {
      const Port first = yx_route(at, r.endpoint).front();
      if (coalesce && !entries.empty() && entries.back().port == first && entries.back().end() == r.base) {
        entries.back().size += r.size;
      } else {
        entries.push_back({r.base, r.size, first});
      }
    }
    tables.emplace_back(at, std::move(entries));
  }
  return tables;
}

TableWalk walk_tables(const Mesh& mesh, std::span<const RoutingTable> tables, Coord src, Addr addr) {
  TableWalk walk;
  Coord at = src;
  const int limit = mesh.num_crosspoints() + 1;
  for (int step = 0; step < limit; ++step) {
    walk.crosspoints.push_back(at);
    const auto port = tables[static_cast<std::size_t>(mesh.index_of(at))].lookup(addr);
    if (!port) return walk;
    walk.ports.push_back(*port);
    if (*port == Port::Local) {
      walk.reached_local = true;
      return walk;
    }
    const auto next = mesh.neighbor(at, *port);
    if (!next) return walk;
    at = *next;
  }
  return walk;
}

namespace {

// Dependency graph whose vertices are directed inter-crosspoint channels.
class DependencyGraph {
 public:
  int vertex(const DirectedLink& l) {
    const auto key = std::make_pair(l.from, l.to);
    auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(links_.size()));
    if (inserted) {
      links_.push_back(l);
      adj_.emplace_back();
    }
    return it->second;
  }

  void add_path(const std::vector<DirectedLink>& path) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const int a = vertex(path[i]);
      const int b = vertex(path[i + 1]);
      adj_[static_cast<std::size_t>(a)].insert(b);
    }
    if (path.size() == 1) vertex(path.front());
  }

  // Iterative three-colour DFS. Returns the first cycle found.
  std::vector<DirectedLink> find_cycle() const {
    const std::size_t n = links_.size();
    std::vector<int> colour(n, 0);
    std::vector<int> parent(n, -1);
    for (std::size_t root = 0; root < n; ++root) {
      if (colour[root] != 0) continue;
      std::vector<std::pair<int, std::set<int>::const_iterator>> stack;
      colour[root] = 1;
      stack.emplace_back(static_cast<int>(root), adj_[root].begin());
      while (!stack.empty()) {
        auto& [v, it] = stack.back();
        if (it == adj_[static_cast<std::size_t>(v)].end()) {
          colour[static_cast<std::size_t>(v)] = 2;
          stack.pop_back();
          continue;
        }
        const int w = *it++;
        if (colour[static_cast<std::size_t>(w)] == 1) {
          std::vector<DirectedLink> cycle;
          for (int x = v; x != w; x = parent[static_cast<std::size_t>(x)])
            cycle.push_back(links_[static_cast<std::size_t>(x)]);
          cycle.push_back(links_[static_cast<std::size_t>(w)]);
          std::reverse(cycle.begin(), cycle.end());
          return cycle;
        }
        if (colour[static_cast<std::size_t>(w)] == 0) {
          colour[static_cast<std::size_t>(w)] = 1;
          parent[static_cast<std::size_t>(w)] = v;
          stack.emplace_back(w, adj_[static_cast<std::size_t>(w)].begin());
        }
      }
    }
    return {};
  }

 private:
  std::map<std::pair<Coord, Coord>, int> ids_;
  std::vector<DirectedLink> links_;
  std::vector<std::set<int>> adj_;
};

}  // namespace

DeadlockVerdict check_deadlock_freedom(const Mesh& mesh, std::span<const RoutingTable> tables) {
  DependencyGraph request;
  DependencyGraph response;
  for (int i = 0; i < mesh.num_crosspoints(); ++i) {
    const Coord src = mesh.coord_of(i);
    const auto& own = tables[static_cast<std::size_t>(i)];
    for (const auto& entry : own.entries()) {
      const auto walk = walk_tables(mesh, tables, src, entry.base);
      std::vector<DirectedLink> path;
      for (std::size_t h = 0; h + 1 < walk.crosspoints.size(); ++h)
        path.push_back({walk.crosspoints[h], walk.crosspoints[h + 1]});
      request.add_path(path);
      std::vector<DirectedLink> back;
      for (auto it = path.rbegin(); it != path.rend(); ++it) back.push_back({it->to, it->from});
      response.add_path(back);
    }
  }
  DeadlockVerdict verdict;
  if (auto cycle = request.find_cycle(); !cycle.empty()) {
    verdict.acyclic = false;
    verdict.network = "request";
    verdict.witness = std::move(cycle);
  } else if (auto rcycle = response.find_cycle(); !rcycle.empty()) {
    verdict.acyclic = false;
    verdict.network = "response";
    verdict.witness = std::move(rcycle);
  }
  return verdict;
}

void write_address_map(std::ostream& os, const AddressMap& map) {
  for (const auto& r : map.regions())
    os << "region " << hex(r.base) << ' ' << hex(r.size) << ' ' << r.endpoint.row << ' ' << r.endpoint.col
       << ' ' << to_string(r.role) << '\n';
}

void write_routing_tables(std::ostream& os, std::span<const RoutingTable> tables) {
  for (const auto& t : tables)
    for (const auto& e : t.entries())
      os << "route " << t.at().row << ' ' << t.at().col << ' ' << hex(e.base) << ' ' << hex(e.size) << ' '
         << to_string(e.port) << '\n';
}

AddressMap read_address_map(std::istream& is) {
  std::vector<Region> regions;
  for (auto& [line, toks] : tokenize(is)) {
    if (toks[0] != "region") continue;
    if (toks.size() != 6) throw ParseError(line, "expected: region <base> <size> <row> <col> <role>");
    Region r;
    r.base = parse_hex(toks[1], line);
    r.size = parse_hex(toks[2], line);
    r.endpoint = {parse_int(toks[3], line), parse_int(toks[4], line)};
    if (toks[5] == "master") r.role = EndpointRole::Master;
    else if (toks[5] == "slave") r.role = EndpointRole::Slave;
    else if (toks[5] == "memory") r.role = EndpointRole::Memory;
    else throw ParseError(line, "unknown role '" + toks[5] + "'");
    regions.push_back(r);
  }
  return AddressMap(std::move(regions));
}

std::vector<RoutingTable> read_routing_tables(std::istream& is, int rows, int cols) {
  std::vector<std::vector<RouteEntry>> per(static_cast<std::size_t>(rows * cols));
  for (auto& [line, toks] : tokenize(is)) {
    if (toks[0] != "route") continue;
    if (toks.size() != 6) throw ParseError(line, "expected: route <row> <col> <base> <size> <port>");
    const Coord at{parse_int(toks[1], line), parse_int(toks[2], line)};
    if (at.row < 0 || at.row >= rows || at.col < 0 || at.col >= cols)
      throw ParseError(line, "crosspoint " + to_string(at) + " outside mesh");
    const auto port = parse_port(toks[5]);
    if (!port) throw ParseError(line, "unknown port '" + toks[5] + "'");
    per[static_cast<std::size_t>(at.row * cols + at.col)].push_back(
        {parse_hex(toks[3], line), parse_hex(toks[4], line), *port});
  }
  std::vector<RoutingTable> tables;
  for (int i = 0; i < rows * cols; ++i)
    tables.emplace_back(Coord{i / cols, i % cols}, std::move(per[static_cast<std::size_t>(i)]));
  return tables;
}

}  // namespace simnoc
