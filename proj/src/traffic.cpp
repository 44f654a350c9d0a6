// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "simnoc/error.hpp"

namespace simnoc {

namespace {

constexpr std::pair<TrafficKind, std::string_view> kKindNames[] = {
    {TrafficKind::UniformRandom, "uniform_random"},
    {TrafficKind::AllGlobal, "all_global"},
    {TrafficKind::MaxTwoHop, "max_two_hop"},
    {TrafficKind::MaxSingleHop, "max_single_hop"},
    {TrafficKind::DnnTraining, "dnn_training"},
    {TrafficKind::DnnParallelConv, "dnn_parallel_conv"},
    {TrafficKind::DnnPipelinedConv, "dnn_pipelined_conv"},
    {TrafficKind::TraceReplay, "trace_replay"},
};

std::uint64_t round_up(std::uint64_t v, std::uint64_t m) { return (v + m - 1) / m * m; }

std::string hex(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

}  // namespace

std::string_view to_string(TrafficKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<TrafficKind> parse_traffic_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

bool is_dnn(TrafficKind k) {
  return k == TrafficKind::DnnTraining || k == TrafficKind::DnnParallelConv || k == TrafficKind::DnnPipelinedConv;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void TrafficSpec::validate(const NocConfig& cfg) const {
  if (!(injected_load >= 0.0 && injected_load <= 1.0)) throw ConfigError("injected_load", "must lie in [0, 1]");
  if (!(write_fraction >= 0.0 && write_fraction <= 1.0)) throw ConfigError("write_fraction", "must lie in [0, 1]");
  if (kind == TrafficKind::TraceReplay) {
    if (trace_path.empty()) throw ConfigError("trace_path", "required for trace_replay");
    return;
  }
  if (min_bytes < cfg.beat_bytes())
    throw ConfigError("min_bytes", "must be at least one beat (" + std::to_string(cfg.beat_bytes()) + " bytes)");
  if (max_bytes < min_bytes) throw ConfigError("max_bytes", "must not be below min_bytes");
  if (max_bytes > cfg.endpoint_region_bytes) throw ConfigError("max_bytes", "exceeds endpoint_region_bytes");
  if (!(channel_shrink >= 0.0 && channel_shrink < 1.0)) throw ConfigError("channel_shrink", "must lie in [0, 1)");
  if (iterations == 0) throw ConfigError("iterations", "must be positive");
  if (kind == TrafficKind::AllGlobal && !cfg.contains(global_slave))
    throw ConfigError("global_slave", to_string(global_slave) + " lies outside the mesh");
  if (is_dnn(kind) && !cfg.contains(l2)) throw ConfigError("l2", to_string(l2) + " lies outside the mesh");
}

// ---------------------------------------------------------------------------
// Layer tables

namespace {

struct ConvShape {
  std::string name;
  std::uint64_t in_hw, in_c, out_hw, out_c, k;
};

std::vector<LayerSize> size_layers(const std::vector<ConvShape>& shapes, std::uint64_t elem) {
  std::vector<LayerSize> out;
  for (const auto& s : shapes) {
    out.push_back({s.name, round_up(s.in_hw * s.in_hw * s.in_c * elem, 64),
                   round_up(s.out_hw * s.out_hw * s.out_c * elem, 64),
                   round_up(s.k * s.k * s.in_c * s.out_c * elem, 64)});
  }
  return out;
}

}  // namespace

std::vector<LayerSize> resnet34_layers(double channel_shrink) {
  auto ch = [&](std::uint64_t c) {
    const auto kept = std::llround(static_cast<double>(c) * (1.0 - channel_shrink));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(kept));
  };
  std::vector<ConvShape> shapes;
  shapes.push_back({"conv1", 224, 3, 112, ch(64), 7});
  const std::uint64_t widths[] = {64, 128, 256, 512};
  const int blocks[] = {3, 4, 6, 3};
  std::uint64_t hw = 56;
  std::uint64_t prev = ch(64);
  for (int stage = 0; stage < 4; ++stage) {
    const std::uint64_t c = ch(widths[stage]);
    for (int b = 0; b < blocks[stage]; ++b) {
      const std::string base = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      const bool down = stage > 0 && b == 0;
      const std::uint64_t in_hw = down ? hw * 2 : hw;
      shapes.push_back({base + ".conv1", in_hw, prev, hw, c, 3});
      shapes.push_back({base + ".conv2", hw, c, hw, c, 3});
      if (down) shapes.push_back({base + ".downsample", in_hw, prev, hw, c, 1});
      prev = c;
    }
    if (stage < 3) hw /= 2;
  }
  shapes.push_back({"fc", 1, prev, 1, 1000, 1});
  return size_layers(shapes, 2);
}

std::vector<LayerSize> tiled_cnn_layers() {
  // Pooling is fused into the preceding convolution.
  const std::vector<ConvShape> shapes = {
      {"conv1_1", 224, 3, 224, 64, 3},   {"conv1_2", 224, 64, 112, 64, 3},  {"conv2_1", 112, 64, 112, 128, 3},
      {"conv2_2", 112, 128, 56, 128, 3}, {"conv3_1", 56, 128, 56, 256, 3},  {"conv3_2", 56, 256, 56, 256, 3},
      {"conv3_3", 56, 256, 28, 256, 3},  {"conv4_1", 28, 256, 28, 512, 3},  {"conv4_2", 28, 512, 28, 512, 3},
      {"conv4_3", 28, 512, 14, 512, 3},  {"conv5_1", 14, 512, 14, 512, 3},  {"conv5_2", 14, 512, 14, 512, 3},
      {"conv5_3", 14, 512, 7, 512, 3},   {"fc6", 7, 512, 1, 4096, 7},       {"fc7", 1, 4096, 1, 4096, 1},
      {"fc8", 1, 4096, 1, 1000, 1},
  };
  return size_layers(shapes, 1);
}

std::vector<LayerSize> read_layer_table(std::istream& is) {
  std::vector<LayerSize> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "layer,in_bytes,out_bytes,weight_bytes")
        throw ParseError(lineno, "expected header layer,in_bytes,out_bytes,weight_bytes");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) throw ParseError(lineno, "expected 4 comma-separated fields");
    LayerSize l{f[0], 0, 0, 0};
    std::uint64_t* dst[] = {&l.in_bytes, &l.out_bytes, &l.weight_bytes};
    for (int i = 0; i < 3; ++i) {
      const auto& s = f[static_cast<std::size_t>(i + 1)];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *dst[i]);
      if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(lineno, "bad byte count '" + s + "'");
    }
    out.push_back(std::move(l));
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  return out;
}

void write_layer_table(std::ostream& os, const std::vector<LayerSize>& layers) {
  os << "layer,in_bytes,out_bytes,weight_bytes\n";
  for (const auto& l : layers)
    os << l.layer << ',' << l.in_bytes << ',' << l.out_bytes << ',' << l.weight_bytes << '\n';
}

// ---------------------------------------------------------------------------
// Destination sets

std::vector<std::vector<Coord>> destination_sets(const TrafficSpec& spec, const NocConfig& cfg) {
  const auto masters = cfg.master_coords();
  const auto slaves = cfg.slave_coords();
  auto is_slave = [&](Coord c) { return std::find(slaves.begin(), slaves.end(), c) != slaves.end(); };

  std::vector<Coord> pool;
  int bound = 0;
  bool allow_self = true;
  switch (spec.kind) {
    case TrafficKind::UniformRandom:
      pool = slaves;
      bound = cfg.rows + cfg.cols;
      allow_self = false;
      break;
    case TrafficKind::AllGlobal:
      if (!is_slave(spec.global_slave))
        throw ConfigError("global_slave", "no slave endpoint at " + to_string(spec.global_slave));
      pool = {spec.global_slave};
      bound = cfg.rows + cfg.cols;
      break;
    case TrafficKind::MaxTwoHop:
      pool = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
      bound = 2;
      break;
    case TrafficKind::MaxSingleHop:
      pool = {{0, 1}, {0, 2}, {1, 0}, {1, 3}, {2, 0}, {2, 3}, {3, 1}, {3, 2}};
      bound = 1;
      break;
    default:
      return std::vector<std::vector<Coord>>(masters.size());
  }
  for (Coord c : pool)
    if (!cfg.contains(c) || !is_slave(c))
      throw ConfigError("kind", std::string(to_string(spec.kind)) + " needs a slave at " + to_string(c));

  std::vector<std::vector<Coord>> sets;
  for (Coord m : masters) {
    std::vector<Coord> s;
    for (Coord c : pool)
      if (manhattan(m, c) <= bound && (allow_self || c != m)) s.push_back(c);
    if (s.empty())
      throw ConfigError("kind", "master " + to_string(m) + " has no destination under " +
                                    std::string(to_string(spec.kind)));
    sets.push_back(std::move(s));
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Sources

namespace {

/// Poisson arrivals per master with uniform destination and size draws.
class PoissonSource : public TrafficSource {
 public:
  PoissonSource(const TrafficSpec& spec, const NocConfig& cfg)
      : spec_(spec), beat_(cfg.beat_bytes()), id_mask_((std::uint64_t{1} << cfg.id_width) - 1) {
    const auto map = allocate_address_map(cfg);
    const auto masters = cfg.master_coords();
    dests_ = destination_sets(spec, cfg);
    lo_beats_ = (spec.min_bytes + beat_ - 1) / beat_;
    hi_beats_ = std::max(lo_beats_, spec.max_bytes / beat_);
    const double mean_bytes = static_cast<double>(beat_) * static_cast<double>(lo_beats_ + hi_beats_) / 2.0;
    rate_ = spec.injected_load * beat_ / mean_bytes;
    for (std::size_t i = 0; i < masters.size(); ++i) {
      Stream s;
      s.master = masters[i];
      s.rng.seed(mix_seed(spec.seed, i));
      for (Coord d : dests_[i]) s.regions.push_back(*map.region_of(d));
      s.id = static_cast<std::uint32_t>(i & id_mask_);
      streams_.push_back(std::move(s));
      advance(streams_.back());
    }
  }

  const TransferRequest* peek(std::size_t master) override {
    const auto& s = streams_[master];
    return s.next ? &*s.next : nullptr;
  }
  void pop(std::size_t master) override { advance(streams_[master]); }

 private:
  struct Stream {
    Coord master;
    std::mt19937_64 rng;
    double t = 0.0;
    std::vector<Region> regions;
    std::uint32_t id = 0;
    std::optional<TransferRequest> next;
  };

  void advance(Stream& s) {
    if (rate_ <= 0.0) {
      s.next.reset();
      return;
    }
    s.t += std::exponential_distribution<double>(rate_)(s.rng);
    const Region& r = s.regions[std::uniform_int_distribution<std::size_t>(0, s.regions.size() - 1)(s.rng)];
    const bool write = std::bernoulli_distribution(spec_.write_fraction)(s.rng);
    const std::uint64_t beats = std::uniform_int_distribution<std::uint64_t>(lo_beats_, hi_beats_)(s.rng);
    const std::uint64_t bytes = beats * beat_;
    const std::uint64_t slots = (r.size - bytes) / beat_;
    const std::uint64_t offset = std::uniform_int_distribution<std::uint64_t>(0, slots)(s.rng) * beat_;
    s.next = TransferRequest{static_cast<Cycle>(s.t), s.master, write ? Direction::Write : Direction::Read,
                             r.base + offset, bytes, s.id};
  }

  TrafficSpec spec_;
  std::uint64_t beat_;
  std::uint64_t id_mask_;
  std::vector<std::vector<Coord>> dests_;
  std::uint64_t lo_beats_ = 1;
  std::uint64_t hi_beats_ = 1;
  double rate_ = 0.0;
  std::vector<Stream> streams_;
};

}  // namespace

ListSource::ListSource(std::vector<std::vector<TransferRequest>> per_master)
    : lists_(std::move(per_master)), pos_(lists_.size(), 0) {}

const TransferRequest* ListSource::peek(std::size_t master) {
  if (master >= lists_.size() || pos_[master] >= lists_[master].size()) return nullptr;
  return &lists_[master][pos_[master]];
}

void ListSource::pop(std::size_t master) {
  if (peek(master) != nullptr) ++pos_[master];
}

std::size_t ListSource::remaining() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < lists_.size(); ++i) n += lists_[i].size() - pos_[i];
  return n;
}

// ---------------------------------------------------------------------------
// DNN workloads

namespace {

/// Appends DMA commands for one logical copy, chunked and paced per master.
class StreamBuilder {
 public:
  StreamBuilder(const TrafficSpec& spec, const NocConfig& cfg, const AddressMap& map)
      : cfg_(&cfg), map_(&map), beat_(cfg.beat_bytes()), id_mask_((std::uint64_t{1} << cfg.id_width) - 1) {
    chunk_ = std::max<std::uint64_t>(beat_, spec.max_bytes / beat_ * beat_);
    rate_ = spec.injected_load * beat_;
    const auto masters = cfg.master_coords();
    lists_.resize(masters.size());
    sent_.resize(masters.size(), 0);
    cursor_.resize(masters.size());
    masters_ = masters;
  }

  void copy(std::size_t master, Direction dir, Coord target, std::uint64_t bytes) {
    if (rate_ <= 0.0 || bytes == 0) return;
    const Region* r = map_->region_of(target);
    if (r == nullptr) throw ConfigError("l2", "no memory endpoint at " + to_string(target));
    std::uint64_t left = round_up(bytes, beat_);
    while (left > 0) {
      const std::uint64_t n = std::min(left, chunk_);
      Addr& cur = cursor_[master][target];
      if (cur + n > r->size) cur = 0;
      const auto issue = static_cast<Cycle>(std::floor(static_cast<double>(sent_[master]) / rate_));
      lists_[master].push_back({issue, masters_[master], dir, r->base + cur, n,
                                static_cast<std::uint32_t>(master & id_mask_)});
      cur += n;
      sent_[master] += n;
      left -= n;
    }
  }

  std::vector<std::vector<TransferRequest>> take() { return std::move(lists_); }

 private:
  const NocConfig* cfg_;
  const AddressMap* map_;
  std::uint64_t beat_;
  std::uint64_t id_mask_;
  std::uint64_t chunk_ = 0;
  double rate_ = 0.0;
  std::vector<Coord> masters_;
  std::vector<std::vector<TransferRequest>> lists_;
  std::vector<std::uint64_t> sent_;
  std::vector<std::map<Coord, Addr>> cursor_;
};

std::vector<LayerSize> load_layers(const TrafficSpec& spec, bool training) {
  if (spec.layer_table.empty()) return training ? resnet34_layers(spec.channel_shrink) : tiled_cnn_layers();
  std::ifstream in(spec.layer_table);
  if (!in) throw ConfigError("layer_table", "cannot open " + spec.layer_table);
  auto layers = read_layer_table(in);
  if (layers.empty()) throw ConfigError("layer_table", spec.layer_table + " has no layers");
  return layers;
}

}  // namespace

std::vector<std::vector<TransferRequest>> dnn_streams(const TrafficSpec& spec, const NocConfig& cfg) {
  if (!is_dnn(spec.kind)) throw ConfigError("kind", "not a DNN workload");
  spec.validate(cfg);
  const auto map = allocate_address_map(cfg);
  if (map.region_of(spec.l2) == nullptr) throw ConfigError("l2", "no memory endpoint at " + to_string(spec.l2));
  const auto cores = cfg.master_coords();
  const std::size_t n = cores.size();
  for (Coord c : cores)
    if (map.region_of(c) == nullptr && spec.kind != TrafficKind::DnnParallelConv)
      throw ConfigError("slaves", "core " + to_string(c) + " has no local memory endpoint");

  const auto layers = load_layers(spec, spec.kind == TrafficKind::DnnTraining);
  StreamBuilder b(spec, cfg, map);
  for (unsigned it = 0; it < spec.iterations; ++it) {
    switch (spec.kind) {
      case TrafficKind::DnnTraining:
        for (const auto& l : layers)
          for (std::size_t c = 0; c < n; ++c) {
            b.copy(c, Direction::Read, spec.l2, l.weight_bytes);
            b.copy(c, Direction::Write, spec.l2, l.out_bytes);
            if (spec.gradient_exchange) b.copy(c, Direction::Write, cores[(c + 1) % n], l.weight_bytes);
          }
        break;
      case TrafficKind::DnnParallelConv:
        for (const auto& l : layers)
          for (std::size_t c = 0; c < n; ++c) {
            b.copy(c, Direction::Read, spec.l2, (l.in_bytes + n - 1) / n);
            b.copy(c, Direction::Write, spec.l2, (l.out_bytes + n - 1) / n);
          }
        break;
      default:
        for (std::size_t i = 0; i < layers.size(); ++i) {
          const std::size_t c = i % n;
          if (i == 0) b.copy(c, Direction::Read, spec.l2, layers[i].in_bytes);
          const Coord next = i + 1 == layers.size() ? spec.l2 : cores[(c + 1) % n];
          b.copy(c, Direction::Write, next, layers[i].out_bytes);
        }
        break;
    }
  }
  return b.take();
}

std::unique_ptr<TrafficSource> make_traffic(const TrafficSpec& spec, const NocConfig& cfg) {
  spec.validate(cfg);
  if (spec.kind == TrafficKind::TraceReplay) {
    std::ifstream in(spec.trace_path);
    if (!in) throw ConfigError("trace_path", "cannot open " + spec.trace_path);
    auto records = read_trace(in);
    validate_trace(records, cfg);
    return std::make_unique<ListSource>(split_by_master(records, cfg));
  }
  if (is_dnn(spec.kind)) return std::make_unique<ListSource>(dnn_streams(spec, cfg));
  return std::make_unique<PoissonSource>(spec, cfg);
}

std::vector<TraceRecord> materialize(TrafficSource& source, std::size_t num_masters, Cycle horizon) {
  std::vector<TraceRecord> out;
  for (std::size_t i = 0; i < num_masters; ++i) {
    while (const TransferRequest* r = source.peek(i)) {
      if (r->issue_cycle >= horizon) break;
      out.push_back(*r);
      source.pop(i);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.issue_cycle < b.issue_cycle; });
  return out;
}

// ---------------------------------------------------------------------------
// Trace files

void write_trace(std::ostream& os, const std::vector<TraceRecord>& records) {
  os << "# cycle row col dir addr bytes id\n";
  for (const auto& r : records)
    os << r.issue_cycle << ' ' << r.master.row << ' ' << r.master.col << ' ' << to_string(r.direction) << ' '
       << hex(r.base_address) << ' ' << r.total_bytes << ' ' << r.id << '\n';
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t line, const char* what, int base = 10) {
  if (base == 16 && (s.starts_with("0x") || s.starts_with("0X"))) s.remove_prefix(2);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<TraceRecord> read_trace(std::istream& is) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(tok);
    if (f.size() != 7) throw ParseError(lineno, "expected 7 fields, got " + std::to_string(f.size()));
    TraceRecord r;
    r.issue_cycle = parse_field<Cycle>(f[0], lineno, "cycle");
    r.master.row = parse_field<int>(f[1], lineno, "row");
    r.master.col = parse_field<int>(f[2], lineno, "col");
    const auto dir = parse_direction(f[3]);
    if (!dir) throw ParseError(lineno, "bad direction '" + f[3] + "'");
    r.direction = *dir;
    r.base_address = parse_field<Addr>(f[4], lineno, "address", 16);
    r.total_bytes = parse_field<std::uint64_t>(f[5], lineno, "byte count");
    r.id = parse_field<std::uint32_t>(f[6], lineno, "id");
    out.push_back(r);
  }
  return out;
}

void validate_trace(const std::vector<TraceRecord>& records, const NocConfig& cfg) {
  const auto map = allocate_address_map(cfg);
  const auto masters = cfg.master_coords();
  const std::uint32_t beat = cfg.beat_bytes();
  std::map<Coord, Cycle> last_cycle;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto fail = [&](const std::string& why) {
      throw ValidationError("trace record " + std::to_string(i) + " (cycle " + std::to_string(r.issue_cycle) +
                            ", master " + to_string(r.master) + "): " + why);
    };
    if (!cfg.contains(r.master)) fail("coordinate outside the mesh");
    if (std::find(masters.begin(), masters.end(), r.master) == masters.end()) fail("no master endpoint there");
    if (r.id >= (std::uint64_t{1} << cfg.id_width)) fail("id exceeds id_width");
    if (r.total_bytes == 0 || r.total_bytes % beat != 0) fail("size is not a whole number of beats");
    if (r.base_address % beat != 0) fail("address not beat-aligned");
    const Region* reg = map.find(r.base_address);
    if (reg == nullptr || r.total_bytes > reg->end() - r.base_address)
      fail("addresses unmapped region at " + hex(r.base_address));
    auto [it, fresh] = last_cycle.emplace(r.master, r.issue_cycle);
    if (!fresh) {
      if (r.issue_cycle < it->second) fail("issue cycle decreases for this master");
      it->second = r.issue_cycle;
    }
  }
}

std::vector<std::vector<TransferRequest>> split_by_master(const std::vector<TraceRecord>& records,
                                                          const NocConfig& cfg) {
  const auto masters = cfg.master_coords();
  std::map<Coord, std::size_t> index;
  for (std::size_t i = 0; i < masters.size(); ++i) index[masters[i]] = i;
  std::vector<std::vector<TransferRequest>> out(masters.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = index.find(records[i].master);
    if (it == index.end())
      throw ValidationError("trace record " + std::to_string(i) + ": no master at " + to_string(records[i].master));
    out[it->second].push_back(records[i]);
  }
  return out;
}

}  // namespace simnoc
