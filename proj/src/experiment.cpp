// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "simnoc/error.hpp"

namespace simnoc {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  while (true) {
    const auto at = s.find(sep);
    out.push_back(trim(s.substr(0, at)));
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

std::uint64_t to_u64(const std::string& field, std::string_view v) {
  v = trim(v);
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    v.remove_prefix(2);
  }
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc{} || end != v.data() + v.size())
    throw ConfigError(field, "expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

unsigned to_unsigned(const std::string& field, std::string_view v) {
  const auto x = to_u64(field, v);
  if (x > 0xFFFFFFFFu) throw ConfigError(field, "value out of range");
  return static_cast<unsigned>(x);
}

int to_int(const std::string& field, std::string_view v) {
  const auto x = to_u64(field, v);
  if (x > 1'000'000) throw ConfigError(field, "value out of range");
  return static_cast<int>(x);
}

double to_double(const std::string& field, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || end != v.data() + v.size())
    throw ConfigError(field, "expected a number, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(const std::string& field, std::string_view v) {
  const auto l = lower(trim(v));
  if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
  if (l == "false" || l == "no" || l == "off" || l == "0") return false;
  throw ConfigError(field, "expected true or false, got '" + std::string(v) + "'");
}

Coord to_coord(const std::string& field, std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '(' && v.back() == ')') v = v.substr(1, v.size() - 2);
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw ConfigError(field, "expected 'row,col', got '" + std::string(v) + "'");
  return {to_int(field, parts[0]), to_int(field, parts[1])};
}

std::vector<Coord> to_coords(const std::string& field, std::string_view v) {
  std::vector<Coord> out;
  for (auto item : split(v, ';')) out.push_back(to_coord(field, item));
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string fmt_coord(Coord c) { return std::to_string(c.row) + "," + std::to_string(c.col); }

std::string fmt_coords(const std::vector<Coord>& cs) {
  std::string out;
  for (const auto& c : cs) {
    if (!out.empty()) out += "; ";
    out += fmt_coord(c);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ", ";
    out += f(x);
  }
  return out;
}

std::string hex(std::uint64_t x) {
  std::ostringstream os;
  os << "0x" << std::hex << x;
  return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string& field, std::string_view value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      // [noc]
      {"noc.rows", [](auto& c, auto& f, auto v) { c.noc.rows = to_int(f, v); }},
      {"noc.cols", [](auto& c, auto& f, auto v) { c.noc.cols = to_int(f, v); }},
      {"noc.addr_width", [](auto& c, auto& f, auto v) { c.noc.addr_width = to_unsigned(f, v); }},
      {"noc.data_width", [](auto& c, auto& f, auto v) { c.noc.data_width = to_unsigned(f, v); }},
      {"noc.id_width", [](auto& c, auto& f, auto v) { c.noc.id_width = to_unsigned(f, v); }},
      {"noc.max_outstanding", [](auto& c, auto& f, auto v) { c.noc.max_outstanding = to_unsigned(f, v); }},
      {"noc.connectivity",
       [](auto& c, auto& f, auto v) {
         const auto l = lower(trim(v));
         if (l == "partial") {
           c.noc.connectivity = Connectivity::Partial;
         } else if (l == "full") {
           c.noc.connectivity = Connectivity::Full;
         } else {
           throw ConfigError(f, "expected partial or full");
         }
       }},
      {"noc.register_slice",
       [](auto& c, auto& f, auto v) {
         const auto m = parse_channel_mask(v);
         if (!m) throw ConfigError(f, "expected all, none or a list of aw,w,b,ar,r");
         c.noc.register_slice = *m;
       }},
      {"noc.clock_hz", [](auto& c, auto& f, auto v) { c.noc.clock_hz = to_double(f, v); }},
      {"noc.endpoint_region_bytes", [](auto& c, auto& f, auto v) { c.noc.endpoint_region_bytes = to_u64(f, v); }},
      {"noc.address_base", [](auto& c, auto& f, auto v) { c.noc.address_base = to_u64(f, v); }},
      {"noc.masters", [](auto& c, auto& f, auto v) { c.noc.masters = to_coords(f, v); }},
      {"noc.slaves", [](auto& c, auto& f, auto v) { c.noc.slaves = to_coords(f, v); }},
      // [traffic]
      {"traffic.kind",
       [](auto& c, auto& f, auto v) {
         const auto k = parse_traffic_kind(trim(v));
         if (!k) throw ConfigError(f, "unknown traffic kind '" + std::string(trim(v)) + "'");
         c.traffic.kind = *k;
       }},
      {"traffic.injected_load", [](auto& c, auto& f, auto v) { c.traffic.injected_load = to_double(f, v); }},
      {"traffic.min_bytes", [](auto& c, auto& f, auto v) { c.traffic.min_bytes = to_u64(f, v); }},
      {"traffic.max_bytes", [](auto& c, auto& f, auto v) { c.traffic.max_bytes = to_u64(f, v); }},
      {"traffic.write_fraction", [](auto& c, auto& f, auto v) { c.traffic.write_fraction = to_double(f, v); }},
      {"traffic.seed", [](auto& c, auto& f, auto v) { c.traffic.seed = to_u64(f, v); }},
      {"traffic.global_slave", [](auto& c, auto& f, auto v) { c.traffic.global_slave = to_coord(f, v); }},
      {"traffic.l2", [](auto& c, auto& f, auto v) { c.traffic.l2 = to_coord(f, v); }},
      {"traffic.gradient_exchange", [](auto& c, auto& f, auto v) { c.traffic.gradient_exchange = to_bool(f, v); }},
      {"traffic.channel_shrink", [](auto& c, auto& f, auto v) { c.traffic.channel_shrink = to_double(f, v); }},
      {"traffic.layer_table", [](auto& c, auto&, auto v) { c.traffic.layer_table = std::string(trim(v)); }},
      {"traffic.iterations", [](auto& c, auto& f, auto v) { c.traffic.iterations = to_unsigned(f, v); }},
      {"traffic.trace_path", [](auto& c, auto&, auto v) { c.traffic.trace_path = std::string(trim(v)); }},
      // [engine]
      {"engine.fifo_depth", [](auto& c, auto& f, auto v) { c.engine.fifo_depth = to_u64(f, v); }},
      {"engine.slave_latency", [](auto& c, auto& f, auto v) { c.engine.slave_latency = to_u64(f, v); }},
      {"engine.mot_mode",
       [](auto& c, auto& f, auto v) {
         const auto m = parse_mot_mode(trim(v));
         if (!m) throw ConfigError(f, "expected per_direction or combined");
         c.engine.mot_mode = *m;
       }},
      {"engine.max_burst_beats", [](auto& c, auto& f, auto v) { c.engine.max_burst_beats = to_unsigned(f, v); }},
      {"engine.command_queue_depth",
       [](auto& c, auto& f, auto v) { c.engine.command_queue_depth = to_u64(f, v); }},
      // [run]
      {"run.warmup", [](auto& c, auto& f, auto v) { c.run.warmup = to_u64(f, v); }},
      {"run.cycles", [](auto& c, auto& f, auto v) { c.run.cycles = to_u64(f, v); }},
      {"run.cycle_limit", [](auto& c, auto& f, auto v) { c.run.cycle_limit = to_u64(f, v); }},
      {"run.drain", [](auto& c, auto& f, auto v) { c.run.drain = to_bool(f, v); }},
      {"run.loads",
       [](auto& c, auto& f, auto v) {
         c.run.loads.clear();
         for (auto x : split(v, ',')) c.run.loads.push_back(to_double(f, x));
       }},
      {"run.patterns",
       [](auto& c, auto& f, auto v) {
         c.run.patterns.clear();
         for (auto x : split(v, ',')) {
           const auto k = parse_traffic_kind(x);
           if (!k) throw ConfigError(f, "unknown traffic kind '" + std::string(x) + "'");
           c.run.patterns.push_back(*k);
         }
       }},
      {"run.burst_sizes",
       [](auto& c, auto& f, auto v) {
         c.run.burst_sizes.clear();
         for (auto x : split(v, ',')) c.run.burst_sizes.push_back(to_u64(f, x));
       }},
      {"run.saturation_threshold",
       [](auto& c, auto& f, auto v) { c.run.saturation_threshold = to_double(f, v); }},
      {"run.jobs", [](auto& c, auto& f, auto v) { c.run.jobs = to_unsigned(f, v); }},
      {"run.out", [](auto& c, auto&, auto v) { c.run.out = std::string(trim(v)); }},
  };
  return table;
}

void validate_run(const ExperimentConfig& cfg) {
  const auto& r = cfg.run;
  if (r.cycles == 0) throw ConfigError("run.cycles", "must be positive");
  if (r.cycle_limit == 0) throw ConfigError("run.cycle_limit", "must be positive");
  if (r.jobs == 0) throw ConfigError("run.jobs", "must be positive");
  if (r.loads.empty()) throw ConfigError("run.loads", "at least one load point is required");
  for (std::size_t i = 0; i < r.loads.size(); ++i) {
    if (!(r.loads[i] > 0.0 && r.loads[i] <= 1.0)) throw ConfigError("run.loads", "every load must lie in (0, 1]");
    if (i > 0 && r.loads[i] <= r.loads[i - 1]) throw ConfigError("run.loads", "loads must be strictly increasing");
  }
  if (r.patterns.empty()) throw ConfigError("run.patterns", "at least one pattern is required");
  for (auto k : r.patterns)
    if (k == TrafficKind::TraceReplay) throw ConfigError("run.patterns", "trace_replay cannot be a matrix pattern");
  if (r.burst_sizes.empty()) throw ConfigError("run.burst_sizes", "at least one burst size is required");
  for (auto b : r.burst_sizes)
    if (b == 0) throw ConfigError("run.burst_sizes", "burst sizes must be positive");
  if (!(r.saturation_threshold > 0.0)) throw ConfigError("run.saturation_threshold", "must be positive");
  if (cfg.engine.fifo_depth == 0) throw ConfigError("engine.fifo_depth", "must be positive");
  if (cfg.engine.max_burst_beats == 0 || cfg.engine.max_burst_beats > kAxiMaxBeats)
    throw ConfigError("engine.max_burst_beats", "must lie in [1, 256]");
  if (cfg.engine.command_queue_depth == 0) throw ConfigError("engine.command_queue_depth", "must be positive");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

double utilization_or_zero(double bps, const NocConfig& cfg) {
  return bisection_links(cfg) > 0 ? utilization(bps, cfg) : 0.0;
}

}  // namespace

std::string_view version() { return SIMNOC_VERSION; }

std::optional<NocConfig> preset_config(std::string_view name) {
  NocConfig c;
  c.addr_width = 32;
  c.id_width = 4;
  c.max_outstanding = 8;
  if (name == "slim_4x4") {
    c.rows = c.cols = 4;
    c.data_width = 32;
  } else if (name == "wide_4x4") {
    c.rows = c.cols = 4;
    c.data_width = 512;
  } else if (name == "slim_2x2") {
    c.rows = c.cols = 2;
    c.data_width = 32;
  } else {
    return std::nullopt;
  }
  return c;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"slim_4x4", "wide_4x4", "slim_2x2"};
  return names;
}

RunOptions ExperimentConfig::run_options() const {
  RunOptions o;
  o.engine = engine;
  o.warmup = run.warmup;
  o.cycles = run.cycles;
  o.cycle_limit = run.cycle_limit;
  o.drain = run.drain;
  return o;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const auto& a = engine;
  const auto& b = o.engine;
  return preset == o.preset && noc == o.noc && traffic == o.traffic && run == o.run &&
         a.fifo_depth == b.fifo_depth && a.slave_latency == b.slave_latency && a.mot_mode == b.mot_mode &&
         a.max_burst_beats == b.max_burst_beats && a.command_queue_depth == b.command_queue_depth;
}

ExperimentConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream is{std::string(text)};
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }

  ExperimentConfig cfg;
  std::vector<std::pair<std::string, std::string>> assignments;
  std::string preset;
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      if (section != "preset") throw ConfigError(section, "keys must appear inside a section");
      preset = trim(node.data());
      continue;
    }
    if (section != "noc" && section != "traffic" && section != "engine" && section != "run")
      throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : node) {
      if (!value.empty()) throw ConfigError(section + "." + key, "nested keys are not supported");
      if (section == "noc" && key == "preset") {
        preset = trim(value.data());
        continue;
      }
      assignments.emplace_back(section + "." + key, value.data());
    }
  }

  if (!preset.empty()) {
    const auto base = preset_config(preset);
    if (!base) throw ConfigError("noc.preset", "unknown preset '" + preset + "'");
    cfg.noc = *base;
    cfg.preset = preset;
  }
  const auto& table = setters();
  bool min_set = false;
  bool max_set = false;
  for (const auto& [field, value] : assignments) {
    const auto it = table.find(field);
    if (it == table.end()) throw ConfigError(field, "unknown key");
    it->second(cfg, field, value);
    min_set |= field == "traffic.min_bytes";
    max_set |= field == "traffic.max_bytes";
  }

  // Unset size bounds follow the beat of the configured data width.
  const std::uint64_t beat = cfg.noc.beat_bytes();
  if (!min_set) cfg.traffic.min_bytes = std::max(cfg.traffic.min_bytes, beat);
  if (!max_set) cfg.traffic.max_bytes = std::max(cfg.traffic.max_bytes, cfg.traffic.min_bytes);

  cfg.noc.validate();
  cfg.traffic.validate(cfg.noc);
  validate_run(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config", "cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string dump_config(const ExperimentConfig& cfg) {
  const auto& n = cfg.noc;
  const auto& t = cfg.traffic;
  const auto& e = cfg.engine;
  const auto& r = cfg.run;
  std::ostringstream os;
  os << "[noc]\n";
  if (!cfg.preset.empty()) os << "preset = " << cfg.preset << '\n';
  os << "rows = " << n.rows << '\n'
     << "cols = " << n.cols << '\n'
     << "addr_width = " << n.addr_width << '\n'
     << "data_width = " << n.data_width << '\n'
     << "id_width = " << n.id_width << '\n'
     << "max_outstanding = " << n.max_outstanding << '\n'
     << "connectivity = " << (n.connectivity == Connectivity::Full ? "full" : "partial") << '\n'
     << "register_slice = " << to_string(n.register_slice) << '\n'
     << "clock_hz = " << fmt_double(n.clock_hz) << '\n'
     << "endpoint_region_bytes = " << hex(n.endpoint_region_bytes) << '\n'
     << "address_base = " << hex(n.address_base) << '\n'
     << "masters = " << fmt_coords(n.masters) << '\n'
     << "slaves = " << fmt_coords(n.slaves) << "\n\n";
  os << "[traffic]\n"
     << "kind = " << to_string(t.kind) << '\n'
     << "injected_load = " << fmt_double(t.injected_load) << '\n'
     << "min_bytes = " << t.min_bytes << '\n'
     << "max_bytes = " << t.max_bytes << '\n'
     << "write_fraction = " << fmt_double(t.write_fraction) << '\n'
     << "seed = " << t.seed << '\n'
     << "global_slave = " << fmt_coord(t.global_slave) << '\n'
     << "l2 = " << fmt_coord(t.l2) << '\n'
     << "gradient_exchange = " << (t.gradient_exchange ? "true" : "false") << '\n'
     << "channel_shrink = " << fmt_double(t.channel_shrink) << '\n'
     << "layer_table = " << t.layer_table << '\n'
     << "iterations = " << t.iterations << '\n'
     << "trace_path = " << t.trace_path << "\n\n";
  os << "[engine]\n"
     << "fifo_depth = " << e.fifo_depth << '\n'
     << "slave_latency = " << e.slave_latency << '\n'
     << "mot_mode = " << to_string(e.mot_mode) << '\n'
     << "max_burst_beats = " << e.max_burst_beats << '\n'
     << "command_queue_depth = " << e.command_queue_depth << "\n\n";
  os << "[run]\n"
     << "warmup = " << r.warmup << '\n'
     << "cycles = " << r.cycles << '\n'
     << "cycle_limit = " << r.cycle_limit << '\n'
     << "drain = " << (r.drain ? "true" : "false") << '\n'
     << "loads = " << join(r.loads, fmt_double) << '\n'
     << "patterns = " << join(r.patterns, [](TrafficKind k) { return std::string(to_string(k)); }) << '\n'
     << "burst_sizes = " << join(r.burst_sizes, [](std::uint64_t b) { return std::to_string(b); }) << '\n'
     << "saturation_threshold = " << fmt_double(r.saturation_threshold) << '\n'
     << "jobs = " << r.jobs << '\n'
     << "out = " << r.out << '\n';
  return os.str();
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Run: return "run";
    case Mode::Sweep: return "sweep";
    case Mode::Matrix: return "matrix";
    case Mode::Replay: return "replay";
  }
  return "?";
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t pattern, std::size_t burst) {
  return mix_seed(mix_seed(base, pattern), burst);
}

TrafficSpec matrix_cell_spec(const ExperimentConfig& cfg, std::size_t pattern, std::size_t burst) {
  TrafficSpec spec = cfg.traffic;
  const std::uint64_t beat = cfg.noc.beat_bytes();
  spec.kind = cfg.run.patterns.at(pattern);
  spec.min_bytes = beat;
  spec.max_bytes = std::max<std::uint64_t>(cfg.run.burst_sizes.at(burst), beat);
  spec.seed = cell_seed(cfg.traffic.seed, pattern, burst);
  return spec;
}

void write_run_csv(std::ostream& os, const ExperimentConfig& cfg, const RunOutcome& r) {
  const auto& s = r.stats;
  os << "kind,load,measured_cycles,read_bytes,write_bytes,transfers,decode_errors,throughput_bps,utilization,"
        "mean_lat,p50,p95,p99,max_lat,drained\n";
  os << to_string(cfg.traffic.kind) << ',' << fmt_double(cfg.traffic.injected_load) << ',' << s.measured_cycles
     << ',' << s.delivered_read_bytes << ',' << s.delivered_write_bytes << ',' << s.completed_transfers << ','
     << s.decode_errors << ',' << std::fixed << std::setprecision(1) << r.throughput_bps << ','
     << std::setprecision(6) << utilization_or_zero(r.throughput_bps, cfg.noc) << ',';
  if (!s.latencies.empty()) {
    const auto l = latency_stats(s.latencies);
    os << std::setprecision(3) << l.mean << ',' << l.p50 << ',' << l.p95 << ',' << l.p99 << ',' << l.max;
  } else {
    os << ",,,,";
  }
  os << std::defaultfloat << ',' << (r.drained ? "true" : "false") << '\n';
}

void write_links_csv(std::ostream& os, const SimStats& stats) {
  os << "link";
  for (Channel c : kAllChannels) os << ',' << to_string(c);
  os << '\n';
  for (const auto& l : stats.links) {
    os << l.name;
    for (auto b : l.busy) os << ',' << b;
    os << '\n';
  }
}

ModeResult run_mode(Mode mode, const ExperimentConfig& cfg, const fs::path& out, bool event_log) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());

  ModeResult result;
  ExperimentConfig resolved = cfg;
  RunOptions opts = cfg.run_options();
  std::unique_ptr<std::ofstream> log;
  if (event_log && (mode == Mode::Run || mode == Mode::Replay)) {
    log = std::make_unique<std::ofstream>(out / "events.log");
    if (!*log) throw IoError("cannot open " + (out / "events.log").string());
    opts.engine.event_log = log.get();
    result.files.push_back(out / "events.log");
  }

  std::string seed_note;
  switch (mode) {
    case Mode::Run:
    case Mode::Replay: {
      if (mode == Mode::Replay) resolved.traffic.kind = TrafficKind::TraceReplay;
      const RunOutcome r = simulate(resolved.noc, resolved.traffic, opts);
      std::ostringstream csv;
      write_run_csv(csv, resolved, r);
      write_text(out / "stats.csv", csv.str());
      std::ostringstream links;
      write_links_csv(links, r.stats);
      write_text(out / "links.csv", links.str());
      result.files.push_back(out / "stats.csv");
      result.files.push_back(out / "links.csv");
      seed_note = "master i draws from splitmix64(seed, i)";
      break;
    }
    case Mode::Sweep: {
      SweepOptions so;
      so.run = opts;
      so.jobs = cfg.run.jobs;
      so.saturation_threshold = cfg.run.saturation_threshold;
      const auto curve = sweep(cfg.noc, cfg.traffic, cfg.run.loads, so);
      std::ostringstream csv;
      write_sweep_csv(csv, curve);
      write_text(out / "sweep.csv", csv.str());
      result.files.push_back(out / "sweep.csv");
      seed_note = "point i uses seed ^ i";
      break;
    }
    case Mode::Matrix: {
      const std::size_t np = cfg.run.patterns.size();
      const std::size_t nb = cfg.run.burst_sizes.size();
      std::vector<MatrixCell> cells(np * nb);
      parallel_for(cells.size(), cfg.run.jobs, [&](std::size_t i) {
        const std::size_t p = i / nb;
        const std::size_t b = i % nb;
        const TrafficSpec spec = matrix_cell_spec(cfg, p, b);
        const RunOutcome r = simulate(cfg.noc, spec, opts);
        cells[i] = {std::string(to_string(spec.kind)), cfg.run.burst_sizes[b], r.throughput_bps,
                    utilization_or_zero(r.throughput_bps, cfg.noc)};
      });
      std::ostringstream csv;
      write_matrix_csv(csv, cells);
      write_text(out / "matrix.csv", csv.str());
      result.files.push_back(out / "matrix.csv");
      seed_note = "cell (p, b) uses splitmix64(splitmix64(seed, p), b)";
      break;
    }
  }

  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest;
  manifest["tool"] = "simnoc";
  manifest["version"] = std::string(version());
  manifest["mode"] = std::string(to_string(mode));
  manifest["seed"] = resolved.traffic.seed;
  manifest["seed_derivation"] = seed_note;
  manifest["config"] = dump_config(resolved);
  manifest["wall_seconds"] = result.wall_seconds;
  std::vector<std::string> names;
  for (const auto& f : result.files) names.push_back(f.filename().string());
  manifest["outputs"] = names;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  result.files.push_back(out / "manifest.json");
  return result;
}

}  // namespace simnoc
