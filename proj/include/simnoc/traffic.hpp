// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simnoc/axi.hpp"
#include "simnoc/engine.hpp"
#include "simnoc/topology.hpp"

namespace simnoc {

enum class TrafficKind : std::uint8_t {
  UniformRandom,
  AllGlobal,
  MaxTwoHop,
  MaxSingleHop,
  DnnTraining,
  DnnParallelConv,
  DnnPipelinedConv,
  TraceReplay,
};
std::string_view to_string(TrafficKind k);
std::optional<TrafficKind> parse_traffic_kind(std::string_view s);
bool is_dnn(TrafficKind k);

struct TrafficSpec {
  TrafficKind kind = TrafficKind::UniformRandom;
  double injected_load = 1.0;  // fraction of DW/8 bytes per cycle per master
  std::uint64_t min_bytes = 4;
  std::uint64_t max_bytes = 4;  // also the DMA chunk size of DNN workloads
  double write_fraction = 0.5;
  std::uint64_t seed = 1;
  Coord global_slave{2, 1};
  Coord l2{0, 0};
  bool gradient_exchange = true;
  double channel_shrink = 0.9;
  std::string layer_table;  // CSV path; empty selects the bundled table
  unsigned iterations = 1;
  std::string trace_path;

  /// Throws ConfigError naming the offending field.
  void validate(const NocConfig& cfg) const;
  bool operator==(const TrafficSpec&) const = default;
};

/// splitmix64 finalizer over (a, b). Used for every derived seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

using TraceRecord = TransferRequest;

// Layer tables ---------------------------------------------------------------

struct LayerSize {
  std::string layer;
  std::uint64_t in_bytes = 0;
  std::uint64_t out_bytes = 0;
  std::uint64_t weight_bytes = 0;
  bool operator==(const LayerSize&) const = default;
};

/// ResNet-34 for 224x224 inputs, fp16, channels scaled by (1 - shrink).
std::vector<LayerSize> resnet34_layers(double channel_shrink);
/// VGG-16 style 16-layer CNN, int8 activations.
std::vector<LayerSize> tiled_cnn_layers();
std::vector<LayerSize> read_layer_table(std::istream& is);
void write_layer_table(std::ostream& os, const std::vector<LayerSize>& layers);

// Destination sets -----------------------------------------------------------

/// Slaves each master may address under a synthetic pattern, indexed like
/// NocConfig::master_coords(). Throws ConfigError if a set is empty.
std::vector<std::vector<Coord>> destination_sets(const TrafficSpec& spec, const NocConfig& cfg);

// Sources --------------------------------------------------------------------

/// Per-master lists, replayed in order.
class ListSource : public TrafficSource {
 public:
  explicit ListSource(std::vector<std::vector<TransferRequest>> per_master);
  const TransferRequest* peek(std::size_t master) override;
  void pop(std::size_t master) override;
  std::size_t remaining() const;

 private:
  std::vector<std::vector<TransferRequest>> lists_;
  std::vector<std::size_t> pos_;
};

/// Builds the injection process for `spec`. Trace replay reads and validates
/// spec.trace_path.
std::unique_ptr<TrafficSource> make_traffic(const TrafficSpec& spec, const NocConfig& cfg);

/// Drains `source` up to (excluding) issue cycle `horizon` into one list,
/// ordered by issue cycle then master index.
std::vector<TraceRecord> materialize(TrafficSource& source, std::size_t num_masters, Cycle horizon);

/// Finite DNN workload streams, per master.
std::vector<std::vector<TransferRequest>> dnn_streams(const TrafficSpec& spec, const NocConfig& cfg);

// Trace files ----------------------------------------------------------------

void write_trace(std::ostream& os, const std::vector<TraceRecord>& records);
/// Throws ParseError carrying the 1-based line number.
std::vector<TraceRecord> read_trace(std::istream& is);
/// Throws ValidationError naming the first bad record (0-based index).
void validate_trace(const std::vector<TraceRecord>& records, const NocConfig& cfg);
/// Groups records by master, preserving file order.
std::vector<std::vector<TransferRequest>> split_by_master(const std::vector<TraceRecord>& records,
                                                          const NocConfig& cfg);

}  // namespace simnoc
