// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simnoc/types.hpp"

namespace simnoc {

inline constexpr std::uint32_t kAxiMaxBeats = 256;
inline constexpr Addr kAxiBoundary = 4096;

/// One DMA command as issued by a master endpoint.
struct TransferRequest {
  Cycle issue_cycle = 0;
  Coord master;
  Direction direction = Direction::Read;
  Addr base_address = 0;
  std::uint64_t total_bytes = 0;
  std::uint32_t id = 0;

  bool operator==(const TransferRequest&) const = default;
};

/// An INCR burst: one AXI transaction.
struct Burst {
  std::uint64_t transfer = 0;  // parent transfer serial
  Coord master;
  Direction direction = Direction::Read;
  Addr start_address = 0;
  std::uint32_t num_beats = 0;
  std::uint32_t beat_bytes = 0;
  std::uint32_t id = 0;

  std::uint64_t bytes() const { return std::uint64_t{num_beats} * beat_bytes; }
  Addr end_address() const { return start_address + bytes(); }
  bool operator==(const Burst&) const = default;
};

/// Splits a transfer into maximal INCR bursts that respect the beat cap and
/// never cross a 4 KiB boundary. Throws AlignmentError when the base address
/// or the size is not a whole number of beats.
std::vector<Burst> split_transfer(const TransferRequest& req, unsigned data_width,
                                  std::uint32_t max_beats = kAxiMaxBeats, std::uint64_t transfer_serial = 0);

/// True iff the two bursts share master, id and direction class.
bool ordering_constraint(const Burst& a, const Burst& b);

struct ComplianceVerdict {
  bool ok = true;
  std::size_t index = 0;  // first offending burst
  std::string reason;
};

/// Checks every burst invariant and that consecutive bursts of the same
/// transfer are contiguous.
ComplianceVerdict compliance_check(std::span<const Burst> bursts, std::uint32_t max_beats = kAxiMaxBeats);

// Channel payloads. Each lane of a link carries exactly one of these kinds.

/// AW or AR: full burst metadata, routed by address.
struct AddressHeader {
  Addr address = 0;
  std::uint32_t num_beats = 0;
  std::uint32_t id = 0;
  std::uint64_t tag = 0;  // simulator-wide burst serial, never used for routing
};

/// W or R data beat.
struct Beat {
  std::uint32_t id = 0;  // meaningful on R only; W follows AW order
  std::uint32_t beat_index = 0;
  bool last = false;
  bool error = false;
  std::uint64_t tag = 0;
};

/// B write response.
struct WriteResponse {
  std::uint32_t id = 0;
  bool error = false;
  std::uint64_t tag = 0;
};

}  // namespace simnoc
