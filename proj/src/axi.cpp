// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/axi.hpp"

#include <algorithm>
#include <sstream>

#include "simnoc/error.hpp"

namespace simnoc {

std::vector<Burst> split_transfer(const TransferRequest& req, unsigned data_width, std::uint32_t max_beats,
                                  std::uint64_t transfer_serial) {
  const std::uint32_t beat = data_width / 8;
  if (beat == 0 || max_beats == 0) throw AlignmentError("data width and beat cap must be positive");
  if (req.base_address % beat != 0) {
    std::ostringstream os;
    os << "base address 0x" << std::hex << req.base_address << " not aligned to " << std::dec << beat
       << "-byte beats";
    throw AlignmentError(os.str());
  }
  if (req.total_bytes == 0 || req.total_bytes % beat != 0)
    throw AlignmentError("transfer of " + std::to_string(req.total_bytes) + " bytes is not a whole number of " +
                         std::to_string(beat) + "-byte beats");

  std::vector<Burst> out;
  Addr addr = req.base_address;
  std::uint64_t beats_left = req.total_bytes / beat;
  while (beats_left > 0) {
    const std::uint64_t to_boundary = (kAxiBoundary - addr % kAxiBoundary) / beat;
    const auto n = static_cast<std::uint32_t>(std::min<std::uint64_t>({beats_left, to_boundary, max_beats}));
    out.push_back({transfer_serial, req.master, req.direction, addr, n, beat, req.id});
    addr += std::uint64_t{n} * beat;
    beats_left -= n;
  }
  return out;
}

bool ordering_constraint(const Burst& a, const Burst& b) {
  return a.master == b.master && a.id == b.id && a.direction == b.direction;
}

ComplianceVerdict compliance_check(std::span<const Burst> bursts, std::uint32_t max_beats) {
  auto fail = [](std::size_t i, std::string why) { return ComplianceVerdict{false, i, std::move(why)}; };
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    const Burst& b = bursts[i];
    if (b.num_beats == 0) return fail(i, "num_beats == 0");
    if (b.num_beats > max_beats) return fail(i, "num_beats > " + std::to_string(max_beats));
    if (b.beat_bytes == 0) return fail(i, "beat_bytes == 0");
    if (b.start_address % b.beat_bytes != 0) return fail(i, "start address not beat-aligned");
    if (b.start_address / kAxiBoundary != (b.end_address() - 1) / kAxiBoundary)
      return fail(i, "crosses a 4 KiB boundary");
    if (i > 0 && bursts[i - 1].transfer == b.transfer && bursts[i - 1].master == b.master) {
      const Burst& p = bursts[i - 1];
      if (p.end_address() != b.start_address) return fail(i, "not contiguous with previous burst");
      if (p.direction != b.direction || p.id != b.id || p.beat_bytes != b.beat_bytes)
        return fail(i, "sibling burst attributes differ");
    }
  }
  return {};
}

}  // namespace simnoc
