// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace simnoc {

using Cycle = std::uint64_t;
using Addr = std::uint64_t;

/// Mesh position. Row 0 is the top row, column 0 the left column.
struct Coord {
  int row = 0;
  int col = 0;

  auto operator<=>(const Coord&) const = default;
};

inline int manhattan(Coord a, Coord b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

std::string to_string(Coord c);

/// Crosspoint port. Mesh ports face the neighbour in that compass direction.
enum class Port : std::uint8_t { North = 0, East = 1, South = 2, West = 3, Local = 4 };
inline constexpr int kNumPorts = 5;
inline constexpr std::array<Port, kNumPorts> kAllPorts = {Port::North, Port::East, Port::South,
                                                          Port::West, Port::Local};

constexpr int index(Port p) { return static_cast<int>(p); }
Port opposite(Port p);
std::string_view to_string(Port p);
std::optional<Port> parse_port(std::string_view s);

/// The five AXI channels.
enum class Channel : std::uint8_t { AW = 0, W = 1, B = 2, AR = 3, R = 4 };
inline constexpr int kNumChannels = 5;
inline constexpr std::array<Channel, kNumChannels> kAllChannels = {Channel::AW, Channel::W, Channel::B,
                                                                  Channel::AR, Channel::R};
constexpr int index(Channel c) { return static_cast<int>(c); }
std::string_view to_string(Channel c);
std::optional<Channel> parse_channel(std::string_view s);

/// Set of channels, e.g. the channels that carry a register slice.
class ChannelMask {
 public:
  constexpr ChannelMask() = default;
  static constexpr ChannelMask all() { return ChannelMask(0x1f); }
  static constexpr ChannelMask none() { return ChannelMask(0); }

  constexpr bool has(Channel c) const { return (bits_ >> index(c)) & 1u; }
  constexpr ChannelMask& set(Channel c, bool on = true) {
    bits_ = on ? (bits_ | (1u << index(c))) : (bits_ & ~(1u << index(c)));
    return *this;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const ChannelMask&) const = default;

 private:
  constexpr explicit ChannelMask(std::uint8_t b) : bits_(b) {}
  std::uint8_t bits_ = 0x1f;
};

std::string to_string(ChannelMask m);
/// Accepts "all", "none" or a comma list such as "aw,w,b".
std::optional<ChannelMask> parse_channel_mask(std::string_view s);

enum class Direction : std::uint8_t { Read = 0, Write = 1 };
std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

}  // namespace simnoc
