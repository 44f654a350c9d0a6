// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/types.hpp"

#include <algorithm>
#include <cctype>

namespace simnoc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_string(Coord c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

Port opposite(Port p) {
  switch (p) {
    case Port::North: return Port::South;
    case Port::South: return Port::North;
    case Port::East: return Port::West;
    case Port::West: return Port::East;
    case Port::Local: return Port::Local;
  }
  return Port::Local;
}

std::string_view to_string(Port p) {
  switch (p) {
    case Port::North: return "north";
    case Port::East: return "east";
    case Port::South: return "south";
    case Port::West: return "west";
    case Port::Local: return "local";
  }
  return "?";
}

std::optional<Port> parse_port(std::string_view s) {
  const std::string l = lower(trim(s));
  for (Port p : kAllPorts) {
    if (l == to_string(p)) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::AW: return "aw";
    case Channel::W: return "w";
    case Channel::B: return "b";
    case Channel::AR: return "ar";
    case Channel::R: return "r";
  }
  return "?";
}

std::optional<Channel> parse_channel(std::string_view s) {
  const std::string l = lower(trim(s));
  for (Channel c : kAllChannels) {
    if (l == to_string(c)) return c;
  }
  return std::nullopt;
}

std::string to_string(ChannelMask m) {
  if (m == ChannelMask::all()) return "all";
  if (m.empty()) return "none";
  std::string out;
  for (Channel c : kAllChannels) {
    if (!m.has(c)) continue;
    if (!out.empty()) out += ',';
    out += to_string(c);
  }
  return out;
}

std::optional<ChannelMask> parse_channel_mask(std::string_view s) {
  const std::string l = lower(trim(s));
  if (l == "all") return ChannelMask::all();
  if (l == "none" || l.empty()) return ChannelMask::none();
  ChannelMask m = ChannelMask::none();
  std::string_view rest = l;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    const auto ch = parse_channel(item);
    if (!ch) return std::nullopt;
    m.set(*ch);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return m;
}

std::string_view to_string(Direction d) { return d == Direction::Read ? "r" : "w"; }

std::optional<Direction> parse_direction(std::string_view s) {
  const std::string l = lower(trim(s));
  if (l == "r" || l == "read") return Direction::Read;
  if (l == "w" || l == "write") return Direction::Write;
  return std::nullopt;
}

}  // namespace simnoc
