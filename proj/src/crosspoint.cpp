// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/crosspoint.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

#include "simnoc/error.hpp"

namespace simnoc {

namespace {

template <class T>
Lane<T> make_lane(std::size_t fifo_depth, bool slice) {
  return Lane<T>(fifo_depth + (slice ? 1 : 0), slice ? 2 : 1);
}

}  // namespace

Connection::Connection(std::string from_name, std::string to_name, std::size_t fifo_depth, ChannelMask slices)
    : from(std::move(from_name)),
      to(std::move(to_name)),
      aw(make_lane<AddressHeader>(fifo_depth, slices.has(Channel::AW))),
      w(make_lane<Beat>(fifo_depth, slices.has(Channel::W))),
      b(make_lane<WriteResponse>(fifo_depth, slices.has(Channel::B))),
      ar(make_lane<AddressHeader>(fifo_depth, slices.has(Channel::AR))),
      r(make_lane<Beat>(fifo_depth, slices.has(Channel::R))) {}

std::uint64_t Connection::transfers(Channel ch) const {
  switch (ch) {
    case Channel::AW: return aw.transfers();
    case Channel::W: return w.transfers();
    case Channel::B: return b.transfers();
    case Channel::AR: return ar.transfers();
    case Channel::R: return r.transfers();
  }
  return 0;
}

IdRemapper::IdRemapper(unsigned id_width) : capacity_(std::uint64_t{1} << id_width) {}

bool IdRemapper::can_acquire(int ingress, std::uint32_t id) const {
  if (by_origin_.count(key(ingress, id)) != 0) return true;
  return !free_.empty() || next_fresh_ < capacity_;
}

std::optional<std::uint32_t> IdRemapper::acquire(int ingress, std::uint32_t id) {
  const auto k = key(ingress, id);
  if (auto it = by_origin_.find(k); it != by_origin_.end()) {
    ++by_outbound_[it->second].in_flight;
    return it->second;
  }
  std::uint32_t out;
  if (!free_.empty()) {
    std::pop_heap(free_.begin(), free_.end(), std::greater<>{});
    out = free_.back();
    free_.pop_back();
  } else if (next_fresh_ < capacity_) {
    out = next_fresh_++;
  } else {
    return std::nullopt;
  }
  by_origin_.emplace(k, out);
  by_outbound_.emplace(out, Entry{{ingress, id}, 1});
  return out;
}

IdRemapper::Origin IdRemapper::lookup(std::uint32_t outbound) const {
  auto it = by_outbound_.find(outbound);
  if (it == by_outbound_.end())
    throw EngineError("response carries id " + std::to_string(outbound) + " with no remap entry");
  return it->second.origin;
}

void IdRemapper::release(std::uint32_t outbound) {
  auto it = by_outbound_.find(outbound);
  if (it == by_outbound_.end() || it->second.in_flight == 0)
    throw EngineError("release of unused remap id " + std::to_string(outbound));
  if (--it->second.in_flight > 0) return;
  by_origin_.erase(key(it->second.origin.ingress, it->second.origin.id));
  by_outbound_.erase(it);
  free_.push_back(outbound);
  std::push_heap(free_.begin(), free_.end(), std::greater<>{});
}

std::uint32_t IdRemapper::in_flight(std::uint32_t outbound) const {
  auto it = by_outbound_.find(outbound);
  return it == by_outbound_.end() ? 0 : it->second.in_flight;
}

int RoundRobinArbiter::pick(std::uint32_t requests) const {
  if (requests == 0) return -1;
  for (int k = 0; k < size_; ++k) {
    const int i = (pointer_ + k) % size_;
    if ((requests >> i) & 1u) return i;
  }
  return -1;
}

Crosspoint::Crosspoint(Coord at, const Mesh& mesh, RoutingTable table, unsigned id_width,
                       std::uint32_t beat_bytes)
    : at_(at), mesh_(&mesh), table_(std::move(table)), beat_bytes_(beat_bytes) {
  for (auto& e : egress_) {
    e.wr_remap = IdRemapper(id_width);
    e.rd_remap = IdRemapper(id_width);
  }
}

std::uint64_t Crosspoint::grants(Port egress, Port ingress, Direction dir) const {
  const auto& e = egress_[static_cast<std::size_t>(index(egress))];
  return dir == Direction::Write ? e.aw_grants[static_cast<std::size_t>(index(ingress))]
                                 : e.ar_grants[static_cast<std::size_t>(index(ingress))];
}

bool Crosspoint::idle() const {
  for (const auto& in : ingress_) {
    if (!in.w_route.empty() || !in.write_ids.empty() || !in.read_ids.empty() || !in.err_w.empty() ||
        !in.err_b.empty() || !in.err_r.empty())
      return false;
  }
  for (const auto& e : egress_) {
    if (!e.w_order.empty() || e.wr_remap.entries_in_use() != 0 || e.rd_remap.entries_in_use() != 0) return false;
  }
  return true;
}

std::uint64_t Crosspoint::pending_error_read_bytes() const {
  std::uint64_t total = 0;
  for (const auto& in : ingress_)
    for (const auto& r : in.err_r) total += std::uint64_t{r.beats_left} * beat_bytes_;
  return total;
}

void Crosspoint::step(Cycle now) {
  forward_requests(now, Direction::Write);
  forward_write_data(now);
  forward_requests(now, Direction::Read);
  forward_write_responses(now);
  forward_read_data(now);
}

int Crosspoint::target_of(const AddressHeader& h) const {
  const auto port = table_.lookup(h.address);
  return port ? index(*port) : kErrorPort;
}

bool Crosspoint::admissible(int in, int target, Direction dir, std::uint32_t id) const {
  const auto& ing = ingress_[static_cast<std::size_t>(in)];
  const auto& ids = dir == Direction::Write ? ing.write_ids : ing.read_ids;
  // Same-id transactions may only be outstanding toward a single target.
  if (auto it = ids.find(id); it != ids.end() && it->second.target != target) return false;
  // An ingress streams write data toward one target at a time.
  if (dir == Direction::Write && !ing.w_route.empty() && ing.w_route.back() != target) return false;
  if (target == kErrorPort) return true;

  const auto& eg = egress_[static_cast<std::size_t>(target)];
  if (eg.link == nullptr)
    throw EngineError("crosspoint " + to_string(at_) + " routes to unconnected port " +
                      std::string(to_string(static_cast<Port>(target))));
  if (!mesh_->xbar_connected(static_cast<Port>(in), static_cast<Port>(target)))
    throw EngineError("crosspoint " + to_string(at_) + " has no crossbar path " +
                      std::string(to_string(static_cast<Port>(in))) + " -> " +
                      std::string(to_string(static_cast<Port>(target))));
  const auto& lane = dir == Direction::Write ? eg.link->aw : eg.link->ar;
  if (!lane.can_push()) return false;
  const auto& remap = dir == Direction::Write ? eg.wr_remap : eg.rd_remap;
  return remap.can_acquire(in, id);
}

void Crosspoint::grant(Cycle now, int in, int target, Direction dir) {
  auto& ing = ingress_[static_cast<std::size_t>(in)];
  auto& lane_in = dir == Direction::Write ? ing.link->aw : ing.link->ar;
  AddressHeader h = lane_in.front();
  lane_in.pop();
  auto& track = (dir == Direction::Write ? ing.write_ids : ing.read_ids)[h.id];
  track.target = target;
  ++track.count;

  if (target == kErrorPort) {
    if (dir == Direction::Write) {
      ing.err_w.push_back({h.id, h.tag, 0});
      ing.w_route.push_back(kErrorPort);
    } else {
      ing.err_r.push_back({h.id, h.num_beats, 0, h.tag, now + 1});
    }
    return;
  }

  auto& eg = egress_[static_cast<std::size_t>(target)];
  auto& remap = dir == Direction::Write ? eg.wr_remap : eg.rd_remap;
  const auto out = remap.acquire(in, h.id);
  if (!out) throw EngineError("remap acquire failed after admission check");
  h.id = *out;
  if (dir == Direction::Write) {
    eg.link->aw.push(now, h);
    eg.w_order.push_back(in);
    ing.w_route.push_back(target);
    ++eg.aw_grants[static_cast<std::size_t>(in)];
    log(now, Channel::AW, *eg.link, false, h.id, 0, true);
  } else {
    eg.link->ar.push(now, h);
    ++eg.ar_grants[static_cast<std::size_t>(in)];
    log(now, Channel::AR, *eg.link, false, h.id, 0, true);
  }
}

void Crosspoint::forward_requests(Cycle now, Direction dir) {
  std::array<int, kNumPorts> target{};
  std::array<std::uint32_t, kNumPorts> id{};
  for (int i = 0; i < kNumPorts; ++i) {
    target[static_cast<std::size_t>(i)] = -1;
    const auto* link = ingress_[static_cast<std::size_t>(i)].link;
    if (link == nullptr) continue;
    const auto& lane = dir == Direction::Write ? link->aw : link->ar;
    if (!lane.ready(now)) continue;
    target[static_cast<std::size_t>(i)] = target_of(lane.front());
    id[static_cast<std::size_t>(i)] = lane.front().id;
  }
  for (int t = 0; t < kTargets; ++t) {
    std::uint32_t mask = 0;
    for (int i = 0; i < kNumPorts; ++i) {
      if (target[static_cast<std::size_t>(i)] == t && admissible(i, t, dir, id[static_cast<std::size_t>(i)]))
        mask |= 1u << i;
    }
    if (mask == 0) continue;
    if (t == kErrorPort) {
      // Every ingress has its own error responder.
      for (int i = 0; i < kNumPorts; ++i)
        if ((mask >> i) & 1u) grant(now, i, t, dir);
      continue;
    }
    auto& arb = dir == Direction::Write ? egress_[static_cast<std::size_t>(t)].aw_arb
                                        : egress_[static_cast<std::size_t>(t)].ar_arb;
    const int winner = arb.pick(mask);
    grant(now, winner, t, dir);
    arb.advance(winner);
  }
}

void Crosspoint::forward_write_data(Cycle now) {
  for (int e = 0; e < kNumPorts; ++e) {
    auto& eg = egress_[static_cast<std::size_t>(e)];
    if (eg.w_order.empty()) continue;
    const int in = eg.w_order.front();
    auto& ing = ingress_[static_cast<std::size_t>(in)];
    if (!ing.link->w.ready(now) || !eg.link->w.can_push()) continue;
    if (ing.w_route.empty() || ing.w_route.front() != e)
      throw EngineError("write data order broken at crosspoint " + to_string(at_));
    const Beat beat = ing.link->w.front();
    ing.link->w.pop();
    eg.link->w.push(now, beat);
    log(now, Channel::W, *eg.link, false, beat.id, beat.beat_index, beat.last);
    if (beat.last) {
      eg.w_order.pop_front();
      ing.w_route.pop_front();
    }
  }
  for (auto& ing : ingress_) {
    if (ing.w_route.empty() || ing.w_route.front() != kErrorPort || !ing.link->w.ready(now)) continue;
    const Beat beat = ing.link->w.front();
    ing.link->w.pop();
    absorbed_error_bytes_ += beat_bytes_;
    if (beat.last) {
      ErrorWrite done = ing.err_w.front();
      ing.err_w.pop_front();
      done.ready = now + 1;
      ing.err_b.push_back(done);
      ing.w_route.pop_front();
    }
  }
}

void Crosspoint::retire(int in, Direction dir, std::uint32_t id) {
  auto& ids = dir == Direction::Write ? ingress_[static_cast<std::size_t>(in)].write_ids
                                      : ingress_[static_cast<std::size_t>(in)].read_ids;
  auto it = ids.find(id);
  if (it == ids.end() || it->second.count == 0)
    throw EngineError("response for untracked id " + std::to_string(id) + " at crosspoint " + to_string(at_));
  if (--it->second.count == 0) ids.erase(it);
}

void Crosspoint::forward_write_responses(Cycle now) {
  std::array<int, kNumPorts> dest{};
  for (int e = 0; e < kNumPorts; ++e) {
    dest[static_cast<std::size_t>(e)] = -1;
    const auto& eg = egress_[static_cast<std::size_t>(e)];
    if (eg.link == nullptr || !eg.link->b.ready(now)) continue;
    dest[static_cast<std::size_t>(e)] = eg.wr_remap.lookup(eg.link->b.front().id).ingress;
  }
  for (int i = 0; i < kNumPorts; ++i) {
    auto& ing = ingress_[static_cast<std::size_t>(i)];
    if (ing.link == nullptr || !ing.link->b.can_push()) continue;
    std::uint32_t mask = 0;
    for (int e = 0; e < kNumPorts; ++e)
      if (dest[static_cast<std::size_t>(e)] == i) mask |= 1u << e;
    if (!ing.err_b.empty() && ing.err_b.front().ready <= now) mask |= 1u << kErrorPort;
    const int src = ing.b_arb.pick(mask);
    if (src < 0) continue;
    ing.b_arb.advance(src);
    if (src == kErrorPort) {
      const ErrorWrite done = ing.err_b.front();
      ing.err_b.pop_front();
      ing.link->b.push(now, {done.id, true, done.tag});
      log(now, Channel::B, *ing.link, true, done.id, 0, true);
      retire(i, Direction::Write, done.id);
      continue;
    }
    auto& eg = egress_[static_cast<std::size_t>(src)];
    const WriteResponse resp = eg.link->b.front();
    eg.link->b.pop();
    const auto origin = eg.wr_remap.lookup(resp.id);
    eg.wr_remap.release(resp.id);
    ing.link->b.push(now, {origin.id, resp.error, resp.tag});
    log(now, Channel::B, *ing.link, true, origin.id, 0, true);
    retire(i, Direction::Write, origin.id);
  }
}

void Crosspoint::forward_read_data(Cycle now) {
  std::array<int, kNumPorts> dest{};
  for (int e = 0; e < kNumPorts; ++e) {
    dest[static_cast<std::size_t>(e)] = -1;
    const auto& eg = egress_[static_cast<std::size_t>(e)];
    if (eg.link == nullptr || !eg.link->r.ready(now)) continue;
    dest[static_cast<std::size_t>(e)] = eg.rd_remap.lookup(eg.link->r.front().id).ingress;
  }
  for (int i = 0; i < kNumPorts; ++i) {
    auto& ing = ingress_[static_cast<std::size_t>(i)];
    if (ing.link == nullptr || !ing.link->r.can_push()) continue;
    std::uint32_t mask = 0;
    for (int e = 0; e < kNumPorts; ++e)
      if (dest[static_cast<std::size_t>(e)] == i) mask |= 1u << e;
    if (!ing.err_r.empty() && ing.err_r.front().ready <= now) mask |= 1u << kErrorPort;
    int src;
    if (ing.r_lock >= 0) {
      // R bursts are not interleaved on one link.
      src = ((mask >> ing.r_lock) & 1u) ? ing.r_lock : -1;
    } else {
      src = ing.r_arb.pick(mask);
      if (src >= 0) ing.r_arb.advance(src);
    }
    if (src < 0) continue;

    if (src == kErrorPort) {
      ErrorRead& er = ing.err_r.front();
      const bool last = er.beats_left == 1;
      ing.link->r.push(now, {er.id, er.beats_sent, last, true, er.tag});
      log(now, Channel::R, *ing.link, true, er.id, er.beats_sent, last);
      ++er.beats_sent;
      --er.beats_left;
      if (last) {
        const auto id = er.id;
        ing.err_r.pop_front();
        ing.r_lock = -1;
        retire(i, Direction::Read, id);
      } else {
        ing.r_lock = kErrorPort;
      }
      continue;
    }
    auto& eg = egress_[static_cast<std::size_t>(src)];
    Beat beat = eg.link->r.front();
    eg.link->r.pop();
    const auto origin = eg.rd_remap.lookup(beat.id);
    const std::uint32_t outbound = beat.id;
    beat.id = origin.id;
    ing.link->r.push(now, beat);
    log(now, Channel::R, *ing.link, true, beat.id, beat.beat_index, beat.last);
    if (beat.last) {
      eg.rd_remap.release(outbound);
      ing.r_lock = -1;
      retire(i, Direction::Read, origin.id);
    } else {
      ing.r_lock = src;
    }
  }
}

void Crosspoint::log(Cycle now, Channel ch, const Connection& c, bool upstream, std::uint32_t id,
                     std::uint32_t beat, bool last) const {
  if (log_ == nullptr && observer_ == nullptr) return;
  const std::string& src = upstream ? c.to : c.from;
  const std::string& dst = upstream ? c.from : c.to;
  if (observer_ != nullptr) observer_->on_event({now, ch, src, dst, id, beat, last});
  if (log_ == nullptr) return;
  *log_ << now << ' ' << to_string(ch) << ' ' << src << ' ' << dst << ' ' << id << ' ' << beat << ' '
        << (last ? 1 : 0) << '\n';
}

}  // namespace simnoc
