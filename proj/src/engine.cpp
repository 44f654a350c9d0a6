// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "simnoc/engine.hpp"

#include <algorithm>

#include "simnoc/error.hpp"

namespace simnoc {

std::string_view to_string(MotMode m) { return m == MotMode::PerDirection ? "per_direction" : "combined"; }

std::optional<MotMode> parse_mot_mode(std::string_view s) {
  if (s == "per_direction") return MotMode::PerDirection;
  if (s == "combined") return MotMode::Combined;
  return std::nullopt;
}

namespace {

constexpr std::size_t dir_index(Direction d) { return static_cast<std::size_t>(d); }

}  // namespace

// ---------------------------------------------------------------------------
// DmaMaster

DmaMaster::DmaMaster(std::size_t index, Coord at, const NocConfig& cfg, const EngineParams& params,
                     Connection* link)
    : index_(index), at_(at), cfg_(&cfg), params_(&params), link_(link) {}

InjectResult DmaMaster::inject(const TransferRequest& req) {
  const std::uint32_t beat = cfg_->beat_bytes();
  if (req.total_bytes == 0 || req.total_bytes % beat != 0 || req.base_address % beat != 0)
    throw AlignmentError("transfer at " + std::to_string(req.base_address) + " of " +
                         std::to_string(req.total_bytes) + " bytes is not beat-aligned");
  if (req.id >= (std::uint64_t{1} << cfg_->id_width))
    throw ValidationError("id " + std::to_string(req.id) + " does not fit in " + std::to_string(cfg_->id_width) +
                          " bits");
  const auto d = dir_index(req.direction);
  const bool immediate = pending_[d].empty() && issue_[d].empty() && has_headroom(req.direction);
  pending_[d].push_back(req);
  return immediate ? InjectResult::Accepted : InjectResult::Deferred;
}

bool DmaMaster::has_headroom(Direction d) const {
  if (params_->mot_mode == MotMode::Combined) return outstanding_[0] + outstanding_[1] < cfg_->max_outstanding;
  return outstanding_[dir_index(d)] < cfg_->max_outstanding;
}

void DmaMaster::refill(Direction d) {
  const auto i = dir_index(d);
  if (!issue_[i].empty() || pending_[i].empty()) return;
  const TransferRequest req = pending_[i].front();
  pending_[i].pop_front();
  const auto serial = next_transfer_++;
  auto bursts = split_transfer(req, cfg_->data_width, params_->max_burst_beats, serial);
  transfers_[serial] = {req.issue_cycle, static_cast<std::uint32_t>(bursts.size())};
  issue_[i].assign(bursts.begin(), bursts.end());
}

void DmaMaster::complete(Cycle now, Direction d, std::uint32_t id, std::uint64_t tag, bool error) {
  auto& by_id = order_[dir_index(d)];
  auto it = by_id.find(id);
  if (it == by_id.end() || it->second.empty() || it->second.front().tag != tag)
    throw EngineError("master " + to_string(at_) + " received " + std::string(to_string(d)) +
                      " response out of order for id " + std::to_string(id));
  const auto transfer = it->second.front().transfer;
  it->second.pop_front();
  if (it->second.empty()) by_id.erase(it);
  --outstanding_[dir_index(d)];

  const bool counted = now >= window_start;
  if (error && counted) ++decode_errors_window;
  auto t = transfers_.find(transfer);
  if (--t->second.bursts_left == 0) {
    if (counted) {
      latencies.push_back(now - t->second.issue_cycle);
      ++completed_window;
    }
    transfers_.erase(t);
  }
}

void DmaMaster::step(Cycle now) {
  const std::uint32_t beat_bytes = cfg_->beat_bytes();

  if (link_->b.ready(now)) {
    const WriteResponse resp = link_->b.front();
    link_->b.pop();
    complete(now, Direction::Write, resp.id, resp.tag, resp.error);
  }
  if (link_->r.ready(now)) {
    const Beat beat = link_->r.front();
    link_->r.pop();
    auto it = order_[dir_index(Direction::Read)].find(beat.id);
    if (it == order_[dir_index(Direction::Read)].end() || it->second.front().tag != beat.tag)
      throw EngineError("master " + to_string(at_) + " received read data out of order for id " +
                        std::to_string(beat.id));
    read_bytes_all += beat_bytes;
    if (!beat.error && now >= window_start) read_bytes_window += beat_bytes;
    if (beat.last) complete(now, Direction::Read, beat.id, beat.tag, beat.error);
  }

  for (Direction d : {Direction::Write, Direction::Read}) {
    refill(d);
    auto& queue = issue_[dir_index(d)];
    auto& lane = d == Direction::Write ? link_->aw : link_->ar;
    if (queue.empty() || !has_headroom(d) || !lane.can_push()) continue;
    const Burst b = queue.front();
    queue.pop_front();
    const std::uint64_t tag = (static_cast<std::uint64_t>(index_) << 40) | next_tag_++;
    lane.push(now, {b.start_address, b.num_beats, b.id, tag});
    order_[dir_index(d)][b.id].push_back({tag, b.transfer});
    if (d == Direction::Write) w_data_.push_back({tag, b.id, b.num_beats, 0});
    ++outstanding_[dir_index(d)];
    const std::uint32_t held = params_->mot_mode == MotMode::Combined ? outstanding_[0] + outstanding_[1]
                                                                        : outstanding_[dir_index(d)];
    if (held > cfg_->max_outstanding)
      throw EngineError("master " + to_string(at_) + " exceeded the outstanding limit");
    peak_outstanding = std::max(peak_outstanding, held);
  }

  if (!w_data_.empty() && link_->w.can_push()) {
    WriteData& wd = w_data_.front();
    const bool last = wd.next + 1 == wd.beats;
    link_->w.push(now, {wd.id, wd.next, last, false, wd.tag});
    ++wd.next;
    if (last) w_data_.pop_front();
  }
}

bool DmaMaster::idle() const {
  return pending_[0].empty() && pending_[1].empty() && issue_[0].empty() && issue_[1].empty() && w_data_.empty() &&
         outstanding_[0] == 0 && outstanding_[1] == 0;
}

std::uint64_t DmaMaster::resident_bytes() const {
  std::uint64_t total = 0;
  for (const auto& q : pending_)
    for (const auto& r : q) total += r.total_bytes;
  for (const auto& q : issue_)
    for (const auto& b : q) total += b.bytes();
  for (const auto& wd : w_data_) total += std::uint64_t{wd.beats - wd.next} * cfg_->beat_bytes();
  return total;
}

// ---------------------------------------------------------------------------
// MemorySlave

MemorySlave::MemorySlave(Coord at, const NocConfig& cfg, const EngineParams& params, Connection* link)
    : at_(at), beat_bytes_(cfg.beat_bytes()), latency_(params.slave_latency), link_(link) {}

void MemorySlave::step(Cycle now) {
  if (link_->aw.ready(now)) {
    const AddressHeader h = link_->aw.front();
    link_->aw.pop();
    writes_.push_back({h.id, h.tag, h.num_beats});
  }
  if (!writes_.empty() && link_->w.ready(now)) {
    const Beat beat = link_->w.front();
    link_->w.pop();
    PendingWrite& pw = writes_.front();
    --pw.beats_left;
    if ((pw.beats_left == 0) != beat.last)
      throw EngineError("slave " + to_string(at_) + " saw a write burst with a misplaced last beat");
    write_bytes_all += beat_bytes_;
    if (now >= window_start) write_bytes_window += beat_bytes_;
    if (beat.last) {
      b_queue_.push_back({{pw.id, false, pw.tag}, now + latency_});
      writes_.pop_front();
    }
  }
  if (!b_queue_.empty() && b_queue_.front().ready <= now && link_->b.can_push()) {
    link_->b.push(now, b_queue_.front().resp);
    b_queue_.pop_front();
  }
  if (link_->ar.ready(now)) {
    const AddressHeader h = link_->ar.front();
    link_->ar.pop();
    reads_.push_back({h.id, h.tag, h.num_beats, 0, now + latency_});
  }
  if (!reads_.empty() && reads_.front().start <= now && link_->r.can_push()) {
    PendingRead& pr = reads_.front();
    const bool last = pr.next + 1 == pr.beats;
    link_->r.push(now, {pr.id, pr.next, last, false, pr.tag});
    ++pr.next;
    if (last) reads_.pop_front();
  }
}

std::uint64_t MemorySlave::resident_bytes() const {
  std::uint64_t total = 0;
  for (const auto& r : reads_) total += std::uint64_t{r.beats - r.next} * beat_bytes_;
  return total;
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(NocConfig cfg, EngineParams params, TrafficSource* source)
    : cfg_(std::move(cfg)), params_(params), source_(source), mesh_(cfg_) {
  if (params_.fifo_depth == 0) throw ConfigError("fifo_depth", "must be positive");
  if (params_.max_burst_beats == 0 || params_.max_burst_beats > kAxiMaxBeats)
    throw ConfigError("max_burst_beats", "must be in [1, 256]");
  if (params_.command_queue_depth == 0) throw ConfigError("command_queue_depth", "must be positive");
  map_ = allocate_address_map(cfg_);
  tables_ = generate_routing_tables(mesh_, map_, true);

  auto xp_name = [](Coord c) { return "xp" + to_string(c); };
  for (int i = 0; i < mesh_.num_crosspoints(); ++i) {
    auto xp = std::make_unique<Crosspoint>(mesh_.coord_of(i), mesh_, tables_[static_cast<std::size_t>(i)],
                                           cfg_.id_width, cfg_.beat_bytes());
    xp->set_event_log(params_.event_log);
    xp->set_observer(params_.observer);
    xps_.push_back(std::move(xp));
  }
  for (const auto& l : mesh_.links()) {
    for (auto [from, to] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
      Port out = Port::Local;
      for (Port p : kAllPorts)
        if (mesh_.neighbor(from, p) == to) out = p;
      Connection* c = add_connection(xp_name(from), xp_name(to));
      xps_[static_cast<std::size_t>(mesh_.index_of(from))]->attach_egress(out, c);
      xps_[static_cast<std::size_t>(mesh_.index_of(to))]->attach_ingress(opposite(out), c);
    }
  }
  for (Coord m : cfg_.master_coords()) {
    Connection* c = add_connection("m" + to_string(m), xp_name(m));
    xps_[static_cast<std::size_t>(mesh_.index_of(m))]->attach_ingress(Port::Local, c);
    master_at_[mesh_.index_of(m)] = masters_.size();
    masters_.push_back(std::make_unique<DmaMaster>(masters_.size(), m, cfg_, params_, c));
  }
  for (Coord s : cfg_.slave_coords()) {
    Connection* c = add_connection(xp_name(s), "s" + to_string(s));
    xps_[static_cast<std::size_t>(mesh_.index_of(s))]->attach_egress(Port::Local, c);
    slaves_.push_back(std::make_unique<MemorySlave>(s, cfg_, params_, c));
  }
  for (auto& m : masters_) m->window_start = params_.warmup_cycles;
  for (auto& s : slaves_) s->window_start = params_.warmup_cycles;
  window_base_.assign(links_.size(), {});
}

Connection* Simulator::add_connection(std::string from, std::string to) {
  links_.push_back(std::make_unique<Connection>(std::move(from), std::move(to), params_.fifo_depth,
                                                cfg_.register_slice));
  return links_.back().get();
}

InjectResult Simulator::inject(const TransferRequest& req) {
  if (!mesh_.contains(req.master)) throw ValidationError("master " + to_string(req.master) + " outside the mesh");
  auto it = master_at_.find(mesh_.index_of(req.master));
  if (it == master_at_.end()) throw ValidationError("no master endpoint at " + to_string(req.master));
  const auto result = masters_[it->second]->inject(req);
  ++injected_transfers_;
  injected_bytes_ += req.total_bytes;
  return result;
}

void Simulator::pull_traffic() {
  if (!injecting_ || source_ == nullptr) return;
  for (std::size_t i = 0; i < masters_.size(); ++i) {
    DmaMaster& m = *masters_[i];
    while (m.queued() < params_.command_queue_depth) {
      const TransferRequest* r = source_->peek(i);
      if (r == nullptr || r->issue_cycle > now_) break;
      if (r->master != m.at())
        throw ValidationError("traffic for master " + to_string(m.at()) + " names " + to_string(r->master));
      m.inject(*r);
      ++injected_transfers_;
      injected_bytes_ += r->total_bytes;
      source_->pop(i);
    }
  }
}

bool Simulator::source_exhausted() {
  if (source_ == nullptr) return true;
  for (std::size_t i = 0; i < masters_.size(); ++i)
    if (source_->peek(i) != nullptr) return false;
  return true;
}

void Simulator::open_window() {
  for (std::size_t i = 0; i < links_.size(); ++i)
    for (Channel ch : kAllChannels) window_base_[i][static_cast<std::size_t>(index(ch))] = links_[i]->transfers(ch);
  window_open_ = true;
}

void Simulator::step() {
  if (!window_open_ && now_ >= params_.warmup_cycles) open_window();
  pull_traffic();
  for (auto& m : masters_) m->step(now_);
  for (auto& x : xps_) x->step(now_);
  for (auto& s : slaves_) s->step(now_);
  ++now_;
}

void Simulator::run(Cycle cycles) {
  for (Cycle c = 0; c < cycles; ++c) step();
}

bool Simulator::drain(Cycle limit) {
  for (Cycle c = 0; c < limit; ++c) {
    if (idle() && (!injecting_ || source_exhausted())) return true;
    step();
  }
  return idle() && (!injecting_ || source_exhausted());
}

bool Simulator::idle() const {
  for (const auto& m : masters_)
    if (!m->idle()) return false;
  for (const auto& s : slaves_)
    if (!s->idle()) return false;
  for (const auto& x : xps_)
    if (!x->idle()) return false;
  for (const auto& l : links_)
    if (!l->aw.empty() || !l->w.empty() || !l->b.empty() || !l->ar.empty() || !l->r.empty()) return false;
  return true;
}

SimStats Simulator::stats() const {
  SimStats s;
  s.cycles = now_;
  s.warmup_cycles = params_.warmup_cycles;
  s.measured_cycles = now_ > params_.warmup_cycles ? now_ - params_.warmup_cycles : 0;
  s.injected_transfers = injected_transfers_;
  s.injected_bytes = injected_bytes_;
  for (const auto& m : masters_) {
    s.delivered_read_bytes += m->read_bytes_window;
    s.completed_transfers += m->completed_window;
    s.decode_errors += m->decode_errors_window;
    s.latencies.insert(s.latencies.end(), m->latencies.begin(), m->latencies.end());
    s.peak_outstanding = std::max(s.peak_outstanding, m->peak_outstanding);
  }
  for (const auto& sl : slaves_) s.delivered_write_bytes += sl->write_bytes_window;
  s.links.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    LinkStats ls;
    ls.name = links_[i]->from + "->" + links_[i]->to;
    if (window_open_)
      for (Channel ch : kAllChannels) {
        const auto k = static_cast<std::size_t>(index(ch));
        ls.busy[k] = links_[i]->transfers(ch) - window_base_[i][k];
      }
    s.links.push_back(std::move(ls));
  }
  return s;
}

ByteLedger Simulator::byte_ledger() const {
  ByteLedger l;
  l.injected = injected_bytes_;
  const std::uint64_t beat = cfg_.beat_bytes();
  for (const auto& m : masters_) {
    l.delivered += m->read_bytes_all;
    l.resident += m->resident_bytes();
  }
  for (const auto& s : slaves_) {
    l.delivered += s->write_bytes_all;
    l.resident += s->resident_bytes();
  }
  for (const auto& x : xps_) {
    l.delivered += x->absorbed_error_write_bytes();
    l.resident += x->pending_error_read_bytes();
  }
  for (const auto& c : links_) {
    c->ar.for_each([&](const AddressHeader& h) { l.resident += std::uint64_t{h.num_beats} * beat; });
    l.resident += (c->w.size() + c->r.size()) * beat;
  }
  return l;
}

}  // namespace simnoc
