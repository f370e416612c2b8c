/*
 * Copyright 2026 The EDM Fabric Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "edm/sched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "edm/phy/codec.hpp"

namespace edm::sched {

std::uint32_t min_chunk_size(int n_ports, double scheduler_clock_ghz, double link_gbps) {
  if (n_ports < 2) throw std::invalid_argument("need at least two ports");
  const double round_ns = 3.0 * std::log2(static_cast<double>(n_ports)) / scheduler_clock_ghz;
  const double bytes = round_ns * link_gbps / 8.0;
  std::uint32_t c = 1;
  while (static_cast<double>(c) < bytes - 1e-9) c <<= 1;
  return c;
}

std::uint32_t min_chunk_size(const ClusterConfig& cfg) {
  return min_chunk_size(cfg.n_ports, cfg.scheduler_clock_ghz, cfg.link_gbps);
}

int SortedDestArray::best_requested(const std::vector<bool>& request) const {
  for (const auto& [key, dst] : order_)
    if (dst < request.size() && request[dst]) return dst;
  return -1;
}

Scheduler::Scheduler(sim::Simulator& sim, const ClusterConfig& cfg, GrantSink* sink, SchedulerOptions opt)
    : sim_(sim),
      cfg_(cfg),
      sink_(sink),
      opt_(opt),
      n_(static_cast<std::uint16_t>(cfg.n_ports)),
      pairs_(static_cast<std::size_t>(cfg.n_ports) * cfg.n_ports),
      heads_(cfg.n_ports),
      sorted_(cfg.n_ports),
      busy_src_(cfg.n_ports, false),
      busy_dst_(cfg.n_ports, false),
      paused_(cfg.n_ports, false),
      dirty_flag_(cfg.n_ports, false),
      round_src_taken_(cfg.n_ports, false) {
  cfg_.validate();
  const std::uint32_t floor = min_chunk_size(cfg_);
  if (opt_.charge_latency && cfg_.chunk_bytes < floor)
    std::cerr << "warning: chunk " << cfg_.chunk_bytes << " B is below the " << floor
              << " B needed to hide matching latency; expect idle gaps between chunks\n";
}

PriorityKey Scheduler::key_of(const NotificationRecord& r) const {
  PriorityKey k;
  k.primary = cfg_.priority_policy == PriorityPolicy::kSrpt ? static_cast<std::int64_t>(r.remaining_bytes)
                                                           : r.enqueued_at.ps();
  k.enqueued_ps = r.enqueued_at.ps();
  k.src = r.src.value();
  k.id = r.id.value();
  k.seq = r.seq;
  return k;
}

void Scheduler::unlink_head(std::uint16_t s, std::uint16_t d) {
  const Pair& p = pair(s, d);
  if (p.fifo.empty()) return;
  const PriorityKey k = key_of(p.fifo.front().rec);
  heads_[d].erase(k);
  sorted_[s].erase(k, d);
}

void Scheduler::link_head(std::uint16_t s, std::uint16_t d) {
  Pair& p = pair(s, d);
  if (p.fifo.empty()) return;
  p.fifo.front().rec.priority = key_of(p.fifo.front().rec).primary;
  const PriorityKey k = key_of(p.fifo.front().rec);
  heads_[d].insert(k);
  sorted_[s].insert(k, d);
}

void Scheduler::mark_dirty(std::uint16_t d) {
  if (dirty_flag_[d]) return;
  dirty_flag_[d] = true;
  dirty_.push_back(d);
}

void Scheduler::mark_source_released(std::uint16_t s) {
  sorted_[s].for_each_dst([this](std::uint16_t d) { mark_dirty(d); });
}

void Scheduler::mark_all_dirty() {
  for (std::uint16_t d = 0; d < n_; ++d) mark_dirty(d);
}

void Scheduler::reset_busy() {
  std::fill(busy_src_.begin(), busy_src_.end(), false);
  std::fill(busy_dst_.begin(), busy_dst_.end(), false);
  mark_all_dirty();
}

NotifyResult Scheduler::on_notification(NotificationRecord rec, std::vector<phy::PhyBlock> buffered_request) {
  const std::uint16_t s = rec.src.value();
  const std::uint16_t d = rec.dst.value();
  if (s >= n_ || d >= n_ || s == d) throw std::invalid_argument("notification endpoints out of range");
  if (rec.total_bytes == 0) throw std::invalid_argument("notification for an empty message");
  Pair& p = pair(s, d);
  // X bounds each originator separately: explicit records come from the data
  // sender, implicit ones from the reader on the far side of the pair.
  const auto same_origin = std::count_if(p.fifo.begin(), p.fifo.end(), [&](const QueuedRecord& q) {
    return q.rec.is_implicit_rreq == rec.is_implicit_rreq;
  });
  if (same_origin >= cfg_.max_active_notifications) {
    ++stats_.rejected;
    return NotifyResult::kRejected;
  }
  rec.remaining_bytes = rec.total_bytes;
  rec.enqueued_at = sim_.now();
  rec.seq = next_seq_++;
  rec.priority = key_of(rec).primary;
  const bool was_empty = p.fifo.empty();
  p.fifo.push_back(QueuedRecord{rec, std::move(buffered_request), 0});
  if (was_empty) link_head(s, d);
  log("NTF", s, d, rec.id.value(), rec.total_bytes);
  mark_dirty(d);
  request_round();
  return NotifyResult::kAccepted;
}

void Scheduler::pause(PortId d) {
  paused_[d.value()] = true;
  log("PAUSE", d.value(), d.value(), 0, 0);
}

void Scheduler::resume(PortId d) {
  if (!paused_[d.value()]) return;
  paused_[d.value()] = false;
  log("RESUME", d.value(), d.value(), 0, 0);
  mark_dirty(d.value());
  request_round();
}

std::vector<Match> Scheduler::pim_iteration(std::vector<std::uint16_t>& candidates) {
  // Phase 1: each candidate destination proposes its best record whose source is idle.
  struct Proposal {
    PriorityKey key;
    std::uint16_t dst;
  };
  std::vector<std::pair<std::uint16_t, Proposal>> proposals;
  proposals.reserve(candidates.size());
  std::size_t keep = 0;
  for (std::uint16_t d : candidates) {
    if (busy_dst_[d] || paused_[d]) continue;
    for (const PriorityKey& k : heads_[d]) {
      if (busy_src_[k.src]) continue;
      proposals.push_back({k.src, Proposal{k, d}});
      candidates[keep++] = d;
      break;
    }
  }
  candidates.resize(keep);

  // Phase 2: each source accepts its best proposal.
  std::sort(proposals.begin(), proposals.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.key < b.second.key;
  });
  std::vector<Match> matches;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (i > 0 && proposals[i].first == proposals[i - 1].first) continue;
    matches.push_back(Match{proposals[i].first, proposals[i].second.dst, 0});
  }

  // Phase 3: matched endpoints become busy.
  for (const Match& m : matches) {
    busy_src_[m.src] = true;
    busy_dst_[m.dst] = true;
  }
  std::erase_if(candidates, [this](std::uint16_t d) { return busy_dst_[d]; });
  return matches;
}

RoundResult Scheduler::compute_matching() {
  std::vector<std::uint16_t> candidates;
  candidates.reserve(dirty_.size());
  for (std::uint16_t d : dirty_) {
    dirty_flag_[d] = false;
    if (!busy_dst_[d] && !paused_[d] && !heads_[d].empty()) candidates.push_back(d);
  }
  dirty_.clear();
  RoundResult r;
  while (!candidates.empty()) {
    auto m = pim_iteration(candidates);
    if (m.empty()) break;
    ++r.iterations;
    for (auto& x : m) {
      x.iteration = r.iterations;
      r.matches.push_back(x);
    }
  }
  return r;
}

std::vector<Match> Scheduler::eligible_unmatched() const {
  std::vector<Match> out;
  for (std::uint16_t s = 0; s < n_; ++s) {
    if (busy_src_[s]) continue;
    for (std::uint16_t d = 0; d < n_; ++d)
      if (!busy_dst_[d] && !paused_[d] && !pair(s, d).fifo.empty()) out.push_back(Match{s, d, 0});
  }
  return out;
}

std::size_t Scheduler::queue_size(PortId d) const {
  std::size_t n = 0;
  for (std::uint16_t s = 0; s < n_; ++s) n += pair(s, d.value()).fifo.size();
  return n;
}

std::size_t Scheduler::pair_count(PortId s, PortId d) const { return pair(s.value(), d.value()).fifo.size(); }

SimTime Scheduler::iteration_latency(int iteration) const {
  if (!opt_.charge_latency) return SimTime::zero();
  const auto& c = cfg_.latency.sched;
  return cfg_.sched_cycles(c.head_read + c.per_iteration * iteration);
}

SimTime Scheduler::release_lead() const { return opt_.early_release ? iteration_latency(1) : SimTime::zero(); }

SimTime Scheduler::chunk_wire_time(MessageKind data_kind, std::uint32_t offset, std::uint32_t len, bool last) const {
  const auto blocks = phy::memory_block_count(data_kind, len, 0, offset, last);
  return cfg_.slot() * static_cast<std::int64_t>(blocks);
}

void Scheduler::request_round() {
  if (round_pending_) return;
  round_pending_ = true;
  sim_.schedule_at(sim_.now(), [this] { run_round(); });
}

void Scheduler::run_round() {
  round_pending_ = false;
  RoundResult r = compute_matching();
  if (r.matches.empty()) return;
  ++stats_.rounds;
  stats_.iteration_sum += static_cast<std::uint64_t>(r.iterations);
  for (const Match& m : r.matches) {
    const std::uint16_t s = m.src;
    const std::uint16_t d = m.dst;
    const int it = m.iteration;
    sim_.schedule_in(iteration_latency(it), [this, s, d, it] { emit(s, d, it); });
  }
}

void Scheduler::emit(std::uint16_t s, std::uint16_t d, int iteration) {
  Pair& p = pair(s, d);
  if (paused_[d] || p.fifo.empty()) {
    // Destination paused after accept: drop the grant, keep the record.
    ++stats_.cancelled;
    busy_src_[s] = false;
    busy_dst_[d] = false;
    mark_dirty(d);
    mark_source_released(s);
    request_round();
    return;
  }
  QueuedRecord& q = p.fifo.front();
  IssuedGrant g;
  g.src = PortId(s);
  g.dst = PortId(d);
  g.id = q.rec.id;
  g.len = std::min(cfg_.chunk_bytes, q.rec.remaining_bytes);
  g.offset = q.rec.total_bytes - q.rec.remaining_bytes;
  g.last = g.len == q.rec.remaining_bytes;
  g.data_kind = q.rec.is_implicit_rreq ? MessageKind::kRres : MessageKind::kWreq;
  g.iteration = iteration;
  if (q.rec.is_implicit_rreq && q.granted_bytes == 0) {
    g.implicit_first = true;
    g.forwarded_request = std::move(q.buffered_request);
  }
  unlink_head(s, d);
  q.rec.remaining_bytes -= g.len;
  q.granted_bytes += g.len;
  if (q.rec.remaining_bytes == 0) p.fifo.erase(p.fifo.begin());
  link_head(s, d);

  ++stats_.grants;
  stats_.granted_bytes += g.len;
  log("GRANT", s, d, g.id.value(), g.len);

  const SimTime wire = chunk_wire_time(g.data_kind, g.offset, g.len, g.last);
  const SimTime lead = std::min(release_lead(), wire);
  sim_.schedule_in(wire - lead, [this, s, d] { release(s, d); });
  if (sink_ != nullptr) sink_->on_grant(std::move(g));
}

void Scheduler::release(std::uint16_t s, std::uint16_t d) {
  busy_src_[s] = false;
  busy_dst_[d] = false;
  log("RELEASE", s, d, 0, 0);
  mark_dirty(d);
  mark_source_released(s);
  request_round();
}

void Scheduler::log(const char* ev, std::uint16_t s, std::uint16_t d, std::uint8_t id, std::uint32_t bytes) {
  if (log_ == nullptr) return;
  *log_ << sim_.now().ps() << ',' << ev << ',' << s << ',' << d << ',' << static_cast<int>(id) << ',' << bytes
        << '\n';
}

}  // namespace edm::sched
