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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <vector>

#include "edm/core/latency.hpp"
#include "edm/core/types.hpp"
#include "edm/phy/block.hpp"
#include "edm/sim/engine.hpp"

namespace edm::sched {

// Smallest power-of-two chunk whose payload transmission time covers one
// matching round of log2(N) iterations at 3 cycles each.
std::uint32_t min_chunk_size(int n_ports, double scheduler_clock_ghz, double link_gbps);
std::uint32_t min_chunk_size(const ClusterConfig& cfg);

// Total order used everywhere a priority is compared. Lower wins.
struct PriorityKey {
  std::int64_t primary = 0;
  std::int64_t enqueued_ps = 0;
  std::uint16_t src = 0;
  std::uint8_t id = 0;
  std::uint64_t seq = 0;
  auto operator<=>(const PriorityKey&) const = default;
};

struct QueuedRecord {
  NotificationRecord rec;
  std::vector<phy::PhyBlock> buffered_request;  // implicit demand: the request to forward as first grant
  std::uint32_t granted_bytes = 0;
};

// Per-source view of pair heads ordered by priority; phase 2 picks the first
// requested entry, as a priority encoder over the request bitmask would.
class SortedDestArray {
 public:
  void insert(const PriorityKey& k, std::uint16_t dst) { order_.insert({k, dst}); }
  void erase(const PriorityKey& k, std::uint16_t dst) { order_.erase({k, dst}); }
  // First destination in priority order whose request bit is set, or -1.
  int best_requested(const std::vector<bool>& request) const;
  std::size_t size() const { return order_.size(); }
  template <typename F>
  void for_each_dst(F&& f) const {
    for (const auto& e : order_) f(e.second);
  }

 private:
  std::set<std::pair<PriorityKey, std::uint16_t>> order_;
};

struct IssuedGrant {
  PortId src;  // sender of the data
  PortId dst;  // receiver of the data
  MessageId id;
  std::uint32_t offset = 0;
  std::uint32_t len = 0;
  bool last = false;
  bool implicit_first = false;
  MessageKind data_kind = MessageKind::kWreq;
  std::vector<phy::PhyBlock> forwarded_request;
  int iteration = 0;
};

class GrantSink {
 public:
  virtual ~GrantSink() = default;
  virtual void on_grant(IssuedGrant g) = 0;
};

struct Match {
  std::uint16_t src;
  std::uint16_t dst;
  int iteration;
};

struct RoundResult {
  std::vector<Match> matches;
  int iterations = 0;  // iterations that produced at least one match
};

enum class NotifyResult { kAccepted, kRejected };

struct SchedulerOptions {
  bool charge_latency = true;  // false models an infinitely fast arbiter
  bool early_release = true;   // release one matching latency before the chunk ends
};

struct SchedulerStats {
  std::uint64_t rounds = 0;
  std::uint64_t grants = 0;
  std::uint64_t cancelled = 0;
  std::uint64_t rejected = 0;
  std::uint64_t iteration_sum = 0;
  std::uint64_t granted_bytes = 0;
};

// Centralized in-switch scheduler: per-destination notification queues,
// priority PIM, chunked grants and port reservations.
//
// Rounds run when a notification arrives, a port is released or a destination
// resumes. Matching state changes at round time; the grant leaves the scheduler
// (head_read + per_iteration * k) cycles later for a match found in iteration k.
// Ports are released at emission + wire(chunk) - lead, lead being the latency
// of a one-iteration round, so a persistent pair's next grant lands exactly
// when its previous chunk ends.
class Scheduler {
 public:
  Scheduler(sim::Simulator& sim, const ClusterConfig& cfg, GrantSink* sink, SchedulerOptions opt = {});

  NotifyResult on_notification(NotificationRecord rec, std::vector<phy::PhyBlock> buffered_request = {});
  void pause(PortId d);
  void resume(PortId d);

  // Synchronous matching over the current state; marks matched ports busy and
  // returns without emitting grants. Used by the event path and by tests.
  RoundResult compute_matching();
  // One PIM iteration over the candidate destinations. Exposed for tests.
  std::vector<Match> pim_iteration(std::vector<std::uint16_t>& candidates);
  void mark_all_dirty();
  // Clears busy state set by compute_matching in tests.
  void reset_busy();

  // Records with both endpoints idle and destination unpaused. Empty after a round.
  std::vector<Match> eligible_unmatched() const;

  std::size_t queue_size(PortId d) const;
  std::size_t pair_count(PortId s, PortId d) const;
  bool busy_as_source(PortId p) const { return busy_src_[p.value()]; }
  bool busy_as_destination(PortId p) const { return busy_dst_[p.value()]; }
  bool paused(PortId d) const { return paused_[d.value()]; }
  const SortedDestArray& sorted_dests(PortId s) const { return sorted_[s.value()]; }
  const SchedulerStats& stats() const { return stats_; }
  std::uint32_t chunk_bytes() const { return cfg_.chunk_bytes; }

  SimTime iteration_latency(int iteration) const;
  SimTime release_lead() const;
  SimTime chunk_wire_time(MessageKind data_kind, std::uint32_t offset, std::uint32_t len, bool last) const;

  void set_event_log(std::ostream* os) { log_ = os; }

 private:
  struct Pair {
    std::vector<QueuedRecord> fifo;
  };

  Pair& pair(std::uint16_t s, std::uint16_t d) { return pairs_[static_cast<std::size_t>(s) * n_ + d]; }
  const Pair& pair(std::uint16_t s, std::uint16_t d) const { return pairs_[static_cast<std::size_t>(s) * n_ + d]; }
  PriorityKey key_of(const NotificationRecord& r) const;
  void unlink_head(std::uint16_t s, std::uint16_t d);
  void link_head(std::uint16_t s, std::uint16_t d);
  void mark_dirty(std::uint16_t d);
  void mark_source_released(std::uint16_t s);
  void request_round();
  void run_round();
  void emit(std::uint16_t s, std::uint16_t d, int iteration);
  void release(std::uint16_t s, std::uint16_t d);
  void log(const char* ev, std::uint16_t s, std::uint16_t d, std::uint8_t id, std::uint32_t bytes);

  sim::Simulator& sim_;
  ClusterConfig cfg_;
  GrantSink* sink_;
  SchedulerOptions opt_;
  std::uint16_t n_;
  std::vector<Pair> pairs_;
  std::vector<std::set<PriorityKey>> heads_;  // per destination, over pair heads
  std::vector<SortedDestArray> sorted_;       // per source
  std::vector<bool> busy_src_;
  std::vector<bool> busy_dst_;
  std::vector<bool> paused_;
  std::vector<bool> dirty_flag_;
  std::vector<std::uint16_t> dirty_;
  std::vector<bool> round_src_taken_;
  bool round_pending_ = false;
  std::uint64_t next_seq_ = 0;
  SchedulerStats stats_;
  std::ostream* log_ = nullptr;
};

}  // namespace edm::sched
