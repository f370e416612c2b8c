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
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edm/core/latency.hpp"
#include "edm/core/types.hpp"
#include "edm/fabric/fabric.hpp"
#include "edm/host/memory_store.hpp"
#include "edm/phy/codec.hpp"
#include "edm/sim/engine.hpp"
#include "edm/sim/link.hpp"
#include "edm/sim/unit_store.hpp"

namespace edm::host {

// Receive-buffer occupancy drained at a fixed rate. Signals one PAUSE per upward
// crossing of the threshold and one RESUME per downward crossing.
class RxBufferGauge {
 public:
  RxBufferGauge() = default;
  // drain_gbps == 0 drains instantly.
  RxBufferGauge(std::uint64_t thres_bytes, double drain_gbps) : thres_(thres_bytes), drain_gbps_(drain_gbps) {}

  // Adds bytes at `now`; true on an upward crossing.
  bool add(std::uint64_t bytes, SimTime now);
  // True on a downward crossing observed at `now`.
  bool poll(SimTime now);
  // Earliest time the occupancy falls below the threshold.
  SimTime below_threshold_at() const;
  double occupancy(SimTime now) const;
  bool paused_sent() const { return paused_sent_; }
  std::uint64_t thres_bytes() const { return thres_; }

 private:
  void advance(SimTime now);

  std::uint64_t thres_ = 0;
  double drain_gbps_ = 0.0;
  double occ_ = 0.0;
  SimTime at_;
  bool paused_sent_ = false;
};

// Measurement hooks the fabric uses to build the completion log.
class HostObserver {
 public:
  virtual ~HostObserver() = default;
  virtual void on_read_complete(fabric::CompletionRecord r) = 0;
  // A WREQ left the TX queue: its notification is on the wire.
  virtual void on_write_issued(PortId src, PortId dst, MessageId id, SimTime submit, std::uint32_t bytes) = 0;
  // Memory node finished the last chunk of one constituent write from `src`.
  virtual void on_write_landed(PortId src, PortId at, MessageId id, SimTime first_data, SimTime done) = 0;
};

struct HostStats {
  std::uint64_t notifications = 0;
  std::uint64_t requests = 0;
  std::uint64_t chunks_sent = 0;
  std::uint64_t data_bytes_sent = 0;
  std::uint64_t grants_received = 0;
  std::uint64_t granted_bytes = 0;
  std::uint64_t pauses_sent = 0;
  std::uint64_t resumes_sent = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t late_responses_dropped = 0;
  std::uint64_t nacks = 0;
  std::uint64_t id_stalls = 0;
};

// One EDM endpoint. Acts as a compute node for requests it originates and as a
// memory node for requests addressed to it.
class EdmHost final : public sim::LinkReceiver {
 public:
  EdmHost(sim::Simulator& sim, const ClusterConfig& cfg, PortId self, sim::UnitStore& store, HostObserver* obs);
  EdmHost(const EdmHost&) = delete;
  EdmHost& operator=(const EdmHost&) = delete;

  // Uplink towards the switch; the switch is its receiver.
  void connect(sim::LinkReceiver* sw);
  sim::Link& uplink() { return *uplink_; }
  const sim::Link& uplink() const { return *uplink_; }

  // Queues a request at now(). Throws on loopback or an empty payload.
  // Returns the submission sequence number; wire ids are bound at dequeue.
  std::uint64_t submit(const fabric::Request& r);

  void on_unit(int rx_port, const sim::WireUnit& u, SimTime head, SimTime tail) override;

  // Failure injection: a failed host drops everything it receives and stops sending.
  void set_failed(bool failed) { failed_ = failed; }
  bool failed() const { return failed_; }

  MemoryStore& memory() { return memory_; }
  const MemoryStore& memory() const { return memory_; }
  const HostStats& stats() const { return stats_; }
  PortId id() const { return self_; }
  std::size_t queued() const { return queued_; }
  std::size_t state_entries() const { return writes_.size() + reads_.size() + serves_.size(); }
  std::size_t active_writes(PortId dst) const { return peers_[dst.value()].active_writes; }
  std::size_t active_reads(PortId dst) const { return peers_[dst.value()].active_reads; }
  const RxBufferGauge& rx_gauge() const { return gauge_; }
  bool keep_results() const { return keep_results_; }
  void set_keep_results(bool keep) { keep_results_ = keep; }

 private:
  struct Segment {
    std::uint64_t addr;
    std::uint32_t begin;  // offset within the notified message
    std::uint32_t len;
    std::vector<std::uint8_t> data;
  };
  struct Pending {
    fabric::Request req;
    SimTime submit;
    std::vector<std::uint8_t> data;
  };
  struct WriteState {
    std::vector<Segment> segments;
    std::uint32_t total = 0;
    std::uint32_t granted = 0;
    std::uint32_t sent = 0;
  };
  struct ReadState {
    MessageKind kind;
    fabric::Request req;
    SimTime submit;
    SimTime first_data = SimTime::max();
    std::uint32_t expected = 0;
    std::uint32_t received = 0;
    std::vector<std::uint8_t> buffer;
    std::uint64_t generation = 0;
    bool nack = false;
  };
  struct ServeState {
    std::uint32_t total = 0;
    std::uint32_t sent = 0;
    bool nack = false;
    std::vector<std::uint8_t> data;
  };
  struct PeerState {
    std::deque<Pending> queue;
    std::vector<bool> id_used = std::vector<bool>(kMaxMessageIds, false);
    std::uint16_t next_id = 0;
    std::uint32_t ids_in_use = 0;
    std::uint32_t active_writes = 0;
    std::uint32_t active_reads = 0;
    bool in_ready = false;
  };

  void try_dequeue();
  bool dequeue_one(PeerState& p, PortId dst);
  std::optional<MessageId> alloc_id(PeerState& p);
  void free_id(PortId peer, MessageId id);
  void send_unit(std::vector<phy::PhyBlock> blocks, sim::TxClass cls, SimTime at);
  void send_now(std::vector<phy::PhyBlock> blocks, sim::TxClass cls);

  void handle_grant(const phy::PhyBlock& g, SimTime head);
  void send_write_chunk(PortId dst, MessageId id, std::uint32_t len);
  void handle_request(phy::MessageUnit m, SimTime tail);
  // Grant-queue order: data leaves in the order its grants arrived.
  SimTime reserve_data_slot(SimTime earliest);
  void send_rres_chunk(PortId requester, MessageId id, std::uint32_t len);
  void handle_rres(const phy::MessageUnit& m, SimTime head, SimTime tail);
  void handle_wreq_data(const phy::MessageUnit& m, SimTime head, SimTime tail);
  void finish_read(PeerMessageKey key, SimTime at, bool null_response);
  void on_read_timeout(PeerMessageKey key, std::uint64_t generation);
  void account_rx(std::uint32_t bytes, SimTime at);
  void check_resume();

  sim::Simulator& sim_;
  ClusterConfig cfg_;
  PortId self_;
  sim::UnitStore& store_;
  HostObserver* obs_;
  std::unique_ptr<sim::Link> uplink_;
  MemoryStore memory_;
  RxBufferGauge gauge_;
  bool failed_ = false;
  bool keep_results_ = true;
  bool resume_check_pending_ = false;
  SimTime data_tail_;

  std::vector<PeerState> peers_;
  std::deque<std::uint16_t> ready_;  // destinations with queued requests, round robin
  std::size_t queued_ = 0;
  std::uint64_t submit_seq_ = 0;
  std::uint64_t next_generation_ = 1;

  std::unordered_map<PeerMessageKey, WriteState> writes_;
  std::unordered_map<PeerMessageKey, ReadState> reads_;
  std::unordered_map<PeerMessageKey, ServeState> serves_;
  std::unordered_set<PeerMessageKey> tombstones_;
  // Write chunks partially received, keyed by source.
  std::unordered_map<PeerMessageKey, SimTime> write_first_data_;
  HostStats stats_;
};

}  // namespace edm::host
