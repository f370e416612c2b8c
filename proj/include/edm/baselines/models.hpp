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
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edm/baselines/packet_fabric.hpp"
#include "edm/sched/scheduler.hpp"

namespace edm::baselines {

// Unloaded completion for a path with fixed host and switch cycles and hop
// counts; serialization of the request tail and of every data block is added.
struct PathShape {
  int write_cycles;
  int write_hops;
  int read_cycles;
  int read_hops;
};
SimTime path_ideal(const ClusterConfig& cfg, const PathShape& shape, MessageKind kind, std::uint32_t size);

// Sender-driven window transport. The pFabric variant swaps the switch queue
// for remaining-size priority with priority drop.
struct ReactiveParams {
  std::uint64_t ecn_threshold_bytes = 16 * 1024;
  std::uint64_t buffer_bytes = 128 * 1024;
  double g = 1.0 / 16;
  std::uint32_t initial_window_packets = 0;  // 0 covers two base round trips
  std::uint32_t max_window_packets = 4096;
  SimTime rto = SimTime::from_ns(50000);
};

class ReactiveFabric final : public PacketFabric {
 public:
  ReactiveFabric(const ClusterConfig& cfg, bool priority_queues, ReactiveParams p = {});
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;
  double window(PortId s, PortId d) const;
  double alpha(PortId s, PortId d) const;

 private:
  struct Outstanding {
    std::uint64_t uid;
    std::uint32_t index;
    SimTime sent_at;
  };
  struct Conn {
    std::uint16_t src = 0;
    std::uint16_t dst = 0;
    std::deque<std::uint64_t> msgs;
    std::deque<std::pair<std::uint64_t, std::uint32_t>> retx;
    std::deque<Outstanding> out;
    double cwnd = 1;
    double ssthresh = 1e9;
    double alpha = 1.0;
    std::uint32_t inflight = 0;
    std::uint32_t win_acks = 0;
    std::uint32_t win_marks = 0;
    std::uint32_t win_target = 1;
    bool timer_armed = false;
    bool active = false;
  };

  void flow_ready(Message& m) override;
  std::optional<Packet> next_data(std::uint16_t h) override;
  void on_delivered(const Packet& p, Message& m, bool duplicate) override;
  void on_host_control(std::uint16_t h, const Packet& p) override;
  std::optional<SimTime> request_timeout() const override { return p_.rto; }

  Conn& conn(std::uint16_t s, std::uint16_t d);
  void activate(Conn& c);
  void purge_front(Conn& c);
  void arm_timer(Conn& c);
  void on_timer(std::uint32_t key);
  // Eligible packet of `c` with its priority, or nothing; earliest is lowered
  // to the time a not-yet-ready message becomes sendable.
  bool peek(Conn& c, std::uint32_t& prio, SimTime& earliest);
  Packet emit(Conn& c);

  ReactiveParams p_;
  bool priority_;
  std::unordered_map<std::uint32_t, Conn> conns_;
  std::vector<std::vector<std::uint32_t>> active_;
  std::vector<std::size_t> rr_;
};

// Lossless Ethernet: per-ingress pause thresholds at the switch and a
// rate-based reaction point driven by congestion notifications.
struct PfcParams {
  std::uint64_t xoff_bytes = 32 * 1024;
  std::uint64_t xon_bytes = 16 * 1024;
  std::uint64_t ecn_threshold_bytes = 16 * 1024;
  double g = 1.0 / 256;
  SimTime cnp_interval = SimTime::from_ns(50000);
  SimTime update_period = SimTime::from_ns(55000);  // alpha decay and rate increase
  int fast_recovery_steps = 5;
  double additive_gbps = 0.04;
  double min_rate_gbps = 0.1;
};

class PfcFabric final : public PacketFabric {
 public:
  explicit PfcFabric(const ClusterConfig& cfg, PfcParams p = {});
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;
  double rate_gbps(PortId s, PortId d) const;
  bool ingress_paused(PortId p) const { return paused_[p.value()]; }

 private:
  struct Conn {
    std::uint16_t src = 0;
    std::uint16_t dst = 0;
    std::deque<std::uint64_t> msgs;
    double rc = 0;
    double rt = 0;
    double alpha = 1.0;
    SimTime next_send;
    SimTime last_cnp_rx;
    bool cnp_sent = false;
    bool cnp_since_update = false;
    int stage = 0;
    bool timer_running = false;
    bool active = false;
  };

  void flow_ready(Message& m) override;
  std::optional<Packet> next_data(std::uint16_t h) override;
  void on_delivered(const Packet& p, Message& m, bool duplicate) override;
  void on_host_control(std::uint16_t h, const Packet& p) override;
  void on_switch_admitted(const Packet& p) override;
  void on_switch_release(const Packet& p) override;

  Conn& conn(std::uint16_t s, std::uint16_t d);
  void on_update(std::uint32_t key);

  PfcParams p_;
  std::unordered_map<std::uint32_t, Conn> conns_;
  std::vector<std::vector<std::uint32_t>> active_;
  std::vector<std::size_t> rr_;
  std::vector<bool> paused_;
};

// Hop-by-hop credits towards the switch: a host sends only while its ingress
// buffer share has room; the switch returns credits as packets leave.
struct CreditParams {
  std::uint32_t ingress_credit_blocks = 1024;
};

class CreditFabric final : public PacketFabric {
 public:
  explicit CreditFabric(const ClusterConfig& cfg, CreditParams p = {});
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;
  std::uint32_t credits(PortId h) const { return credits_[h.value()]; }

 private:
  void flow_ready(Message& m) override;
  std::optional<Packet> next_data(std::uint16_t h) override;
  void on_host_control(std::uint16_t h, const Packet& p) override;
  bool may_send_request(std::uint16_t h, const Packet& p) override { return credits_[h] >= p.blocks; }
  void on_host_sent(std::uint16_t h, const Packet& p) override;
  void on_switch_release(const Packet& p) override;
  void on_switch_control_start(Packet& p) override;

  CreditParams p_;
  std::vector<std::uint32_t> credits_;
  std::vector<std::deque<std::uint64_t>> fifo_;
  std::vector<std::uint32_t> owed_;
  std::vector<bool> credit_queued_;
};

// Grant FIFO shared by the grant-driven models: data leaves in grant order,
// so a sender granted by several receivers serves one and stalls the rest.
struct GrantEntry {
  std::uint64_t uid;
  std::uint32_t index;
  SimTime ready_at;
};

// Receiver-driven: senders announce messages to receivers in zero time; each
// receiver grants chunks to its shortest-remaining message, keeping at most
// `outstanding_chunks` granted but not yet received.
struct IrdParams {
  std::uint32_t outstanding_chunks = 0;  // 0 covers the grant loop
};

class IrdFabric final : public PacketFabric {
 public:
  explicit IrdFabric(const ClusterConfig& cfg, IrdParams p = {});
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;
  std::uint64_t outstanding_limit_bytes() const { return limit_bytes_; }

 private:
  void flow_ready(Message& m) override;
  std::optional<Packet> next_data(std::uint16_t h) override;
  void on_delivered(const Packet& p, Message& m, bool duplicate) override;
  void on_host_control(std::uint16_t h, const Packet& p) override;
  void try_grant(std::uint16_t r);

  std::uint64_t limit_bytes_ = 0;
  std::vector<std::set<std::pair<std::uint32_t, std::uint64_t>>> pending_;  // per receiver
  std::vector<std::uint64_t> outstanding_;
  std::unordered_map<std::uint64_t, std::uint32_t> next_grant_;
  std::vector<std::deque<GrantEntry>> grants_;
};

// Central arbiter on its own switch port. Every allocation request and every
// chunk grant crosses the arbiter link; the matching itself costs nothing.
class FastpassFabric final : public PacketFabric, public sched::GrantSink {
 public:
  explicit FastpassFabric(const ClusterConfig& cfg);
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;
  void on_grant(sched::IssuedGrant g) override;
  PortId arbiter() const { return PortId(static_cast<std::uint16_t>(cfg_.n_ports)); }
  const sim::Link& arbiter_uplink() const { return uplink(arbiter()); }
  const sim::Link& arbiter_downlink() const { return downlink(arbiter()); }

 private:
  void flow_ready(Message& m) override;
  std::optional<Packet> next_data(std::uint16_t h) override;
  void on_host_control(std::uint16_t h, const Packet& p) override;

  std::unique_ptr<sched::Scheduler> arb_;
  std::unordered_map<std::uint32_t, std::deque<std::uint64_t>> waiting_;  // per (sender, receiver)
  std::vector<std::deque<GrantEntry>> grants_;
  std::uint64_t next_id_ = 0;
};

// Fabric names accepted by make_fabric, EDM first.
const std::vector<std::string>& fabric_names();
std::unique_ptr<fabric::Fabric> make_fabric(std::string_view name, const ClusterConfig& cfg);

}  // namespace edm::baselines
