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
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "edm/fabric/fabric.hpp"
#include "edm/sim/engine.hpp"
#include "edm/sim/link.hpp"

namespace edm::baselines {

enum class PacketType : std::uint8_t { kRequest, kData, kAck, kCnp, kCredit, kGrant, kNotify, kPause, kResume };

// Request and data packets use the memory-unit framing; everything else is one block.
struct Packet {
  PacketType type = PacketType::kData;
  std::uint16_t src = 0;
  std::uint16_t dst = 0;
  std::uint64_t msg = 0;
  std::uint32_t index = 0;  // data/ack/grant: packet index; credit: blocks returned
  std::uint32_t len = 0;
  std::uint32_t prio = 0;  // remaining message bytes at send time, lower first
  std::uint32_t blocks = 1;
  std::uint16_t ingress = 0;
  bool ecn = false;

  bool is_control() const { return type != PacketType::kRequest && type != PacketType::kData; }
};

struct Message {
  std::uint64_t uid = 0;
  MessageKind kind = MessageKind::kRreq;
  std::uint16_t requester = 0;
  std::uint16_t memory = 0;
  std::uint16_t sender = 0;  // data direction
  std::uint16_t receiver = 0;
  MessageKind data_kind = MessageKind::kWreq;
  std::uint32_t bytes = 0;  // data bytes
  std::uint32_t n_packets = 0;
  SimTime submit;
  SimTime data_at = SimTime::max();  // sender may put data on the wire from here
  std::uint32_t request_blocks = 1;
  bool request_arrived = false;

  // Sender side. Packet state: 0 pending, 1 in flight, 2 acknowledged.
  std::uint32_t next_new = 0;
  std::vector<std::uint8_t> state;
  std::vector<SimTime> sent_at;
  std::uint32_t acked = 0;
  bool sender_done = false;

  // Receiver side.
  std::vector<bool> got;
  std::uint32_t got_count = 0;
  SimTime first_data = SimTime::max();
  bool received = false;
};

struct SwitchQueueParams {
  std::uint64_t buffer_bytes = 0;  // per egress data queue; 0 is unlimited
  std::uint64_t ecn_bytes = 0;     // mark when the queue holds at least this much; 0 disables
  bool priority = false;           // dequeue and drop by remaining message size
};

struct PacketFabricStats {
  std::uint64_t drops = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t marks = 0;
  std::uint64_t pauses = 0;
  std::uint64_t control_packets = 0;
  std::uint64_t data_packets = 0;
};

// Single-switch rack of simple endpoints with an output-queued, cut-through
// switch. Models plug in sender pacing, switch admission and receiver feedback.
//
// Ports [0, n) are hosts; `extra_ports` more hang off the switch for models
// that need them. Link receiver ports: [0, P) switch ingress, [P, 2P) hosts.
class PacketFabric : public fabric::Fabric, public sim::LinkReceiver {
 public:
  PacketFabric(std::string name, const ClusterConfig& cfg, int extra_ports, SwitchQueueParams queue);
  PacketFabric(const PacketFabric&) = delete;
  PacketFabric& operator=(const PacketFabric&) = delete;

  std::string_view name() const override { return name_; }
  void submit(const fabric::Request& r) override;
  const ClusterConfig& config() const override { return cfg_; }
  sim::Simulator& sim() override { return sim_; }
  fabric::CompletionLog& completions() override { return log_; }
  fabric::FabricCounters counters() const override;
  const sim::Link& uplink(PortId p) const override { return *up_[p.value()]; }
  const sim::Link& downlink(PortId p) const override { return *down_[p.value()]; }
  void enable_utilization(SimTime bucket) override;

  void on_unit(int rx_port, const sim::WireUnit& u, SimTime head, SimTime tail) override;

  const PacketFabricStats& stats() const { return stats_; }
  std::size_t live_messages() const { return msgs_.size(); }
  std::uint64_t ingress_bytes(std::uint16_t port) const { return ingress_bytes_[port]; }
  std::uint64_t egress_data_bytes(std::uint16_t port) const { return sw_[port].data_bytes; }

 protected:
  // Data of `m` may be offered by the sender from m.data_at on.
  virtual void flow_ready(Message& m) = 0;
  // Next data packet host `h` may send now, or nothing.
  virtual std::optional<Packet> next_data(std::uint16_t h) = 0;
  // Receiver saw a data packet at its tail.
  virtual void on_delivered(const Packet&, Message&, bool /*duplicate*/) {}
  virtual void on_host_control(std::uint16_t /*h*/, const Packet&) {}
  virtual bool may_send_request(std::uint16_t /*h*/, const Packet&) { return true; }
  // A request or data packet started on host `h`'s uplink.
  virtual void on_host_sent(std::uint16_t /*h*/, const Packet&) {}
  // A control packet from the switch is about to start; may rewrite its fields.
  virtual void on_switch_control_start(Packet&) {}
  // A request or data packet left the switch buffer (sent or dropped).
  virtual void on_switch_release(const Packet&) {}
  virtual void on_switch_admitted(const Packet&) {}
  // Request retransmission after `timeout` when the network may drop it.
  virtual std::optional<SimTime> request_timeout() const { return std::nullopt; }

  Message* find(std::uint64_t uid);
  Packet data_packet(const Message& m, std::uint32_t index) const;
  void host_send_control(std::uint16_t h, Packet p);
  void switch_send_control(std::uint16_t egress, Packet p);
  void kick_host(std::uint16_t h);
  void wake_host_at(std::uint16_t h, SimTime t);
  void set_host_paused(std::uint16_t h, bool paused);
  bool host_paused(std::uint16_t h) const { return hosts_[h].paused; }
  // Sender has nothing more to do for `m`; the message retires once received.
  void sender_finished(Message& m);
  int ports() const { return n_total_; }
  PacketFabricStats& mutable_stats() { return stats_; }

  ClusterConfig cfg_;
  sim::Simulator sim_;

 private:
  struct HostPort {
    std::deque<Packet> ctrl;
    std::deque<Packet> requests;
    SimTime busy_until;
    SimTime wake_at = SimTime::max();
    bool kick_pending = false;
    bool paused = false;
  };
  struct SwitchPort {
    std::deque<std::uint32_t> ctrl;
    std::deque<std::uint32_t> fifo;
    std::set<std::tuple<std::uint32_t, std::uint64_t, std::uint32_t>> prio;  // (prio, seq, token)
    std::uint64_t data_bytes = 0;
    SimTime busy_until;
    bool kick_pending = false;
  };

  std::uint32_t put(Packet p);
  Packet take(std::uint32_t token);
  void send_request(std::uint64_t uid);
  void host_try_send(std::uint16_t h);
  void switch_kick(std::uint16_t e);
  void switch_try_send(std::uint16_t e);
  void switch_ingress(Packet p, std::uint16_t ingress);
  void drop_token(std::uint32_t token);
  void host_receive(std::uint16_t h, const Packet& p, SimTime head, SimTime tail);
  void on_request_arrived(const Packet& p, SimTime tail);
  void on_data_arrived(const Packet& p, SimTime head, SimTime tail);
  void retire_if_done(std::uint64_t uid);

  std::string name_;
  SwitchQueueParams queue_;
  int n_total_;
  std::vector<std::unique_ptr<sim::Link>> up_;
  std::vector<std::unique_ptr<sim::Link>> down_;
  std::vector<HostPort> hosts_;
  std::vector<SwitchPort> sw_;
  std::vector<std::uint64_t> ingress_bytes_;
  std::vector<Packet> slab_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<std::uint64_t, Message> msgs_;
  std::uint64_t next_uid_ = 1;
  std::uint64_t enqueue_seq_ = 0;
  std::uint64_t submitted_ = 0;
  fabric::CompletionLog log_;
  PacketFabricStats stats_;
  std::uint64_t max_egress_blocks_ = 0;
};

}  // namespace edm::baselines
