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

#include "edm/baselines/packet_fabric.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "edm/phy/codec.hpp"

namespace edm::baselines {

PacketFabric::PacketFabric(std::string name, const ClusterConfig& cfg, int extra_ports, SwitchQueueParams queue)
    : cfg_(cfg), name_(std::move(name)), queue_(queue), n_total_(cfg.n_ports + extra_ports) {
  cfg_.validate();
  if (extra_ports < 0 || n_total_ > kMaxPorts) throw std::invalid_argument("too many ports");
  const auto n = static_cast<std::size_t>(n_total_);
  hosts_.resize(n);
  sw_.resize(n);
  ingress_bytes_.assign(n, 0);
  for (int p = 0; p < n_total_; ++p) {
    up_.push_back(std::make_unique<sim::Link>(sim_, "up" + std::to_string(p), cfg_.slot(), cfg_.latency.hop_fixed(),
                                              this, p));
    down_.push_back(std::make_unique<sim::Link>(sim_, "down" + std::to_string(p), cfg_.slot(),
                                                cfg_.latency.hop_fixed(), this, n_total_ + p));
  }
}

fabric::FabricCounters PacketFabric::counters() const {
  fabric::FabricCounters c;
  c.submitted = submitted_;
  c.completed = log_.size();
  c.drops = stats_.drops;
  c.retransmits = stats_.retransmits;
  c.pauses = stats_.pauses;
  c.max_egress_data_blocks = max_egress_blocks_;
  return c;
}

void PacketFabric::enable_utilization(SimTime bucket) {
  for (int p = 0; p < cfg_.n_ports; ++p) {
    up_[static_cast<std::size_t>(p)]->enable_utilization(bucket);
    down_[static_cast<std::size_t>(p)]->enable_utilization(bucket);
  }
}

std::uint32_t PacketFabric::put(Packet p) {
  if (!free_.empty()) {
    const std::uint32_t t = free_.back();
    free_.pop_back();
    slab_[t] = p;
    return t;
  }
  slab_.push_back(p);
  return static_cast<std::uint32_t>(slab_.size() - 1);
}

Packet PacketFabric::take(std::uint32_t token) {
  free_.push_back(token);
  return slab_[token];
}

Message* PacketFabric::find(std::uint64_t uid) {
  auto it = msgs_.find(uid);
  return it == msgs_.end() ? nullptr : &it->second;
}

Packet PacketFabric::data_packet(const Message& m, std::uint32_t index) const {
  Packet p;
  p.type = PacketType::kData;
  p.src = m.sender;
  p.dst = m.receiver;
  p.msg = m.uid;
  p.index = index;
  const std::uint32_t off = index * cfg_.chunk_bytes;
  p.len = std::min(cfg_.chunk_bytes, m.bytes - off);
  p.prio = m.bytes - off;
  p.blocks = static_cast<std::uint32_t>(phy::memory_block_count(m.data_kind, p.len, 0, off, off + p.len == m.bytes));
  return p;
}

void PacketFabric::submit(const fabric::Request& r) {
  if (r.src.value() >= cfg_.n_ports || r.dst.value() >= cfg_.n_ports) throw std::invalid_argument("port out of range");
  if (r.src == r.dst) throw std::invalid_argument("loopback request");
  if (r.kind == MessageKind::kRres) throw std::invalid_argument("responses are not requests");
  if (r.kind != MessageKind::kRmwreq && r.size == 0) throw std::invalid_argument("empty request");
  ++submitted_;
  const std::uint64_t uid = next_uid_++;
  Message& m = msgs_[uid];
  m.uid = uid;
  m.kind = r.kind;
  m.requester = r.src.value();
  m.memory = r.dst.value();
  m.submit = sim_.now();
  m.bytes = std::max<std::uint32_t>(1, fabric::data_bytes(r.kind, r.size, r.opcode));
  const bool write = r.kind == MessageKind::kWreq;
  m.sender = write ? m.requester : m.memory;
  m.receiver = write ? m.memory : m.requester;
  m.data_kind = write ? MessageKind::kWreq : MessageKind::kRres;
  m.n_packets = (m.bytes + cfg_.chunk_bytes - 1) / cfg_.chunk_bytes;
  m.state.assign(m.n_packets, 0);
  m.sent_at.assign(m.n_packets, SimTime::zero());
  m.got.assign(m.n_packets, false);
  const auto gen = cfg_.latency.cycles(cfg_.latency.host.ntf_gen);
  if (write) {
    m.data_at = sim_.now() + gen;
    flow_ready(m);
    return;
  }
  m.request_blocks = static_cast<std::uint32_t>(
      phy::memory_block_count(r.kind, r.kind == MessageKind::kRmwreq ? kRmwArgBytes : r.size, r.addr));
  sim_.schedule_in(gen, [this, uid] { send_request(uid); });
}

void PacketFabric::send_request(std::uint64_t uid) {
  Message* m = find(uid);
  if (m == nullptr || m->request_arrived) return;
  Packet p;
  p.type = PacketType::kRequest;
  p.src = m->requester;
  p.dst = m->memory;
  p.msg = uid;
  p.blocks = m->request_blocks;
  p.prio = m->bytes;
  hosts_[p.src].requests.push_back(p);
  kick_host(p.src);
  if (const auto rto = request_timeout()) {
    sim_.schedule_in(*rto, [this, uid] {
      Message* mm = find(uid);
      if (mm == nullptr || mm->request_arrived) return;
      ++stats_.retransmits;
      send_request(uid);
    });
  }
}

void PacketFabric::host_send_control(std::uint16_t h, Packet p) {
  hosts_[h].ctrl.push_back(p);
  kick_host(h);
}

void PacketFabric::switch_send_control(std::uint16_t egress, Packet p) {
  sw_[egress].ctrl.push_back(put(p));
  switch_kick(egress);
}

void PacketFabric::kick_host(std::uint16_t h) {
  HostPort& hp = hosts_[h];
  if (hp.kick_pending) return;
  hp.kick_pending = true;
  sim_.schedule_at(std::max(sim_.now(), hp.busy_until), [this, h] { host_try_send(h); });
}

void PacketFabric::wake_host_at(std::uint16_t h, SimTime t) {
  HostPort& hp = hosts_[h];
  if (t <= sim_.now()) {
    kick_host(h);
    return;
  }
  if (hp.wake_at <= t && hp.wake_at > sim_.now()) return;
  hp.wake_at = t;
  sim_.schedule_at(t, [this, h, t] {
    if (hosts_[h].wake_at == t) hosts_[h].wake_at = SimTime::max();
    kick_host(h);
  });
}

void PacketFabric::set_host_paused(std::uint16_t h, bool paused) {
  hosts_[h].paused = paused;
  if (!paused) kick_host(h);
}

void PacketFabric::host_try_send(std::uint16_t h) {
  HostPort& hp = hosts_[h];
  hp.kick_pending = false;
  if (sim_.now() < hp.busy_until) {
    kick_host(h);
    return;
  }
  std::optional<Packet> p;
  if (!hp.ctrl.empty()) {
    p = hp.ctrl.front();
    hp.ctrl.pop_front();
  } else if (!hp.paused) {
    if (!hp.requests.empty()) {
      if (may_send_request(h, hp.requests.front())) {
        p = hp.requests.front();
        hp.requests.pop_front();
      }
    } else {
      p = next_data(h);
    }
  }
  if (!p) return;
  if (p->is_control()) {
    ++stats_.control_packets;
  } else {
    on_host_sent(h, *p);
    if (p->type == PacketType::kData) ++stats_.data_packets;
  }
  sim::WireUnit u;
  u.n_blocks = p->blocks;
  u.token = put(*p);
  u.not_before = sim_.now();
  up_[h]->send(u);
  hp.busy_until = sim_.now() + cfg_.slot() * static_cast<std::int64_t>(p->blocks);
  kick_host(h);
}

void PacketFabric::switch_kick(std::uint16_t e) {
  SwitchPort& sp = sw_[e];
  if (sp.kick_pending) return;
  sp.kick_pending = true;
  sim_.schedule_at(std::max(sim_.now(), sp.busy_until), [this, e] { switch_try_send(e); });
}

void PacketFabric::switch_try_send(std::uint16_t e) {
  SwitchPort& sp = sw_[e];
  sp.kick_pending = false;
  if (sim_.now() < sp.busy_until) {
    switch_kick(e);
    return;
  }
  std::uint32_t token = 0;
  if (!sp.ctrl.empty()) {
    token = sp.ctrl.front();
    sp.ctrl.pop_front();
    on_switch_control_start(slab_[token]);
  } else if (!sp.fifo.empty()) {
    token = sp.fifo.front();
    sp.fifo.pop_front();
  } else if (!sp.prio.empty()) {
    token = std::get<2>(*sp.prio.begin());
    sp.prio.erase(sp.prio.begin());
  } else {
    return;
  }
  const Packet& p = slab_[token];
  if (!p.is_control()) {
    const std::uint64_t bytes = std::uint64_t{p.blocks} * 8;
    sp.data_bytes -= bytes;
    ingress_bytes_[p.ingress] -= bytes;
    on_switch_release(p);
  }
  sim::WireUnit u;
  u.n_blocks = slab_[token].blocks;
  u.token = token;
  u.not_before = sim_.now();
  down_[e]->send(u);
  sp.busy_until = sim_.now() + cfg_.slot() * static_cast<std::int64_t>(u.n_blocks);
  switch_kick(e);
}

void PacketFabric::on_unit(int rx_port, const sim::WireUnit& u, SimTime head, SimTime tail) {
  Packet p = take(static_cast<std::uint32_t>(u.token));
  if (rx_port < n_total_) {
    const auto ingress = static_cast<std::uint16_t>(rx_port);
    const auto& l = cfg_.latency;
    sim_.schedule_at(head + l.cycles(l.sw.classify + l.sw.forward),
                     [this, p, ingress] { switch_ingress(p, ingress); });
    return;
  }
  host_receive(static_cast<std::uint16_t>(rx_port - n_total_), p, head, tail);
}

void PacketFabric::switch_ingress(Packet p, std::uint16_t ingress) {
  if (p.dst >= n_total_ || p.dst == ingress) throw ProtocolViolation("packet addressed to its own ingress");
  p.ingress = ingress;
  if (p.is_control()) {
    switch_send_control(p.dst, p);
    return;
  }
  const std::uint16_t e = p.dst;
  SwitchPort& sp = sw_[e];
  const std::uint64_t bytes = std::uint64_t{p.blocks} * 8;
  if (queue_.ecn_bytes != 0 && sp.data_bytes >= queue_.ecn_bytes) {
    p.ecn = true;
    ++stats_.marks;
  }
  if (queue_.buffer_bytes != 0 && sp.data_bytes + bytes > queue_.buffer_bytes) {
    if (queue_.priority) {
      // Evict strictly lower-priority packets from the back until the arrival fits.
      while (sp.data_bytes + bytes > queue_.buffer_bytes && !sp.prio.empty()) {
        auto worst = std::prev(sp.prio.end());
        if (std::get<0>(*worst) <= p.prio) break;
        const std::uint32_t t = std::get<2>(*worst);
        sp.prio.erase(worst);
        drop_token(t);
      }
    }
    if (sp.data_bytes + bytes > queue_.buffer_bytes) {
      ++stats_.drops;
      return;
    }
  }
  const std::uint32_t token = put(p);
  sp.data_bytes += bytes;
  ingress_bytes_[ingress] += bytes;
  max_egress_blocks_ = std::max(max_egress_blocks_, sp.data_bytes / 8);
  on_switch_admitted(p);
  if (queue_.priority) {
    sp.prio.insert({p.prio, enqueue_seq_++, token});
  } else {
    sp.fifo.push_back(token);
  }
  switch_kick(e);
}

void PacketFabric::drop_token(std::uint32_t token) {
  const Packet p = take(token);
  const std::uint64_t bytes = std::uint64_t{p.blocks} * 8;
  sw_[p.dst].data_bytes -= bytes;
  ingress_bytes_[p.ingress] -= bytes;
  ++stats_.drops;
  on_switch_release(p);
}

void PacketFabric::host_receive(std::uint16_t h, const Packet& p, SimTime head, SimTime tail) {
  switch (p.type) {
    case PacketType::kData:
      if (p.dst != h) throw ProtocolViolation("data delivered to the wrong host");
      sim_.schedule_at(tail, [this, p, head, tail] { on_data_arrived(p, head, tail); });
      return;
    case PacketType::kRequest:
      sim_.schedule_at(tail, [this, p, tail] { on_request_arrived(p, tail); });
      return;
    default:
      on_host_control(h, p);
      return;
  }
}

void PacketFabric::on_request_arrived(const Packet& p, SimTime tail) {
  Message* m = find(p.msg);
  if (m == nullptr || m->request_arrived) return;
  m->request_arrived = true;
  const auto& l = cfg_.latency;
  const SimTime ready = tail + l.cycles(l.host.g_block_proc + l.host.rreq_to_memctrl_extra) + l.dram();
  m->data_at = ready + l.cycles(l.host.grant_q_read + l.host.mdata_gen);
  sim_.schedule_at(ready, [this, uid = p.msg] {
    if (Message* mm = find(uid)) flow_ready(*mm);
  });
}

void PacketFabric::on_data_arrived(const Packet& p, SimTime head, SimTime tail) {
  Message* m = find(p.msg);
  if (m == nullptr) return;
  const auto rx = cfg_.latency.cycles(cfg_.latency.host.mdata_rx_proc);
  const bool dup = m->got[p.index];
  if (!dup) {
    m->got[p.index] = true;
    ++m->got_count;
    m->first_data = std::min(m->first_data, head + rx);
    if (m->got_count == m->n_packets) {
      m->received = true;
      fabric::CompletionRecord r;
      r.submit = m->submit;
      r.complete = tail + rx;
      r.first_data = m->first_data;
      r.kind = m->kind;
      r.src = PortId(m->requester);
      r.dst = PortId(m->memory);
      r.id = MessageId(static_cast<std::uint8_t>(m->uid & 0xFF));
      r.bytes = m->bytes;
      log_.add(std::move(r));
    }
  }
  on_delivered(p, *m, dup);
  retire_if_done(p.msg);
}

void PacketFabric::sender_finished(Message& m) {
  m.sender_done = true;
  retire_if_done(m.uid);
}

void PacketFabric::retire_if_done(std::uint64_t uid) {
  auto it = msgs_.find(uid);
  if (it != msgs_.end() && it->second.received && it->second.sender_done) msgs_.erase(it);
}

}  // namespace edm::baselines
