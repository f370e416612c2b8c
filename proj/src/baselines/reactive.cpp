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

#include <algorithm>
#include <cmath>

#include "edm/baselines/models.hpp"

namespace edm::baselines {

namespace {

constexpr PathShape kSenderDriven{10, 2, 25, 4};

std::uint32_t conn_key(std::uint16_t s, std::uint16_t d) { return static_cast<std::uint32_t>(s) * kMaxPorts + d; }

SwitchQueueParams reactive_queue(const ReactiveParams& p, bool priority) {
  SwitchQueueParams q;
  q.buffer_bytes = p.buffer_bytes;
  q.ecn_bytes = p.ecn_threshold_bytes;
  q.priority = priority;
  return q;
}

}  // namespace

ReactiveFabric::ReactiveFabric(const ClusterConfig& cfg, bool priority_queues, ReactiveParams p)
    : PacketFabric(priority_queues ? "pfabric" : "dctcp", cfg, 0, reactive_queue(p, priority_queues)),
      p_(p),
      priority_(priority_queues),
      active_(static_cast<std::size_t>(cfg.n_ports)),
      rr_(static_cast<std::size_t>(cfg.n_ports), 0) {
  if (p_.initial_window_packets == 0)
    p_.initial_window_packets = static_cast<std::uint32_t>(2 * cfg_.bdp_bytes() / cfg_.chunk_bytes + 1);
}

SimTime ReactiveFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  return path_ideal(cfg_, kSenderDriven, kind, size);
}

ReactiveFabric::Conn& ReactiveFabric::conn(std::uint16_t s, std::uint16_t d) {
  auto [it, fresh] = conns_.try_emplace(conn_key(s, d));
  Conn& c = it->second;
  if (fresh) {
    c.src = s;
    c.dst = d;
    c.cwnd = p_.initial_window_packets;
    c.win_target = p_.initial_window_packets;
  }
  return c;
}

double ReactiveFabric::window(PortId s, PortId d) const {
  auto it = conns_.find(conn_key(s.value(), d.value()));
  return it == conns_.end() ? p_.initial_window_packets : it->second.cwnd;
}

double ReactiveFabric::alpha(PortId s, PortId d) const {
  auto it = conns_.find(conn_key(s.value(), d.value()));
  return it == conns_.end() ? 1.0 : it->second.alpha;
}

void ReactiveFabric::activate(Conn& c) {
  if (c.active) return;
  c.active = true;
  active_[c.src].push_back(conn_key(c.src, c.dst));
}

void ReactiveFabric::flow_ready(Message& m) {
  Conn& c = conn(m.sender, m.receiver);
  c.msgs.push_back(m.uid);
  activate(c);
  wake_host_at(m.sender, m.data_at);
}

bool ReactiveFabric::peek(Conn& c, std::uint32_t& prio, SimTime& earliest) {
  while (!c.retx.empty()) {
    const auto [uid, idx] = c.retx.front();
    const Message* m = find(uid);
    if (m != nullptr && m->state[idx] == 0) break;
    c.retx.pop_front();
  }
  if (static_cast<double>(c.inflight) + 1 > std::max(1.0, std::floor(c.cwnd))) return false;
  if (!c.retx.empty()) {
    const auto [uid, idx] = c.retx.front();
    const Message* m = find(uid);
    prio = m->bytes - idx * cfg_.chunk_bytes;
    return true;
  }
  if (c.msgs.empty()) return false;
  const Message* m = find(c.msgs.front());
  if (m->data_at > sim_.now()) {
    earliest = std::min(earliest, m->data_at);
    return false;
  }
  prio = m->bytes - m->next_new * cfg_.chunk_bytes;
  return true;
}

Packet ReactiveFabric::emit(Conn& c) {
  Message* m = nullptr;
  std::uint32_t idx = 0;
  if (!c.retx.empty()) {
    m = find(c.retx.front().first);
    idx = c.retx.front().second;
    c.retx.pop_front();
    ++mutable_stats().retransmits;
  } else {
    m = find(c.msgs.front());
    idx = m->next_new++;
    if (m->next_new == m->n_packets) c.msgs.pop_front();
  }
  m->state[idx] = 1;
  m->sent_at[idx] = sim_.now();
  ++c.inflight;
  c.out.push_back({m->uid, idx, sim_.now()});
  arm_timer(c);
  return data_packet(*m, idx);
}

std::optional<Packet> ReactiveFabric::next_data(std::uint16_t h) {
  auto& act = active_[h];
  const std::size_t n = act.size();
  SimTime earliest = SimTime::max();
  std::size_t pick = n;
  std::uint32_t best_prio = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (rr_[h] + k) % n;
    std::uint32_t prio = 0;
    if (!peek(conns_.at(act[i]), prio, earliest)) continue;
    if (pick == n || (priority_ && prio < best_prio)) {
      pick = i;
      best_prio = prio;
      if (!priority_) break;
    }
  }
  std::optional<Packet> out;
  if (pick != n) {
    out = emit(conns_.at(act[pick]));
    rr_[h] = pick + 1;
  }
  // Connections with nothing left to send leave the active list until refilled.
  std::erase_if(act, [this](std::uint32_t key) {
    Conn& c = conns_.at(key);
    const bool idle = c.msgs.empty() && c.retx.empty();
    if (idle) c.active = false;
    return idle;
  });
  if (!act.empty()) rr_[h] %= act.size();
  if (!out && earliest != SimTime::max()) wake_host_at(h, earliest);
  return out;
}

void ReactiveFabric::on_delivered(const Packet& p, Message&, bool) {
  Packet ack;
  ack.type = PacketType::kAck;
  ack.src = p.dst;
  ack.dst = p.src;
  ack.msg = p.msg;
  ack.index = p.index;
  ack.ecn = p.ecn;
  host_send_control(p.dst, ack);
}

void ReactiveFabric::purge_front(Conn& c) {
  while (!c.out.empty()) {
    const Outstanding& o = c.out.front();
    const Message* m = find(o.uid);
    if (m != nullptr && m->state[o.index] == 1 && m->sent_at[o.index] == o.sent_at) break;
    c.out.pop_front();
  }
}

void ReactiveFabric::on_host_control(std::uint16_t h, const Packet& p) {
  if (p.type != PacketType::kAck) throw ProtocolViolation("unexpected control packet");
  Message* m = find(p.msg);
  if (m == nullptr) return;
  Conn& c = conn(m->sender, m->receiver);
  std::uint8_t& st = m->state[p.index];
  if (st == 2) return;
  if (st == 1) --c.inflight;
  st = 2;
  ++m->acked;

  ++c.win_acks;
  if (p.ecn) ++c.win_marks;
  if (c.win_acks >= c.win_target) {
    const double frac = static_cast<double>(c.win_marks) / c.win_acks;
    c.alpha = (1 - p_.g) * c.alpha + p_.g * frac;
    if (c.win_marks > 0) {
      c.cwnd = std::max(1.0, c.cwnd * (1 - c.alpha / 2));
      c.ssthresh = c.cwnd;
    }
    c.win_acks = 0;
    c.win_marks = 0;
    c.win_target = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(c.cwnd));
  }
  if (!p.ecn) c.cwnd += c.cwnd < c.ssthresh ? 1.0 : 1.0 / c.cwnd;
  c.cwnd = std::min<double>(c.cwnd, p_.max_window_packets);

  purge_front(c);
  if (m->acked == m->n_packets) sender_finished(*m);
  if (!c.msgs.empty() || !c.retx.empty()) activate(c);
  kick_host(h);
}

void ReactiveFabric::arm_timer(Conn& c) {
  if (c.timer_armed || c.out.empty()) return;
  c.timer_armed = true;
  const std::uint32_t key = conn_key(c.src, c.dst);
  sim_.schedule_at(c.out.front().sent_at + p_.rto, [this, key] { on_timer(key); });
}

void ReactiveFabric::on_timer(std::uint32_t key) {
  Conn& c = conns_.at(key);
  c.timer_armed = false;
  bool fired = false;
  while (!c.out.empty()) {
    purge_front(c);
    if (c.out.empty() || c.out.front().sent_at + p_.rto > sim_.now()) break;
    const Outstanding o = c.out.front();
    c.out.pop_front();
    Message* m = find(o.uid);
    m->state[o.index] = 0;
    --c.inflight;
    c.retx.emplace_back(o.uid, o.index);
    fired = true;
  }
  if (fired) {
    c.ssthresh = std::max(2.0, c.cwnd / 2);
    c.cwnd = 1;
    c.win_acks = 0;
    c.win_marks = 0;
    c.win_target = 1;
    activate(c);
    kick_host(c.src);
  }
  arm_timer(c);
}

}  // namespace edm::baselines
