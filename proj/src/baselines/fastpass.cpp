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

#include "edm/baselines/models.hpp"

namespace edm::baselines {

namespace {

constexpr PathShape kArbitrated{29, 6, 39, 8};

std::uint32_t pair_key(std::uint16_t s, std::uint16_t d) { return static_cast<std::uint32_t>(s) * kMaxPorts + d; }

}  // namespace

FastpassFabric::FastpassFabric(const ClusterConfig& cfg)
    : PacketFabric("fastpass", cfg, 1, SwitchQueueParams{}), grants_(static_cast<std::size_t>(cfg.n_ports)) {
  ClusterConfig arb = cfg_;
  arb.max_active_notifications = 1 << 30;  // the arbiter holds every request
  sched::SchedulerOptions opt;
  opt.charge_latency = false;
  opt.early_release = false;
  arb_ = std::make_unique<sched::Scheduler>(sim_, arb, this, opt);
}

SimTime FastpassFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  return path_ideal(cfg_, kArbitrated, kind, size);
}

void FastpassFabric::flow_ready(Message& m) {
  Packet n;
  n.type = PacketType::kNotify;
  n.src = m.sender;
  n.dst = arbiter().value();
  n.msg = m.uid;
  n.index = m.receiver;
  n.len = m.bytes;
  sim_.schedule_in(cfg_.latency.cycles(cfg_.latency.host.ntf_gen), [this, n] { host_send_control(n.src, n); });
}

void FastpassFabric::on_host_control(std::uint16_t h, const Packet& p) {
  if (h == arbiter().value()) {
    if (p.type != PacketType::kNotify) throw ProtocolViolation("arbiter expects allocation requests");
    const auto recv = static_cast<std::uint16_t>(p.index);
    waiting_[pair_key(p.src, recv)].push_back(p.msg);
    NotificationRecord rec;
    rec.src = PortId(p.src);
    rec.dst = PortId(recv);
    rec.id = MessageId(static_cast<std::uint8_t>(next_id_++ & 0xFF));
    rec.total_bytes = p.len;
    rec.remaining_bytes = p.len;
    rec.enqueued_at = sim_.now();
    if (arb_->on_notification(rec) == sched::NotifyResult::kRejected) throw ProtocolViolation("arbiter rejected");
    return;
  }
  if (p.type != PacketType::kGrant) throw ProtocolViolation("unexpected control packet");
  const auto& l = cfg_.latency.host;
  grants_[h].push_back({p.msg, p.index, sim_.now() + cfg_.latency.cycles(l.g_block_proc + l.grant_q_read + l.mdata_gen)});
  kick_host(h);
}

void FastpassFabric::on_grant(sched::IssuedGrant g) {
  auto& q = waiting_.at(pair_key(g.src.value(), g.dst.value()));
  Packet p;
  p.type = PacketType::kGrant;
  p.src = arbiter().value();
  p.dst = g.src.value();
  p.msg = q.front();
  p.index = g.offset / cfg_.chunk_bytes;
  if (g.last) q.pop_front();
  host_send_control(arbiter().value(), p);
}

std::optional<Packet> FastpassFabric::next_data(std::uint16_t h) {
  if (h >= cfg_.n_ports) return std::nullopt;
  auto& q = grants_[h];
  if (q.empty()) return std::nullopt;
  const GrantEntry e = q.front();
  Message* m = find(e.uid);
  const SimTime at = std::max(e.ready_at, m->data_at);
  if (at > sim_.now()) {
    wake_host_at(h, at);
    return std::nullopt;
  }
  q.pop_front();
  Packet p = data_packet(*m, e.index);
  if (++m->next_new == m->n_packets) sender_finished(*m);
  return p;
}

}  // namespace edm::baselines
