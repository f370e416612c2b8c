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
constexpr PathShape kReceiverDriven{24, 4, 34, 6};
}  // namespace

IrdFabric::IrdFabric(const ClusterConfig& cfg, IrdParams p)
    : PacketFabric("ird", cfg, 0, SwitchQueueParams{}),
      pending_(static_cast<std::size_t>(cfg.n_ports)),
      outstanding_(static_cast<std::size_t>(cfg.n_ports), 0),
      grants_(static_cast<std::size_t>(cfg.n_ports)) {
  std::uint32_t chunks = p.outstanding_chunks;
  if (chunks == 0) {
    // Grant to data arrival, plus one chunk so the receiver link never idles.
    const auto& l = cfg_.latency;
    const SimTime loop = l.cycles(l.host.ntf_gen + l.sw.classify + l.sw.forward + l.host.g_block_proc +
                                  l.host.grant_q_read + l.host.mdata_gen + l.sw.classify + l.sw.forward) +
                         l.hop_fixed() * 4;
    const auto chunk_blocks = fabric::data_blocks(MessageKind::kWreq, cfg_.chunk_bytes, cfg_.chunk_bytes);
    const SimTime chunk_time = cfg_.slot() * static_cast<std::int64_t>(chunk_blocks);
    chunks = static_cast<std::uint32_t>(std::ceil(static_cast<double>(loop.ps()) / chunk_time.ps())) + 1;
  }
  limit_bytes_ = std::uint64_t{chunks} * cfg_.chunk_bytes;
}

SimTime IrdFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  return path_ideal(cfg_, kReceiverDriven, kind, size);
}

void IrdFabric::flow_ready(Message& m) {
  // Announcement reaches the receiver in zero time.
  pending_[m.receiver].insert({m.bytes, m.uid});
  next_grant_[m.uid] = 0;
  try_grant(m.receiver);
}

void IrdFabric::try_grant(std::uint16_t r) {
  auto& pend = pending_[r];
  while (outstanding_[r] < limit_bytes_ && !pend.empty()) {
    const auto [remaining, uid] = *pend.begin();
    pend.erase(pend.begin());
    const Message* m = find(uid);
    std::uint32_t& idx = next_grant_[uid];
    const std::uint32_t len = std::min(cfg_.chunk_bytes, m->bytes - idx * cfg_.chunk_bytes);
    outstanding_[r] += len;
    Packet g;
    g.type = PacketType::kGrant;
    g.src = r;
    g.dst = m->sender;
    g.msg = uid;
    g.index = idx++;
    sim_.schedule_in(cfg_.latency.cycles(cfg_.latency.host.ntf_gen), [this, r, g] { host_send_control(r, g); });
    if (remaining > len) {
      pend.insert({remaining - len, uid});
    } else {
      next_grant_.erase(uid);
    }
  }
}

void IrdFabric::on_delivered(const Packet& p, Message&, bool) {
  outstanding_[p.dst] -= p.len;
  try_grant(p.dst);
}

void IrdFabric::on_host_control(std::uint16_t h, const Packet& p) {
  if (p.type != PacketType::kGrant) throw ProtocolViolation("unexpected control packet");
  const auto& l = cfg_.latency.host;
  grants_[h].push_back({p.msg, p.index, sim_.now() + cfg_.latency.cycles(l.g_block_proc + l.grant_q_read + l.mdata_gen)});
  kick_host(h);
}

std::optional<Packet> IrdFabric::next_data(std::uint16_t h) {
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
