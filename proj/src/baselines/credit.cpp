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
constexpr PathShape kSenderDriven{10, 2, 25, 4};
}  // namespace

CreditFabric::CreditFabric(const ClusterConfig& cfg, CreditParams p)
    : PacketFabric("cxl", cfg, 0, SwitchQueueParams{}),
      p_(p),
      credits_(static_cast<std::size_t>(cfg.n_ports), p.ingress_credit_blocks),
      fifo_(static_cast<std::size_t>(cfg.n_ports)),
      owed_(static_cast<std::size_t>(cfg.n_ports), 0),
      credit_queued_(static_cast<std::size_t>(cfg.n_ports), false) {
  // The largest unit must fit the pool or it can never be sent.
  const auto biggest = fabric::data_blocks(MessageKind::kWreq, cfg_.chunk_bytes, cfg_.chunk_bytes) + 2;
  if (p_.ingress_credit_blocks < biggest) throw std::invalid_argument("credit pool smaller than one packet");
}

SimTime CreditFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  return path_ideal(cfg_, kSenderDriven, kind, size);
}

void CreditFabric::flow_ready(Message& m) {
  fifo_[m.sender].push_back(m.uid);
  wake_host_at(m.sender, m.data_at);
}

std::optional<Packet> CreditFabric::next_data(std::uint16_t h) {
  auto& q = fifo_[h];
  if (q.empty()) return std::nullopt;
  Message* m = find(q.front());
  if (m->data_at > sim_.now()) {
    wake_host_at(h, m->data_at);
    return std::nullopt;
  }
  Packet p = data_packet(*m, m->next_new);
  // Strict order: the head waits for credits and everything queues behind it.
  if (credits_[h] < p.blocks) return std::nullopt;
  if (++m->next_new == m->n_packets) {
    q.pop_front();
    sender_finished(*m);
  }
  return p;
}

void CreditFabric::on_host_sent(std::uint16_t h, const Packet& p) {
  if (credits_[h] < p.blocks) throw ProtocolViolation("sent without credits");
  credits_[h] -= p.blocks;
}

void CreditFabric::on_switch_release(const Packet& p) {
  owed_[p.ingress] += p.blocks;
  if (credit_queued_[p.ingress]) return;
  credit_queued_[p.ingress] = true;
  Packet c;
  c.type = PacketType::kCredit;
  c.dst = p.ingress;
  switch_send_control(p.ingress, c);
}

void CreditFabric::on_switch_control_start(Packet& p) {
  if (p.type != PacketType::kCredit) return;
  // Coalesce everything owed up to the moment the update leaves.
  p.index = owed_[p.dst];
  owed_[p.dst] = 0;
  credit_queued_[p.dst] = false;
}

void CreditFabric::on_host_control(std::uint16_t h, const Packet& p) {
  if (p.type != PacketType::kCredit) throw ProtocolViolation("unexpected control packet");
  credits_[h] += p.index;
  if (credits_[h] > p_.ingress_credit_blocks) throw ProtocolViolation("credit overflow");
  kick_host(h);
}

}  // namespace edm::baselines
