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

std::uint32_t conn_key(std::uint16_t s, std::uint16_t d) { return static_cast<std::uint32_t>(s) * kMaxPorts + d; }

SwitchQueueParams pfc_queue(const PfcParams& p) {
  SwitchQueueParams q;
  q.ecn_bytes = p.ecn_threshold_bytes;
  return q;
}

}  // namespace

PfcFabric::PfcFabric(const ClusterConfig& cfg, PfcParams p)
    : PacketFabric("pfc", cfg, 0, pfc_queue(p)),
      p_(p),
      active_(static_cast<std::size_t>(cfg.n_ports)),
      rr_(static_cast<std::size_t>(cfg.n_ports), 0),
      paused_(static_cast<std::size_t>(cfg.n_ports), false) {
  if (p_.xon_bytes > p_.xoff_bytes) throw std::invalid_argument("xon must not exceed xoff");
}

SimTime PfcFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  return path_ideal(cfg_, kSenderDriven, kind, size);
}

PfcFabric::Conn& PfcFabric::conn(std::uint16_t s, std::uint16_t d) {
  auto [it, fresh] = conns_.try_emplace(conn_key(s, d));
  if (fresh) {
    it->second.src = s;
    it->second.dst = d;
    it->second.rc = cfg_.link_gbps;
    it->second.rt = cfg_.link_gbps;
  }
  return it->second;
}

double PfcFabric::rate_gbps(PortId s, PortId d) const {
  auto it = conns_.find(conn_key(s.value(), d.value()));
  return it == conns_.end() ? cfg_.link_gbps : it->second.rc;
}

void PfcFabric::flow_ready(Message& m) {
  Conn& c = conn(m.sender, m.receiver);
  c.msgs.push_back(m.uid);
  if (!c.active) {
    c.active = true;
    active_[c.src].push_back(conn_key(c.src, c.dst));
  }
  wake_host_at(m.sender, m.data_at);
}

std::optional<Packet> PfcFabric::next_data(std::uint16_t h) {
  auto& act = active_[h];
  const std::size_t n = act.size();
  SimTime earliest = SimTime::max();
  std::optional<Packet> out;
  for (std::size_t k = 0; k < n && !out; ++k) {
    const std::size_t i = (rr_[h] + k) % n;
    Conn& c = conns_.at(act[i]);
    if (c.msgs.empty()) continue;
    Message* m = find(c.msgs.front());
    const SimTime ok = std::max(c.next_send, m->data_at);
    if (ok > sim_.now()) {
      earliest = std::min(earliest, ok);
      continue;
    }
    const std::uint32_t idx = m->next_new++;
    out = data_packet(*m, idx);
    // Pace the pair at its current rate.
    const double stretch = cfg_.link_gbps / c.rc;
    c.next_send = sim_.now() + SimTime::from_ps(static_cast<std::int64_t>(
                                   static_cast<double>((cfg_.slot() * static_cast<std::int64_t>(out->blocks)).ps()) *
                                   stretch));
    if (m->next_new == m->n_packets) {
      c.msgs.pop_front();
      sender_finished(*m);
    }
    rr_[h] = i + 1;
  }
  std::erase_if(act, [this](std::uint32_t key) {
    Conn& c = conns_.at(key);
    if (c.msgs.empty()) c.active = false;
    return c.msgs.empty();
  });
  if (!act.empty()) rr_[h] %= act.size();
  if (!out && earliest != SimTime::max()) wake_host_at(h, earliest);
  return out;
}

void PfcFabric::on_delivered(const Packet& p, Message&, bool) {
  if (!p.ecn) return;
  Conn& c = conn(p.src, p.dst);
  if (c.cnp_sent && sim_.now() - c.last_cnp_rx < p_.cnp_interval) return;
  c.cnp_sent = true;
  c.last_cnp_rx = sim_.now();
  Packet cnp;
  cnp.type = PacketType::kCnp;
  cnp.src = p.dst;
  cnp.dst = p.src;
  host_send_control(p.dst, cnp);
}

void PfcFabric::on_host_control(std::uint16_t h, const Packet& p) {
  switch (p.type) {
    case PacketType::kPause:
      set_host_paused(h, true);
      return;
    case PacketType::kResume:
      set_host_paused(h, false);
      return;
    case PacketType::kCnp: {
      Conn& c = conn(h, p.src);
      c.rt = c.rc;
      c.rc = std::max(p_.min_rate_gbps, c.rc * (1 - c.alpha / 2));
      c.alpha = (1 - p_.g) * c.alpha + p_.g;
      c.cnp_since_update = true;
      c.stage = 0;
      if (!c.timer_running) {
        c.timer_running = true;
        sim_.schedule_in(p_.update_period, [this, key = conn_key(c.src, c.dst)] { on_update(key); });
      }
      return;
    }
    default:
      throw ProtocolViolation("unexpected control packet");
  }
}

void PfcFabric::on_update(std::uint32_t key) {
  Conn& c = conns_.at(key);
  if (!c.cnp_since_update) {
    c.alpha *= 1 - p_.g;
    ++c.stage;
    if (c.stage > p_.fast_recovery_steps) c.rt = std::min(cfg_.link_gbps, c.rt + p_.additive_gbps);
    c.rc = std::min(cfg_.link_gbps, (c.rt + c.rc) / 2);
  }
  c.cnp_since_update = false;
  if (c.rc >= cfg_.link_gbps * 0.999) {
    c.rc = c.rt = cfg_.link_gbps;
    c.timer_running = false;
    return;
  }
  sim_.schedule_in(p_.update_period, [this, key] { on_update(key); });
}

void PfcFabric::on_switch_admitted(const Packet& p) {
  if (paused_[p.ingress] || ingress_bytes(p.ingress) < p_.xoff_bytes) return;
  paused_[p.ingress] = true;
  ++mutable_stats().pauses;
  Packet pause;
  pause.type = PacketType::kPause;
  pause.dst = p.ingress;
  switch_send_control(p.ingress, pause);
}

void PfcFabric::on_switch_release(const Packet& p) {
  if (!paused_[p.ingress] || ingress_bytes(p.ingress) > p_.xon_bytes) return;
  paused_[p.ingress] = false;
  Packet resume;
  resume.type = PacketType::kResume;
  resume.dst = p.ingress;
  switch_send_control(p.ingress, resume);
}

}  // namespace edm::baselines
