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

#include "edm/host/host.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "edm/core/wire.hpp"

namespace edm::host {

// ---- RxBufferGauge ----------------------------------------------------------

void RxBufferGauge::advance(SimTime now) {
  if (now <= at_) return;
  if (drain_gbps_ > 0) {
    const double drained = drain_gbps_ / 8.0 * (now - at_).ns();
    occ_ = std::max(0.0, occ_ - drained);
  }
  at_ = now;
}

bool RxBufferGauge::add(std::uint64_t bytes, SimTime now) {
  if (drain_gbps_ <= 0) return false;
  advance(now);
  occ_ += static_cast<double>(bytes);
  if (!paused_sent_ && occ_ >= static_cast<double>(thres_)) {
    paused_sent_ = true;
    return true;
  }
  return false;
}

bool RxBufferGauge::poll(SimTime now) {
  advance(now);
  if (paused_sent_ && occ_ < static_cast<double>(thres_)) {
    paused_sent_ = false;
    return true;
  }
  return false;
}

SimTime RxBufferGauge::below_threshold_at() const {
  if (drain_gbps_ <= 0 || occ_ < static_cast<double>(thres_)) return at_;
  const double excess = occ_ - static_cast<double>(thres_);
  return at_ + SimTime::from_ns(excess * 8.0 / drain_gbps_) + SimTime::from_ps(1);
}

double RxBufferGauge::occupancy(SimTime now) const {
  RxBufferGauge g = *this;
  g.advance(now);
  return g.occ_;
}

// ---- EdmHost ----------------------------------------------------------------

namespace {

std::vector<std::uint8_t> pattern_bytes(std::uint64_t addr, std::uint32_t n) {
  std::vector<std::uint8_t> out(n);
  for (std::uint32_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>((addr + i) * 131u + 7u);
  return out;
}

std::vector<std::uint8_t> rmw_arg_bytes(const std::array<std::uint64_t, 3>& args) {
  std::vector<std::uint8_t> out;
  out.reserve(kRmwArgBytes);
  for (std::uint64_t a : args)
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(a >> (8 * i)));
  return out;
}

std::array<std::uint64_t, 3> rmw_args_from(const std::vector<std::uint8_t>& bytes) {
  std::array<std::uint64_t, 3> out{};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 8 && k * 8 + i < bytes.size(); ++i)
      out[k] |= std::uint64_t{bytes[k * 8 + i]} << (8 * i);
  return out;
}

}  // namespace

EdmHost::EdmHost(sim::Simulator& sim, const ClusterConfig& cfg, PortId self, sim::UnitStore& store,
                 HostObserver* obs)
    : sim_(sim),
      cfg_(cfg),
      self_(self),
      store_(store),
      obs_(obs),
      gauge_(static_cast<std::uint64_t>(cfg.endpoint.pause_threshold_bdp * static_cast<double>(cfg.bdp_bytes())),
             cfg.endpoint.rx_drain_gbps),
      peers_(static_cast<std::size_t>(cfg.n_ports)) {}

void EdmHost::connect(sim::LinkReceiver* sw) {
  uplink_ = std::make_unique<sim::Link>(sim_, "up" + std::to_string(self_.value()), cfg_.slot(),
                                        cfg_.latency.hop_fixed(), sw, self_.value());
}

std::uint64_t EdmHost::submit(const fabric::Request& r) {
  if (r.src != self_) throw std::invalid_argument("request submitted at the wrong host");
  if (r.dst == self_) throw std::invalid_argument("loopback requests are not supported");
  if (r.dst.value() >= peers_.size()) throw std::invalid_argument("destination out of range");
  if (r.kind == MessageKind::kRres) throw std::invalid_argument("responses are generated, not submitted");
  if (r.kind == MessageKind::kRmwreq && !r.opcode) throw std::invalid_argument("RMWREQ needs an opcode");
  if (r.kind != MessageKind::kRmwreq && (r.size == 0 || r.size > kMaxWireSize))
    throw std::invalid_argument("request size must be in [1, 65535]");
  PeerState& p = peers_[r.dst.value()];
  Pending pend{r, sim_.now(), {}};
  if (r.kind == MessageKind::kWreq) {
    if (!r.payload.empty()) {
      if (r.payload.size() != r.size) throw std::invalid_argument("payload length does not match size");
      pend.data = r.payload;
    } else if (cfg_.endpoint.functional_memory) {
      pend.data = pattern_bytes(r.addr, r.size);
    } else {
      pend.data.assign(r.size, 0);
    }
  }
  p.queue.push_back(std::move(pend));
  ++queued_;
  if (!p.in_ready) {
    p.in_ready = true;
    ready_.push_back(r.dst.value());
  }
  try_dequeue();
  return submit_seq_++;
}

std::optional<MessageId> EdmHost::alloc_id(PeerState& p) {
  if (p.ids_in_use >= kMaxMessageIds) return std::nullopt;
  for (int i = 0; i < kMaxMessageIds; ++i) {
    const auto id = static_cast<std::uint16_t>((p.next_id + i) % kMaxMessageIds);
    if (!p.id_used[id]) {
      p.id_used[id] = true;
      ++p.ids_in_use;
      p.next_id = static_cast<std::uint16_t>((id + 1) % kMaxMessageIds);
      return MessageId(static_cast<std::uint8_t>(id));
    }
  }
  return std::nullopt;
}

void EdmHost::free_id(PortId peer, MessageId id) {
  PeerState& p = peers_[peer.value()];
  if (!p.id_used[id.value()]) throw std::logic_error("double free of message id");
  p.id_used[id.value()] = false;
  --p.ids_in_use;
}

void EdmHost::try_dequeue() {
  if (failed_) return;
  const std::size_t rounds = ready_.size();
  for (std::size_t i = 0; i < rounds; ++i) {
    const std::uint16_t d = ready_.front();
    ready_.pop_front();
    PeerState& p = peers_[d];
    while (!p.queue.empty() && dequeue_one(p, PortId(d))) {
    }
    if (p.queue.empty()) {
      p.in_ready = false;
    } else {
      ready_.push_back(d);
    }
  }
}

bool EdmHost::dequeue_one(PeerState& p, PortId dst) {
  const auto limit = static_cast<std::uint32_t>(cfg_.max_active_notifications);
  Pending& head = p.queue.front();
  const bool is_write = head.req.kind == MessageKind::kWreq;
  if ((is_write ? p.active_writes : p.active_reads) >= limit) return false;
  const auto id = alloc_id(p);
  if (!id) {
    ++stats_.id_stalls;
    return false;
  }
  const SimTime emit_at = sim_.now() + cfg_.latency.cycles(cfg_.latency.host.ntf_gen);
  const PeerMessageKey key{dst, *id};

  if (!is_write) {
    Pending pend = std::move(head);
    p.queue.pop_front();
    --queued_;
    phy::MessageUnit m;
    m.kind = pend.req.kind;
    m.port = dst;
    m.id = *id;
    m.addr = pend.req.addr;
    std::uint32_t expected = pend.req.size;
    if (m.kind == MessageKind::kRmwreq) {
      m.opcode = pend.req.opcode;
      m.size = kRmwArgBytes;
      m.data = rmw_arg_bytes(pend.req.args);
      expected = rmw_response_bytes(*pend.req.opcode);
    } else {
      m.size = pend.req.size;
    }
    ReadState st;
    st.kind = pend.req.kind;
    st.req = std::move(pend.req);
    st.submit = pend.submit;
    st.expected = expected;
    st.generation = next_generation_++;
    if (keep_results_) st.buffer.assign(expected, 0);
    const auto gen = st.generation;
    if (!reads_.emplace(key, std::move(st)).second) throw std::logic_error("read state collision");
    ++p.active_reads;
    ++stats_.requests;
    send_unit(phy::encode_memory_message(m), sim::TxClass::kPriority, emit_at);
    const SimTime timeout = SimTime::from_ns(cfg_.endpoint.read_timeout_us * 1000.0);
    sim_.schedule_at(emit_at + timeout, [this, key, gen] { on_read_timeout(key, gen); });
    return true;
  }

  WriteState st;
  std::uint32_t total = 0;
  do {
    Pending pend = std::move(p.queue.front());
    p.queue.pop_front();
    --queued_;
    Segment seg{pend.req.addr, total, pend.req.size, std::move(pend.data)};
    total += pend.req.size;
    if (obs_ != nullptr) obs_->on_write_issued(self_, dst, *id, pend.submit, pend.req.size);
    st.segments.push_back(std::move(seg));
  } while (cfg_.endpoint.batch_writes && !p.queue.empty() && p.queue.front().req.kind == MessageKind::kWreq &&
           total + p.queue.front().req.size <= kMaxWireSize);
  st.total = total;
  if (!writes_.emplace(key, std::move(st)).second) throw std::logic_error("write state collision");
  ++p.active_writes;
  ++stats_.notifications;
  const auto bits = pack_bundle({dst, *id, total});
  send_unit({phy::PhyBlock::control(phy::BlockType::kN, bits)}, sim::TxClass::kPriority, emit_at);
  return true;
}

void EdmHost::send_unit(std::vector<phy::PhyBlock> blocks, sim::TxClass cls, SimTime at) {
  if (at <= sim_.now()) {
    send_now(std::move(blocks), cls);
    return;
  }
  sim_.schedule_at(at, [this, b = std::move(blocks), cls]() mutable { send_now(std::move(b), cls); });
}

void EdmHost::send_now(std::vector<phy::PhyBlock> blocks, sim::TxClass cls) {
  if (failed_) return;
  sim::WireUnit u;
  u.n_blocks = static_cast<std::uint32_t>(blocks.size());
  u.cls = cls;
  u.not_before = sim_.now();
  u.token = store_.put(std::move(blocks));
  uplink_->send(u);
}

void EdmHost::on_unit(int, const sim::WireUnit& u, SimTime head, SimTime tail) {
  if (failed_) {
    store_.release(u.token);
    return;
  }
  const auto& blocks = store_.get(u.token);
  const phy::PhyBlock first = blocks.front();
  if (first.is(phy::BlockType::kG)) {
    store_.release(u.token);
    handle_grant(first, head);
    return;
  }
  if (!first.is(phy::BlockType::kMS) && !first.is(phy::BlockType::kMST)) {
    store_.release(u.token);
    throw ProtocolViolation("host received unexpected block type " + std::string(phy::to_string(first.type())));
  }
  phy::MessageUnit m = phy::decode_memory_message(blocks);
  store_.release(u.token);
  switch (m.kind) {
    case MessageKind::kRreq:
    case MessageKind::kRmwreq:
      handle_request(std::move(m), tail);
      break;
    case MessageKind::kRres:
      handle_rres(m, head, tail);
      break;
    case MessageKind::kWreq:
      handle_wreq_data(m, head, tail);
      break;
  }
}

void EdmHost::handle_grant(const phy::PhyBlock& g, SimTime head) {
  const std::uint64_t bits = g.control_payload();
  const ControlBundle b = unpack_bundle(bits);
  const bool for_response = ((bits >> kGrantResponseBit) & 1u) != 0;
  const auto& h = cfg_.latency.host;
  const SimTime send_at =
      reserve_data_slot(head + cfg_.latency.cycles(h.g_block_proc + h.grant_q_read + h.mdata_gen));
  ++stats_.grants_received;
  stats_.granted_bytes += b.size;
  const PeerMessageKey key{b.port, b.id};
  const PortId peer = b.port;
  const MessageId id = b.id;
  const std::uint32_t len = b.size;
  if (for_response) {
    if (!serves_.contains(key)) throw ProtocolViolation("grant for unknown read response");
    sim_.schedule_at(send_at, [this, peer, id, len] { send_rres_chunk(peer, id, len); });
    return;
  }
  auto it = writes_.find(key);
  if (it == writes_.end()) throw ProtocolViolation("grant for unknown write");
  WriteState& w = it->second;
  if (w.granted + b.size > w.total) throw ProtocolViolation("grant exceeds write size");
  w.granted += b.size;
  if (w.granted == w.total) {
    // Last grant: the scheduler has retired the notification.
    --peers_[b.port.value()].active_writes;
    try_dequeue();
  }
  sim_.schedule_at(send_at, [this, peer, id, len] { send_write_chunk(peer, id, len); });
}

SimTime EdmHost::reserve_data_slot(SimTime earliest) {
  data_tail_ = std::max(data_tail_, earliest);
  return data_tail_;
}

void EdmHost::send_write_chunk(PortId dst, MessageId id, std::uint32_t len) {
  if (failed_) return;
  const PeerMessageKey key{dst, id};
  auto it = writes_.find(key);
  if (it == writes_.end()) throw std::logic_error("write state vanished");
  WriteState& w = it->second;
  const std::uint32_t end = w.sent + len;
  for (const Segment& seg : w.segments) {
    const std::uint32_t lo = std::max(w.sent, seg.begin);
    const std::uint32_t hi = std::min(end, seg.begin + seg.len);
    if (lo >= hi) continue;
    phy::MessageUnit m;
    m.kind = MessageKind::kWreq;
    m.port = self_;  // data carries its source; the circuit knows the egress
    m.id = id;
    m.size = hi - lo;
    m.addr = seg.addr + (lo - seg.begin);
    m.offset = lo;
    m.last = hi == seg.begin + seg.len;
    m.data.assign(seg.data.begin() + (lo - seg.begin), seg.data.begin() + (hi - seg.begin));
    ++stats_.chunks_sent;
    stats_.data_bytes_sent += m.size;
    send_now(phy::encode_memory_message(m), sim::TxClass::kBulk);
  }
  w.sent = end;
  if (w.sent >= w.total) {
    writes_.erase(it);
    free_id(dst, id);
    try_dequeue();
  }
}

void EdmHost::handle_request(phy::MessageUnit m, SimTime tail) {
  const PortId requester = m.port;
  const PeerMessageKey key{requester, m.id};
  if (serves_.contains(key)) throw ProtocolViolation("duplicate request id from a requester");
  const auto& l = cfg_.latency;
  const SimTime at_ctrl = tail + l.cycles(l.host.g_block_proc + l.host.rreq_to_memctrl_extra);
  const SimTime ready = at_ctrl + l.dram();
  // The request is its own first grant; it queues behind earlier grants.
  const SimTime send_at = reserve_data_slot(ready + l.cycles(l.host.grant_q_read + l.host.mdata_gen));

  serves_.emplace(key, ServeState{});
  const std::uint32_t first_len =
      m.kind == MessageKind::kRreq ? std::min(cfg_.chunk_bytes, m.size) : std::uint32_t{0};
  // Memory access happens at the controller in event order, which serializes atomics.
  sim_.schedule_at(ready, [this, key, m = std::move(m)] {
    ServeState& s = serves_.at(key);
    if (m.kind == MessageKind::kRreq) {
      s.total = m.size;
      if (cfg_.endpoint.functional_memory) {
        s.data = memory_.read(m.addr, m.size);
      } else {
        s.data.assign(m.size, 0);
      }
      return;
    }
    const auto op = m.opcode ? static_cast<std::uint8_t>(*m.opcode) : std::uint8_t{0xFF};
    RmwOutcome out = execute_rmw(memory_, op, m.addr, rmw_args_from(m.data));
    s.nack = out.nack;
    s.total = static_cast<std::uint32_t>(out.response.size());
    s.data = std::move(out.response);
    if (s.nack) {
      // Padded to the one byte the switch reserved for an unknown opcode.
      ++stats_.nacks;
      s.data.assign(1, 0);
      s.total = 1;
    }
  });
  sim_.schedule_at(send_at, [this, key, first_len] {
    const std::uint32_t len = first_len != 0 ? first_len : serves_.at(key).total;
    send_rres_chunk(key.peer, key.id, len);
  });
}

void EdmHost::send_rres_chunk(PortId requester, MessageId id, std::uint32_t len) {
  if (failed_) return;
  const PeerMessageKey key{requester, id};
  auto it = serves_.find(key);
  if (it == serves_.end()) throw std::logic_error("read response state vanished");
  ServeState& s = it->second;
  phy::MessageUnit m;
  m.kind = MessageKind::kRres;
  m.port = self_;
  m.id = id;
  m.offset = s.sent;
  m.size = std::min(len, s.total - s.sent);
  m.nack = s.nack;
  m.last = s.sent + m.size >= s.total;
  m.data.assign(s.data.begin() + s.sent, s.data.begin() + s.sent + m.size);
  s.sent += m.size;
  ++stats_.chunks_sent;
  stats_.data_bytes_sent += m.size;
  if (m.last) serves_.erase(it);
  send_now(phy::encode_memory_message(m), sim::TxClass::kBulk);
}

void EdmHost::handle_rres(const phy::MessageUnit& m, SimTime head, SimTime tail) {
  const PeerMessageKey key{m.port, m.id};
  const auto rx_proc = cfg_.latency.cycles(cfg_.latency.host.mdata_rx_proc);
  if (tombstones_.contains(key)) {
    ++stats_.late_responses_dropped;
    if (m.last) {
      tombstones_.erase(key);
      free_id(m.port, m.id);
      try_dequeue();
    }
    return;
  }
  auto it = reads_.find(key);
  if (it == reads_.end()) throw ProtocolViolation("read response for unknown id");
  ReadState& r = it->second;
  if (r.received != m.offset && !m.nack) throw ProtocolViolation("read response out of order");
  r.first_data = std::min(r.first_data, head + rx_proc);
  if (keep_results_ && !m.data.empty() && !m.nack) {
    if (m.offset + m.data.size() > r.buffer.size()) throw ProtocolViolation("read response overruns request");
    std::copy(m.data.begin(), m.data.end(), r.buffer.begin() + m.offset);
  }
  r.received += m.size;
  r.nack = r.nack || m.nack;
  account_rx(m.size, head);
  if (m.last) {
    if (!r.nack && r.received != r.expected) throw ProtocolViolation("read response size mismatch");
    r.generation = 0;  // last chunk in: the timer no longer applies
    sim_.schedule_at(tail + rx_proc, [this, key, done = tail + rx_proc] { finish_read(key, done, false); });
  }
}

void EdmHost::finish_read(PeerMessageKey key, SimTime at, bool null_response) {
  auto it = reads_.find(key);
  if (it == reads_.end()) return;
  ReadState r = std::move(it->second);
  reads_.erase(it);
  PeerState& p = peers_[key.peer.value()];
  --p.active_reads;
  if (null_response) {
    tombstones_.insert(key);
  } else {
    free_id(key.peer, key.id);
  }
  if (obs_ != nullptr) {
    fabric::CompletionRecord c;
    c.submit = r.submit;
    c.complete = at;
    c.first_data = null_response ? at : r.first_data;
    c.kind = r.kind;
    c.src = self_;
    c.dst = key.peer;
    c.id = key.id;
    c.bytes = null_response || r.nack ? 0 : r.received;
    c.null_response = null_response;
    c.nack = r.nack;
    if (keep_results_ && !null_response) c.result = std::move(r.buffer);
    obs_->on_read_complete(std::move(c));
  }
  try_dequeue();
}

void EdmHost::on_read_timeout(PeerMessageKey key, std::uint64_t generation) {
  auto it = reads_.find(key);
  if (it == reads_.end() || it->second.generation != generation) return;
  ++stats_.timeouts;
  finish_read(key, sim_.now(), true);
}

void EdmHost::handle_wreq_data(const phy::MessageUnit& m, SimTime head, SimTime tail) {
  const PeerMessageKey key{m.port, m.id};
  const auto rx_proc = cfg_.latency.cycles(cfg_.latency.host.mdata_rx_proc);
  auto [it, fresh] = write_first_data_.try_emplace(key, head + rx_proc);
  (void)fresh;
  if (cfg_.endpoint.functional_memory) memory_.write(m.addr, m.data);
  account_rx(m.size, head);
  if (m.last) {
    const SimTime first = it->second;
    write_first_data_.erase(it);
    if (obs_ != nullptr) obs_->on_write_landed(m.port, self_, m.id, first, tail + rx_proc);
  }
}

void EdmHost::account_rx(std::uint32_t bytes, SimTime at) {
  if (bytes == 0) return;
  if (gauge_.add(bytes, at)) {
    ++stats_.pauses_sent;
    send_now({phy::PhyBlock::control(phy::BlockType::kPause)}, sim::TxClass::kPriority);
    check_resume();
  }
}

void EdmHost::check_resume() {
  if (resume_check_pending_) return;
  resume_check_pending_ = true;
  const SimTime at = std::max(sim_.now(), gauge_.below_threshold_at());
  sim_.schedule_at(at, [this] {
    resume_check_pending_ = false;
    if (gauge_.poll(sim_.now())) {
      ++stats_.resumes_sent;
      send_now({phy::PhyBlock::control(phy::BlockType::kResume)}, sim::TxClass::kPriority);
    } else if (gauge_.paused_sent()) {
      check_resume();
    }
  });
}

}  // namespace edm::host
