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

#include "edm/switching/switch.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "edm/core/wire.hpp"
#include "edm/phy/codec.hpp"

namespace edm::switching {

BlockClass classify(const phy::PhyBlock& first) {
  if (!first.is_control()) return BlockClass::kOther;
  switch (first.type()) {
    case phy::BlockType::kN:
    case phy::BlockType::kPause:
    case phy::BlockType::kResume:
      return BlockClass::kNotification;
    case phy::BlockType::kG:
      return BlockClass::kGrant;
    case phy::BlockType::kMS:
    case phy::BlockType::kMST: {
      const auto k = phy::peek_opener(first).kind;
      return k == MessageKind::kRreq || k == MessageKind::kRmwreq ? BlockClass::kMemoryControl
                                                                   : BlockClass::kMemoryData;
    }
    default:
      return BlockClass::kOther;
  }
}

PortId CircuitMap::consume(PortId ingress, MessageId id, std::uint32_t bytes) {
  auto& q = bindings_[ingress.value()];
  if (q.empty()) throw ProtocolViolation("memory data on port " + std::to_string(ingress.value()) + " without a grant");
  Binding& b = q.front();
  if (b.id != id) throw ProtocolViolation("memory data id does not match the granted chunk");
  if (bytes > b.remaining) throw ProtocolViolation("memory data exceeds the granted chunk");
  b.remaining -= bytes;
  const PortId egress = b.egress;
  if (b.remaining == 0) q.pop_front();
  return egress;
}

EdmSwitch::EdmSwitch(sim::Simulator& sim, const ClusterConfig& cfg, sim::UnitStore& store,
                     sched::SchedulerOptions opt)
    : sim_(sim),
      cfg_(cfg),
      store_(store),
      n_(static_cast<std::size_t>(cfg.n_ports)),
      sched_(sim, cfg, this, opt),
      circuits_(cfg.n_ports),
      audit_(n_ * n_) {}

void EdmSwitch::connect(const std::vector<sim::LinkReceiver*>& hosts) {
  if (hosts.size() != n_) throw std::invalid_argument("one receiver per port required");
  down_.clear();
  for (std::size_t p = 0; p < n_; ++p) {
    down_.push_back(std::make_unique<sim::Link>(sim_, "down" + std::to_string(p), cfg_.slot(),
                                                cfg_.latency.hop_fixed(), hosts[p], static_cast<int>(p)));
  }
}

void EdmSwitch::send(PortId egress, std::vector<phy::PhyBlock> blocks, sim::TxClass cls) {
  sim::WireUnit u;
  u.n_blocks = static_cast<std::uint32_t>(blocks.size());
  u.cls = cls;
  u.not_before = sim_.now();
  u.token = store_.put(std::move(blocks));
  down_[egress.value()]->send(u);
}

void EdmSwitch::on_unit(int rx_port, const sim::WireUnit& u, SimTime head, SimTime tail) {
  const PortId ingress(static_cast<std::uint16_t>(rx_port));
  const auto& lat = cfg_.latency;
  const phy::PhyBlock first = store_.get(u.token).front();
  switch (classify(first)) {
    case BlockClass::kNotification: {
      store_.release(u.token);
      sim_.schedule_at(head + lat.cycles(lat.sw.classify), [this, ingress, first] {
        if (first.is(phy::BlockType::kPause)) {
          ++stats_.pauses;
          sched_.pause(ingress);
          return;
        }
        if (first.is(phy::BlockType::kResume)) {
          ++stats_.resumes;
          sched_.resume(ingress);
          return;
        }
        const ControlBundle b = unpack_bundle(first.control_payload());
        NotificationRecord rec;
        rec.src = ingress;
        rec.dst = b.port;
        rec.id = b.id;
        rec.total_bytes = b.size;
        ++stats_.notifications;
        if (b.port == ingress || b.port.value() >= n_ || b.size == 0)
          throw ProtocolViolation("malformed notification");
        if (sched_.on_notification(rec) == sched::NotifyResult::kRejected) ++stats_.rejected;
      });
      return;
    }
    case BlockClass::kMemoryControl: {
      const std::uint64_t token = u.token;
      sim_.schedule_at(tail + lat.cycles(lat.sw.classify), [this, ingress, token] { intercept_request(ingress, token); });
      return;
    }
    case BlockClass::kMemoryData: {
      const sim::WireUnit unit = u;
      sim_.schedule_at(head + lat.cycles(lat.sw.classify + lat.sw.forward),
                       [this, ingress, unit] { forward_data(ingress, unit); });
      return;
    }
    case BlockClass::kGrant:
      store_.release(u.token);
      throw ProtocolViolation("grant block received from a host");
    case BlockClass::kOther: {
      if (!first.is(phy::BlockType::kS)) {
        store_.release(u.token);
        throw ProtocolViolation("unexpected block type at switch ingress");
      }
      // Layer-2 path: fixed pipeline, egress from the first frame byte.
      ++stats_.frames;
      const PortId egress(static_cast<std::uint16_t>((first.control_payload() & 0xFF) % n_));
      sim::WireUnit unit = u;
      unit.cls = sim::TxClass::kBulk;
      sim_.schedule_at(head + SimTime::from_ns(l2_.total_ns()), [this, egress, ingress, unit]() mutable {
        if (egress == ingress) {
          store_.release(unit.token);
          return;
        }
        unit.not_before = sim_.now();
        down_[egress.value()]->send(unit);
      });
      return;
    }
  }
}

void EdmSwitch::intercept_request(PortId ingress, std::uint64_t token) {
  std::vector<phy::PhyBlock> blocks = store_.take(token);
  const phy::MessageUnit m = phy::decode_memory_message(blocks);
  if (m.port == ingress || m.port.value() >= n_) throw ProtocolViolation("request addressed to its own port");
  NotificationRecord rec;
  rec.src = m.port;  // the memory node sends the response
  rec.dst = ingress;
  rec.id = m.id;
  rec.is_implicit_rreq = true;
  if (m.kind == MessageKind::kRreq) {
    rec.total_bytes = m.size;
  } else {
    // Unknown opcodes reserve one byte: the NACK response is padded to it.
    rec.total_bytes = std::max<std::uint32_t>(1, m.opcode ? rmw_response_bytes(*m.opcode) : 0);
  }
  blocks.front() = phy::rewrite_opener_port(blocks.front(), ingress);
  ++stats_.requests;
  if (sched_.on_notification(rec, std::move(blocks)) == sched::NotifyResult::kRejected) ++stats_.rejected;
}

void EdmSwitch::forward_data(PortId ingress, const sim::WireUnit& u) {
  const auto& blocks = store_.get(u.token);
  const phy::OpenerView op = phy::peek_opener(blocks.front());
  const PortId egress = circuits_.consume(ingress, op.id, op.size);
  PairAudit& a = audit_[index(ingress, egress)];
  a.forwarded += op.size;
  if (a.forwarded > a.granted) throw ProtocolViolation("forwarded bytes exceed granted bytes");
  ++stats_.data_units;
  stats_.data_bytes += op.size;
  sim::WireUnit out = u;
  out.cls = sim::TxClass::kBulk;
  out.not_before = sim_.now();
  down_[egress.value()]->send(out);
}

void EdmSwitch::on_grant(sched::IssuedGrant g) {
  circuits_.install(g.src, {g.dst, g.id, g.len});
  audit_[index(g.src, g.dst)].granted += g.len;
  const SimTime gen = cfg_.latency.cycles(cfg_.latency.sw.g_block_gen);
  if (g.implicit_first) {
    ++stats_.requests_forwarded;
    sim_.schedule_in(gen, [this, to = g.src, b = std::move(g.forwarded_request)]() mutable {
      send(to, std::move(b), sim::TxClass::kPriority);
    });
    return;
  }
  ++stats_.grants_sent;
  std::uint64_t bits = pack_bundle({g.dst, g.id, g.len});
  if (g.data_kind == MessageKind::kRres) bits |= std::uint64_t{1} << kGrantResponseBit;
  const auto blk = phy::PhyBlock::control(phy::BlockType::kG, bits);
  sim_.schedule_in(gen, [this, to = g.src, blk] { send(to, {blk}, sim::TxClass::kPriority); });
}

void EdmSwitch::write_audit_csv(std::ostream& os) const {
  os << "src,dst,granted_bytes,forwarded_bytes\n";
  for (std::size_t s = 0; s < n_; ++s)
    for (std::size_t d = 0; d < n_; ++d) {
      const PairAudit& a = audit_[s * n_ + d];
      if (a.granted == 0 && a.forwarded == 0) continue;
      os << s << ',' << d << ',' << a.granted << ',' << a.forwarded << '\n';
    }
}

}  // namespace edm::switching
