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

#include "edm/fabric/edm_fabric.hpp"

#include <stdexcept>
#include <string>

namespace edm::fabric {

EdmFabric::EdmFabric(const ClusterConfig& cfg, EdmFabricOptions opt) : cfg_(cfg) {
  cfg_.validate();
  switch_ = std::make_unique<switching::EdmSwitch>(sim_, cfg_, units_, opt.scheduler);
  std::vector<sim::LinkReceiver*> rx;
  for (int p = 0; p < cfg_.n_ports; ++p) {
    auto h = std::make_unique<host::EdmHost>(sim_, cfg_, PortId(static_cast<std::uint16_t>(p)), units_, this);
    h->connect(switch_.get());
    h->set_keep_results(opt.keep_results);
    rx.push_back(h.get());
    hosts_.push_back(std::move(h));
  }
  switch_->connect(rx);
}

void EdmFabric::submit(const Request& r) {
  if (r.src.value() >= hosts_.size()) throw std::invalid_argument("source out of range");
  ++submitted_;
  hosts_[r.src.value()]->submit(r);
}

FabricCounters EdmFabric::counters() const {
  FabricCounters c;
  c.submitted = submitted_;
  c.completed = log_.size();
  for (const auto& h : hosts_) {
    c.timeouts += h->stats().timeouts;
    c.pauses += h->stats().pauses_sent;
  }
  for (int p = 0; p < cfg_.n_ports; ++p) {
    const auto& st = switch_->downlink(PortId(static_cast<std::uint16_t>(p))).stats();
    c.max_egress_data_blocks = std::max<std::uint64_t>(c.max_egress_data_blocks, st.max_queued_blocks);
  }
  return c;
}

void EdmFabric::enable_utilization(SimTime bucket) {
  for (int p = 0; p < cfg_.n_ports; ++p) {
    const PortId id(static_cast<std::uint16_t>(p));
    hosts_[id.value()]->uplink().enable_utilization(bucket);
    switch_->downlink(id).enable_utilization(bucket);
  }
}

SimTime EdmFabric::ideal_mct(MessageKind kind, std::uint32_t size) const {
  const auto& l = cfg_.latency;
  const bool read = kind != MessageKind::kWreq;
  const MessageKind data_kind = read ? MessageKind::kRres : MessageKind::kWreq;
  // Request or notification, one-iteration round, grant or forwarded request,
  // then the data path; later chunks follow back to back.
  const int host_switch = read ? l.host.ntf_gen + l.sw.classify + l.sw.g_block_gen + l.host.g_block_proc +
                                     l.host.rreq_to_memctrl_extra + (l.host.grant_q_read + l.host.mdata_gen) +
                                     l.sw.classify + l.sw.forward + l.host.mdata_rx_proc
                               : l.host.ntf_gen + l.sw.classify + l.sw.g_block_gen + l.host.g_block_proc +
                                     l.host.grant_q_read + l.host.mdata_gen + l.sw.classify + l.sw.forward +
                                     l.host.mdata_rx_proc;
  SimTime t = l.cycles(host_switch) + cfg_.sched_cycles(l.sched.head_read + l.sched.per_iteration) + l.hop_fixed() * 4;
  if (read) t += l.dram();
  const auto blocks = data_blocks(data_kind, std::max<std::uint32_t>(1, size), cfg_.chunk_bytes);
  return t + cfg_.slot() * static_cast<std::int64_t>(blocks - 1);
}

void EdmFabric::on_read_complete(CompletionRecord r) { log_.add(std::move(r)); }

void EdmFabric::on_write_issued(PortId src, PortId dst, MessageId id, SimTime submit, std::uint32_t bytes) {
  const std::uint32_t key = static_cast<std::uint32_t>(src.value()) * kMaxPorts + dst.value();
  writes_in_flight_[key].push_back({id, submit, bytes});
}

void EdmFabric::on_write_landed(PortId src, PortId at, MessageId id, SimTime first_data, SimTime done) {
  const std::uint32_t key = static_cast<std::uint32_t>(src.value()) * kMaxPorts + at.value();
  auto it = writes_in_flight_.find(key);
  if (it == writes_in_flight_.end() || it->second.empty()) throw ProtocolViolation("write landed that was never issued");
  const PendingWrite w = it->second.front();
  if (w.id != id) throw ProtocolViolation("writes landed out of order: " + std::to_string(src.value()) + "->" + std::to_string(at.value()) + " expected id " + std::to_string(w.id.value()) + " got " + std::to_string(id.value()) + " at " + std::to_string(done.ps()));
  it->second.pop_front();
  CompletionRecord r;
  r.submit = w.submit;
  r.complete = done;
  r.first_data = first_data;
  r.kind = MessageKind::kWreq;
  r.src = src;
  r.dst = at;
  r.id = id;
  r.bytes = w.bytes;
  log_.add(std::move(r));
}

}  // namespace edm::fabric
