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
#include <iosfwd>
#include <memory>
#include <vector>

#include "edm/core/latency.hpp"
#include "edm/core/types.hpp"
#include "edm/phy/block.hpp"
#include "edm/sched/scheduler.hpp"
#include "edm/sim/engine.hpp"
#include "edm/sim/link.hpp"
#include "edm/sim/unit_store.hpp"

namespace edm::switching {

enum class BlockClass { kNotification, kGrant, kMemoryControl, kMemoryData, kOther };

// Pure classification by block type; /M*/ openers split on message kind.
BlockClass classify(const phy::PhyBlock& first);

// Fixed layer-2 pipeline for non-memory frames, in ns.
struct Layer2Pipeline {
  double parse_ns = 87;
  double match_ns = 202;
  double manager_ns = 93;
  double crossbar_ns = 18;
  double total_ns() const { return parse_ns + match_ns + manager_ns + crossbar_ns; }
};

// Ingress-to-egress bindings installed by grants, consumed by data in order.
class CircuitMap {
 public:
  struct Binding {
    PortId egress;
    MessageId id;
    std::uint32_t remaining = 0;
  };
  explicit CircuitMap(int n_ports) : bindings_(static_cast<std::size_t>(n_ports)) {}

  void install(PortId ingress, Binding b) { bindings_[ingress.value()].push_back(b); }
  // Consumes `bytes` of the front binding; throws ProtocolViolation on a missing
  // binding, an id mismatch or an overrun. The binding retires when drained.
  PortId consume(PortId ingress, MessageId id, std::uint32_t bytes);
  std::size_t pending(PortId ingress) const { return bindings_[ingress.value()].size(); }

 private:
  std::vector<std::deque<Binding>> bindings_;
};

struct PairAudit {
  std::uint64_t granted = 0;
  std::uint64_t forwarded = 0;
};

struct SwitchStats {
  std::uint64_t notifications = 0;
  std::uint64_t requests = 0;
  std::uint64_t rejected = 0;
  std::uint64_t grants_sent = 0;
  std::uint64_t requests_forwarded = 0;
  std::uint64_t data_units = 0;
  std::uint64_t data_bytes = 0;
  std::uint64_t frames = 0;
  std::uint64_t pauses = 0;
  std::uint64_t resumes = 0;
};

// Switch data path around the in-switch scheduler.
class EdmSwitch final : public sim::LinkReceiver, public sched::GrantSink {
 public:
  EdmSwitch(sim::Simulator& sim, const ClusterConfig& cfg, sim::UnitStore& store,
            sched::SchedulerOptions opt = {});
  EdmSwitch(const EdmSwitch&) = delete;
  EdmSwitch& operator=(const EdmSwitch&) = delete;

  // Creates the downlink to every host.
  void connect(const std::vector<sim::LinkReceiver*>& hosts);

  void on_unit(int rx_port, const sim::WireUnit& u, SimTime head, SimTime tail) override;
  void on_grant(sched::IssuedGrant g) override;

  sched::Scheduler& scheduler() { return sched_; }
  const sched::Scheduler& scheduler() const { return sched_; }
  sim::Link& downlink(PortId p) { return *down_[p.value()]; }
  const sim::Link& downlink(PortId p) const { return *down_[p.value()]; }
  const SwitchStats& stats() const { return stats_; }
  const PairAudit& audit(PortId s, PortId d) const { return audit_[index(s, d)]; }
  // src,dst,granted_bytes,forwarded_bytes for pairs with any traffic.
  void write_audit_csv(std::ostream& os) const;
  const Layer2Pipeline& layer2() const { return l2_; }

 private:
  std::size_t index(PortId s, PortId d) const { return static_cast<std::size_t>(s.value()) * n_ + d.value(); }
  void send(PortId egress, std::vector<phy::PhyBlock> blocks, sim::TxClass cls);
  void forward_data(PortId ingress, const sim::WireUnit& u);
  void intercept_request(PortId ingress, std::uint64_t token);

  sim::Simulator& sim_;
  ClusterConfig cfg_;
  sim::UnitStore& store_;
  std::size_t n_;
  sched::Scheduler sched_;
  CircuitMap circuits_;
  std::vector<std::unique_ptr<sim::Link>> down_;
  std::vector<PairAudit> audit_;
  Layer2Pipeline l2_;
  SwitchStats stats_;
};

}  // namespace edm::switching
