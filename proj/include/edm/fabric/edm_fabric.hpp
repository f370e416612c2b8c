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

#include <deque>
#include <memory>
#include <unordered_map>
#include <vector>

#include "edm/fabric/fabric.hpp"
#include "edm/host/host.hpp"
#include "edm/sim/unit_store.hpp"
#include "edm/switching/switch.hpp"

namespace edm::fabric {

struct EdmFabricOptions {
  sched::SchedulerOptions scheduler;
  bool keep_results = false;  // copy read payloads into completion records
};

// Single-switch EDM rack: one EdmHost per port around one EdmSwitch.
class EdmFabric final : public Fabric, public host::HostObserver {
 public:
  explicit EdmFabric(const ClusterConfig& cfg, EdmFabricOptions opt = {});
  EdmFabric(const EdmFabric&) = delete;
  EdmFabric& operator=(const EdmFabric&) = delete;

  std::string_view name() const override { return "edm"; }
  void submit(const Request& r) override;
  const ClusterConfig& config() const override { return cfg_; }
  sim::Simulator& sim() override { return sim_; }
  CompletionLog& completions() override { return log_; }
  FabricCounters counters() const override;
  const sim::Link& uplink(PortId p) const override { return hosts_[p.value()]->uplink(); }
  const sim::Link& downlink(PortId p) const override { return switch_->downlink(p); }
  void enable_utilization(SimTime bucket) override;
  SimTime ideal_mct(MessageKind kind, std::uint32_t size) const override;

  host::EdmHost& host(PortId p) { return *hosts_[p.value()]; }
  switching::EdmSwitch& fabric_switch() { return *switch_; }
  const sim::UnitStore& units() const { return units_; }

  void on_read_complete(CompletionRecord r) override;
  void on_write_issued(PortId src, PortId dst, MessageId id, SimTime submit, std::uint32_t bytes) override;
  void on_write_landed(PortId src, PortId at, MessageId id, SimTime first_data, SimTime done) override;

 private:
  struct PendingWrite {
    MessageId id;
    SimTime submit;
    std::uint32_t bytes;
  };

  ClusterConfig cfg_;
  sim::Simulator sim_;
  sim::UnitStore units_;
  std::unique_ptr<switching::EdmSwitch> switch_;
  std::vector<std::unique_ptr<host::EdmHost>> hosts_;
  std::unordered_map<std::uint32_t, std::deque<PendingWrite>> writes_in_flight_;
  CompletionLog log_;
  std::uint64_t submitted_ = 0;
};

}  // namespace edm::fabric
