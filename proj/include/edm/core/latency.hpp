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

#include "edm/core/time.hpp"
#include "edm/core/types.hpp"

namespace edm {

struct HostCycles {
  int ntf_gen = 2;
  int grant_q_read = 4;
  int mdata_gen = 3;
  int g_block_proc = 2;
  int rreq_to_memctrl_extra = 1;
  int mdata_rx_proc = 3;
};

struct SwitchCycles {
  int g_block_gen = 1;
  int classify = 1;
  int forward = 4;
};

// Counted in scheduler clock cycles (1/R), not host cycles.
struct SchedulerCycles {
  int insert = 2;      // pipelined, not charged as latency
  int head_read = 1;   // queue head visible to phase 1
  int per_iteration = 3;
};

struct ReferenceTotals {
  double edm_read_ns = 299.52;
  double edm_write_ns = 296.96;
};

struct LatencyProfile {
  double cycle_ns = 2.56;
  HostCycles host;
  SwitchCycles sw;
  SchedulerCycles sched;
  double pcs_fixed_ns = 5.12;
  double pma_pmd_transceiver_ns = 19.0;
  double propagation_ns = 10.0;
  double dram_ns = 0.0;
  ReferenceTotals reference;

  SimTime cycles(int n) const { return SimTime::from_ns(n * cycle_ns); }
  SimTime pcs() const { return SimTime::from_ns(pcs_fixed_ns); }
  SimTime pma() const { return SimTime::from_ns(pma_pmd_transceiver_ns); }
  SimTime propagation() const { return SimTime::from_ns(propagation_ns); }
  SimTime dram() const { return SimTime::from_ns(dram_ns); }
  // TX PCS + PMA + wire + PMA + RX PCS for one hop, first bit.
  SimTime hop_fixed() const { return pcs() * 2 + pma() * 2 + propagation(); }
};

// Per-endpoint knobs that are not part of the latency table.
struct EndpointParams {
  double compute_fraction = 0.5;      // first share of ports act as compute nodes
  double rx_drain_gbps = 0.0;         // 0 drains instantly; PAUSE never fires
  double pause_threshold_bdp = 2.0;
  double read_timeout_us = 10.0;
  bool batch_writes = false;          // coalesce queued WREQs per destination
  bool functional_memory = true;      // keep written bytes at memory nodes
};

struct ClusterConfig {
  int n_ports = 144;
  double link_gbps = 100.0;
  std::uint32_t chunk_bytes = 256;
  int max_active_notifications = 3;
  double scheduler_clock_ghz = 3.0;
  PriorityPolicy priority_policy = PriorityPolicy::kFcfs;
  LatencyProfile latency;
  EndpointParams endpoint;

  // 66-bit block time on one simplex link.
  SimTime slot() const;
  // Payload-rate transmission time of `bytes`.
  SimTime bytes_time(std::uint64_t bytes) const;
  SimTime sched_cycles(double n) const;
  // One round trip host -> switch -> host, first bit, no queuing.
  SimTime base_rtt() const;
  std::uint64_t bdp_bytes() const;

  void validate() const;

  // Two-port 25 G testbed whose scheduler runs on the 2.56 ns fabric clock.
  static ClusterConfig testbed();
  // 144-node 100 G rack used for loaded-network studies.
  static ClusterConfig rack();
};

}  // namespace edm
