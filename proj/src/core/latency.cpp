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

#include "edm/core/latency.hpp"

#include <cmath>
#include <string>

namespace edm {

SimTime ClusterConfig::slot() const { return SimTime(std::llround(66.0 * 1000.0 / link_gbps)); }

SimTime ClusterConfig::bytes_time(std::uint64_t bytes) const {
  return SimTime(std::llround(static_cast<double>(bytes) * 8.0 * 1000.0 / link_gbps));
}

SimTime ClusterConfig::sched_cycles(double n) const {
  return SimTime(std::llround(n * 1000.0 / scheduler_clock_ghz));
}

SimTime ClusterConfig::base_rtt() const {
  const auto& l = latency;
  return l.hop_fixed() * 2 + l.cycles(l.sw.classify + l.sw.forward);
}

std::uint64_t ClusterConfig::bdp_bytes() const {
  return static_cast<std::uint64_t>(std::ceil(base_rtt().ns() * link_gbps / 8.0));
}

void ClusterConfig::validate() const {
  if (n_ports < 2 || n_ports > kMaxPorts) throw std::invalid_argument("n_ports must be in [2, 512]");
  if (!(link_gbps > 0)) throw std::invalid_argument("link_gbps must be positive");
  if (chunk_bytes == 0 || chunk_bytes > kMaxWireSize) throw std::invalid_argument("chunk_bytes must be in [1, 65535]");
  if (max_active_notifications < 1) throw std::invalid_argument("max_active_notifications must be >= 1");
  if (!(scheduler_clock_ghz > 0)) throw std::invalid_argument("scheduler_clock_ghz must be positive");
  if (!(latency.cycle_ns > 0)) throw std::invalid_argument("cycle_ns must be positive");
  if (endpoint.compute_fraction <= 0 || endpoint.compute_fraction >= 1)
    throw std::invalid_argument("compute_fraction must be in (0, 1)");
}

ClusterConfig ClusterConfig::testbed() {
  ClusterConfig c;
  c.n_ports = 2;
  c.link_gbps = 25.0;
  c.chunk_bytes = 256;
  c.max_active_notifications = 3;
  c.scheduler_clock_ghz = 1.0 / c.latency.cycle_ns;
  return c;
}

ClusterConfig ClusterConfig::rack() { return ClusterConfig{}; }

}  // namespace edm
