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

#include "edm/baselines/models.hpp"

#include <stdexcept>

#include "edm/fabric/edm_fabric.hpp"
#include "edm/phy/codec.hpp"

namespace edm::baselines {

SimTime path_ideal(const ClusterConfig& cfg, const PathShape& shape, MessageKind kind, std::uint32_t size) {
  const auto& l = cfg.latency;
  const bool write = kind == MessageKind::kWreq;
  const std::uint32_t bytes = std::max<std::uint32_t>(1, size);
  const auto data = fabric::data_blocks(write ? MessageKind::kWreq : MessageKind::kRres, bytes, cfg.chunk_bytes);
  SimTime t = cfg.slot() * static_cast<std::int64_t>(data - 1);
  if (write) return t + l.cycles(shape.write_cycles) + l.hop_fixed() * shape.write_hops;
  const auto req = phy::memory_block_count(kind, kind == MessageKind::kRmwreq ? kRmwArgBytes : bytes, 0);
  t += cfg.slot() * static_cast<std::int64_t>(req - 1);
  return t + l.cycles(shape.read_cycles) + l.hop_fixed() * shape.read_hops + l.dram();
}

const std::vector<std::string>& fabric_names() {
  static const std::vector<std::string> names{"edm", "ird", "dctcp", "pfabric", "pfc", "cxl", "fastpass"};
  return names;
}

std::unique_ptr<fabric::Fabric> make_fabric(std::string_view name, const ClusterConfig& cfg) {
  if (name == "edm") return std::make_unique<fabric::EdmFabric>(cfg);
  if (name == "ird") return std::make_unique<IrdFabric>(cfg);
  if (name == "dctcp") return std::make_unique<ReactiveFabric>(cfg, false);
  if (name == "pfabric") return std::make_unique<ReactiveFabric>(cfg, true);
  if (name == "pfc") return std::make_unique<PfcFabric>(cfg);
  if (name == "cxl") return std::make_unique<CreditFabric>(cfg);
  if (name == "fastpass") return std::make_unique<FastpassFabric>(cfg);
  throw std::invalid_argument("unknown fabric '" + std::string(name) + "'");
}

}  // namespace edm::baselines
