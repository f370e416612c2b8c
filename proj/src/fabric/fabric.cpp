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

#include "edm/fabric/fabric.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "edm/phy/codec.hpp"

namespace edm::fabric {

void CompletionLog::write_csv(std::ostream& os, std::string_view model) const {
  os << "submit_ps,complete_ps,kind,src,dst,id,bytes";
  if (!model.empty()) os << ",model";
  os << '\n';
  for (const auto& r : records_) {
    os << r.submit.ps() << ',' << r.complete.ps() << ',' << to_string(r.kind) << ',' << r.src.value() << ','
       << r.dst.value() << ',' << static_cast<int>(r.id.value()) << ',' << r.bytes;
    if (!model.empty()) os << ',' << model;
    os << '\n';
  }
}

std::vector<CompletionRecord> CompletionLog::read_csv(std::istream& is) {
  std::vector<CompletionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.rfind("submit_ps", 0) == 0) continue;
    std::istringstream ss(line);
    std::string f[7];
    for (auto& x : f) {
      if (!std::getline(ss, x, ',')) throw std::runtime_error("completion log line " + std::to_string(lineno) + ": too few fields");
    }
    CompletionRecord r;
    r.submit = SimTime::from_ps(std::stoll(f[0]));
    r.complete = SimTime::from_ps(std::stoll(f[1]));
    const auto k = parse_message_kind(f[2]);
    if (!k) throw std::runtime_error("completion log line " + std::to_string(lineno) + ": bad kind " + f[2]);
    r.kind = *k;
    r.src = PortId(static_cast<std::uint16_t>(std::stoul(f[3])));
    r.dst = PortId(static_cast<std::uint16_t>(std::stoul(f[4])));
    r.id = MessageId(static_cast<std::uint8_t>(std::stoul(f[5])));
    r.bytes = static_cast<std::uint32_t>(std::stoul(f[6]));
    out.push_back(std::move(r));
  }
  return out;
}

std::uint32_t data_bytes(MessageKind kind, std::uint32_t size, std::optional<RmwOpcode> opcode) {
  if (kind == MessageKind::kRmwreq) return opcode ? rmw_response_bytes(*opcode) : 1;
  return size;
}

std::uint64_t data_blocks(MessageKind data_kind, std::uint32_t bytes, std::uint32_t chunk_bytes) {
  std::uint64_t total = 0;
  for (std::uint32_t off = 0; off < bytes; off += chunk_bytes) {
    const std::uint32_t len = std::min(chunk_bytes, bytes - off);
    total += phy::memory_block_count(data_kind, len, 0, off, off + len == bytes);
  }
  return total;
}

bool run_requests(Fabric& f, const std::vector<Request>& reqs, SimTime horizon) {
  auto& sim = f.sim();
  // Arrivals are injected one at a time to keep the event heap small.
  struct Feeder {
    Fabric& f;
    const std::vector<Request>& reqs;
    std::size_t next = 0;
    void arm() {
      if (next >= reqs.size()) return;
      const SimTime at = std::max(reqs[next].arrival, f.sim().now());
      f.sim().schedule_at(at, [this] { fire(); });
    }
    void fire() {
      const SimTime now = f.sim().now();
      while (next < reqs.size() && reqs[next].arrival <= now) f.submit(reqs[next++]);
      arm();
    }
  };
  Feeder feeder{f, reqs};
  feeder.arm();
  sim.run(horizon);
  return f.outstanding() == 0 && feeder.next == reqs.size();
}

}  // namespace edm::fabric
