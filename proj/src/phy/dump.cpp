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

#include "edm/phy/dump.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "edm/core/types.hpp"

namespace edm::phy {

void dump_block_stream(std::ostream& os, std::span<const PhyBlock> stream, std::size_t first_slot) {
  os << "slot,sync,type,payload_hex\n";
  char hex[24];
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const PhyBlock& b = stream[i];
    if (b.is_data()) {
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(b.data_payload()));
      os << first_slot + i << ",10,-," << hex << '\n';
    } else {
      std::snprintf(hex, sizeof hex, "%014llx", static_cast<unsigned long long>(b.control_payload()));
      os << first_slot + i << ",01," << to_string(b.type()) << ',' << hex << '\n';
    }
  }
}

std::string dump_block_stream(std::span<const PhyBlock> stream) {
  std::ostringstream os;
  dump_block_stream(os, stream);
  return os.str();
}

std::vector<PhyBlock> parse_block_dump(std::istream& is) {
  std::vector<PhyBlock> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.rfind("slot", 0) == 0) continue;
    std::istringstream ls(line);
    std::string slot, sync, type, payload;
    if (!std::getline(ls, slot, ',') || !std::getline(ls, sync, ',') || !std::getline(ls, type, ',') ||
        !std::getline(ls, payload))
      throw ProtocolViolation("malformed dump line " + std::to_string(lineno));
    const std::uint64_t value = std::stoull(payload, nullptr, 16);
    if (sync == "10") {
      out.push_back(PhyBlock::data(value));
    } else if (sync == "01") {
      auto t = parse_block_type(type);
      if (!t) throw ProtocolViolation("unknown block type on dump line " + std::to_string(lineno));
      out.push_back(PhyBlock::control(*t, value));
    } else {
      throw ProtocolViolation("bad sync header on dump line " + std::to_string(lineno));
    }
  }
  return out;
}

}  // namespace edm::phy
