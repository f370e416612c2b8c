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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "edm/core/types.hpp"

namespace edm::host {

// Sparse byte-addressable memory; unwritten bytes read as zero.
class MemoryStore {
 public:
  static constexpr std::uint64_t kPageBytes = 4096;

  void write(std::uint64_t addr, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> read(std::uint64_t addr, std::uint32_t n) const;
  void read_into(std::uint64_t addr, std::span<std::uint8_t> out) const;
  std::uint64_t load_u64(std::uint64_t addr) const;
  void store_u64(std::uint64_t addr, std::uint64_t v);
  std::size_t pages() const { return pages_.size(); }

 private:
  using Page = std::array<std::uint8_t, kPageBytes>;
  std::unordered_map<std::uint64_t, Page> pages_;
};

struct RmwOutcome {
  bool nack = false;
  std::vector<std::uint8_t> response;
};

// Executes one atomic in isolation. CAS: args = {expected, desired, mask};
// only bits under mask are compared and replaced, mask 0 means all bits.
// The response is one byte (1 = swapped). FETCH_ADD: args[0] is the addend and
// the response is the old 8-byte value. Unknown opcodes yield a NACK.
RmwOutcome execute_rmw(MemoryStore& mem, std::uint8_t opcode, std::uint64_t addr,
                       const std::array<std::uint64_t, 3>& args);

}  // namespace edm::host
