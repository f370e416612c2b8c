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

#include "edm/host/memory_store.hpp"

#include <algorithm>
#include <cstring>

namespace edm::host {

void MemoryStore::write(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const std::uint64_t a = addr + done;
    const std::uint64_t off = a % kPageBytes;
    const std::size_t n = std::min<std::size_t>(bytes.size() - done, kPageBytes - off);
    auto [it, fresh] = pages_.try_emplace(a / kPageBytes);
    if (fresh) it->second.fill(0);
    std::memcpy(it->second.data() + off, bytes.data() + done, n);
    done += n;
  }
}

void MemoryStore::read_into(std::uint64_t addr, std::span<std::uint8_t> out) const {
  std::size_t done = 0;
  while (done < out.size()) {
    const std::uint64_t a = addr + done;
    const std::uint64_t off = a % kPageBytes;
    const std::size_t n = std::min<std::size_t>(out.size() - done, kPageBytes - off);
    const auto it = pages_.find(a / kPageBytes);
    if (it == pages_.end()) {
      std::fill_n(out.data() + done, n, std::uint8_t{0});
    } else {
      std::memcpy(out.data() + done, it->second.data() + off, n);
    }
    done += n;
  }
}

std::vector<std::uint8_t> MemoryStore::read(std::uint64_t addr, std::uint32_t n) const {
  std::vector<std::uint8_t> out(n);
  read_into(addr, out);
  return out;
}

std::uint64_t MemoryStore::load_u64(std::uint64_t addr) const {
  std::array<std::uint8_t, 8> b{};
  read_into(addr, b);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

void MemoryStore::store_u64(std::uint64_t addr, std::uint64_t v) {
  std::array<std::uint8_t, 8> b{};
  for (auto& x : b) {
    x = static_cast<std::uint8_t>(v);
    v >>= 8;
  }
  write(addr, b);
}

RmwOutcome execute_rmw(MemoryStore& mem, std::uint8_t opcode, std::uint64_t addr,
                       const std::array<std::uint64_t, 3>& args) {
  RmwOutcome out;
  switch (opcode) {
    case static_cast<std::uint8_t>(RmwOpcode::kCas): {
      const std::uint64_t mask = args[2] == 0 ? ~std::uint64_t{0} : args[2];
      const std::uint64_t cur = mem.load_u64(addr);
      const bool hit = (cur & mask) == (args[0] & mask);
      if (hit) mem.store_u64(addr, (cur & ~mask) | (args[1] & mask));
      out.response = {static_cast<std::uint8_t>(hit ? 1 : 0)};
      return out;
    }
    case static_cast<std::uint8_t>(RmwOpcode::kFetchAdd): {
      const std::uint64_t cur = mem.load_u64(addr);
      mem.store_u64(addr, cur + args[0]);
      out.response.resize(8);
      std::uint64_t v = cur;
      for (auto& x : out.response) {
        x = static_cast<std::uint8_t>(v);
        v >>= 8;
      }
      return out;
    }
    default:
      out.nack = true;
      return out;
  }
}

}  // namespace edm::host
