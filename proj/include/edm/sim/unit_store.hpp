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
#include <stdexcept>
#include <vector>

#include "edm/phy/block.hpp"

namespace edm::sim {

// Block payloads of in-flight wire units, addressed by WireUnit::token.
// A token stays valid until released; forwarding hops pass it along unchanged.
class UnitStore {
 public:
  std::uint64_t put(std::vector<phy::PhyBlock> blocks) {
    std::uint32_t slot;
    if (!free_.empty()) {
      slot = free_.back();
      free_.pop_back();
      slots_[slot] = std::move(blocks);
    } else {
      slot = static_cast<std::uint32_t>(slots_.size());
      slots_.push_back(std::move(blocks));
    }
    ++live_;
    return slot;
  }
  const std::vector<phy::PhyBlock>& get(std::uint64_t token) const { return slots_.at(token); }
  std::vector<phy::PhyBlock> take(std::uint64_t token) {
    auto out = std::move(slots_.at(token));
    release(token);
    return out;
  }
  void release(std::uint64_t token) {
    if (token >= slots_.size()) throw std::out_of_range("unit token");
    slots_[token].clear();
    free_.push_back(static_cast<std::uint32_t>(token));
    --live_;
  }
  std::size_t live() const { return live_; }

 private:
  std::vector<std::vector<phy::PhyBlock>> slots_;
  std::vector<std::uint32_t> free_;
  std::size_t live_ = 0;
};

}  // namespace edm::sim
