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

#include <cstddef>
#include <deque>
#include <optional>
#include <span>

#include "edm/phy/block.hpp"

namespace edm::phy {

enum class MuxPolicy { kFair, kMemStrict };

// TX side of one simplex link. Memory units are never split by frame blocks
// (MD and D share a wire format), so frames yield at memory-unit boundaries only.
class PreemptionMux {
 public:
  static constexpr std::size_t kNonMemCapacity = 4;

  explicit PreemptionMux(MuxPolicy policy = MuxPolicy::kFair) : policy_(policy) {}

  // Whole memory unit: one control block, an MST, or MS..MT.
  void push_memory(std::span<const PhyBlock> unit);
  bool nonmem_has_space() const { return nonmem_.size() < kNonMemCapacity; }
  // Throws when the bounded buffer is full; callers check nonmem_has_space first.
  void push_nonmem(const PhyBlock& b);

  // Block for the next slot; E when both streams are empty.
  PhyBlock next_block();

  // Per-slot form: optional offers are queued before selection.
  PhyBlock next_block(const std::optional<PhyBlock>& mem_ready, const std::optional<PhyBlock>& nonmem_ready);

  std::size_t nonmem_occupancy() const { return nonmem_.size(); }
  std::size_t max_nonmem_occupancy() const { return max_nonmem_; }
  std::size_t memory_backlog() const { return mem_.size(); }
  bool memory_unit_open() const { return mem_open_; }
  MuxPolicy policy() const { return policy_; }

 private:
  PhyBlock take_memory();
  PhyBlock take_nonmem();

  MuxPolicy policy_;
  std::deque<PhyBlock> mem_;
  std::deque<PhyBlock> nonmem_;
  bool mem_open_ = false;
  bool last_was_memory_ = false;
  std::size_t max_nonmem_ = 0;
};

}  // namespace edm::phy
