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

#include "edm/phy/mux.hpp"

#include <algorithm>
#include <stdexcept>

namespace edm::phy {

void PreemptionMux::push_memory(std::span<const PhyBlock> unit) { mem_.insert(mem_.end(), unit.begin(), unit.end()); }

void PreemptionMux::push_nonmem(const PhyBlock& b) {
  if (!nonmem_has_space()) throw std::logic_error("non-memory TX buffer overflow");
  nonmem_.push_back(b);
  max_nonmem_ = std::max(max_nonmem_, nonmem_.size());
}

PhyBlock PreemptionMux::take_memory() {
  PhyBlock b = mem_.front();
  mem_.pop_front();
  if (b.is(BlockType::kMS)) mem_open_ = true;
  if (b.is(BlockType::kMT)) mem_open_ = false;
  last_was_memory_ = true;
  return b;
}

PhyBlock PreemptionMux::take_nonmem() {
  PhyBlock b = nonmem_.front();
  nonmem_.pop_front();
  last_was_memory_ = false;
  return b;
}

PhyBlock PreemptionMux::next_block() {
  if (mem_open_) return mem_.empty() ? PhyBlock::idle() : take_memory();
  const bool m = !mem_.empty();
  const bool n = !nonmem_.empty();
  if (!m && !n) return PhyBlock::idle();
  if (!n) return take_memory();
  if (!m) return take_nonmem();
  if (policy_ == MuxPolicy::kMemStrict) return take_memory();
  return last_was_memory_ ? take_nonmem() : take_memory();
}

PhyBlock PreemptionMux::next_block(const std::optional<PhyBlock>& mem_ready,
                                   const std::optional<PhyBlock>& nonmem_ready) {
  if (mem_ready) mem_.push_back(*mem_ready);
  if (nonmem_ready) push_nonmem(*nonmem_ready);
  return next_block();
}

}  // namespace edm::phy
