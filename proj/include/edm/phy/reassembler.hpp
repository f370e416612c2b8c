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
#include <vector>

#include "edm/phy/block.hpp"

namespace edm::phy {

struct RxSlot {
  std::optional<PhyBlock> memory;  // to the memory path, same slot
  PhyBlock to_decoder;             // to the standard decoder: frame burst block or E
};

// RX side of one simplex link. Frames are held until T and then released in
// consecutive slots starting the slot after T.
class RxReassembler {
 public:
  // 1518 B frame plus preamble, in blocks.
  static constexpr std::size_t kDefaultMaxFrameBlocks = 192;

  explicit RxReassembler(std::size_t max_frame_blocks = kDefaultMaxFrameBlocks) : max_frame_(max_frame_blocks) {}

  RxSlot push(const PhyBlock& in);
  enum class State { kIdle, kInFrame };
  State state() const { return state_; }
  std::size_t buffered() const { return frame_.size() + release_.size(); }
  std::size_t max_buffered() const { return max_buffered_; }

 private:
  std::size_t max_frame_;
  State state_ = State::kIdle;
  bool mem_open_ = false;
  std::vector<PhyBlock> frame_;
  std::deque<PhyBlock> release_;
  std::size_t max_buffered_ = 0;
};

}  // namespace edm::phy
