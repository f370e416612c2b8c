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

#include "edm/phy/reassembler.hpp"

#include <algorithm>

#include "edm/core/types.hpp"

namespace edm::phy {

RxSlot RxReassembler::push(const PhyBlock& in) {
  RxSlot out{std::nullopt, PhyBlock::idle()};
  if (!release_.empty()) {
    out.to_decoder = release_.front();
    release_.pop_front();
  }
  if (in.is_data()) {
    if (mem_open_) {
      out.memory = in;
    } else if (state_ == State::kInFrame) {
      frame_.push_back(in);
    } else {
      throw ProtocolViolation("data block outside any frame or memory message");
    }
  } else {
    const BlockType t = in.type();
    if (t == BlockType::kE) {
      // idle
    } else if (is_memory_type(t)) {
      out.memory = in;
      if (t == BlockType::kMS) mem_open_ = true;
      if (t == BlockType::kMT) mem_open_ = false;
    } else if (t == BlockType::kS) {
      if (state_ == State::kInFrame) throw ProtocolViolation("S inside a frame");
      state_ = State::kInFrame;
      frame_.push_back(in);
    } else if (terminate_bytes(t) >= 0) {
      if (state_ != State::kInFrame) throw ProtocolViolation("T outside a frame");
      frame_.push_back(in);
      release_.insert(release_.end(), frame_.begin(), frame_.end());
      frame_.clear();
      state_ = State::kIdle;
    } else {
      throw ProtocolViolation("unknown control block type");
    }
  }
  if (frame_.size() > max_frame_) throw ProtocolViolation("frame exceeds the RX buffer bound");
  max_buffered_ = std::max(max_buffered_, buffered());
  return out;
}

}  // namespace edm::phy
