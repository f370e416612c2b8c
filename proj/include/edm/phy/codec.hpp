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
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "edm/core/types.hpp"
#include "edm/phy/block.hpp"

namespace edm::phy {

// Addresses below this bound ride inline in the opener; larger ones spill into one MD.
inline constexpr std::uint64_t kInlineAddrLimit = std::uint64_t{1} << 20;
inline constexpr std::uint32_t kInlineRresBytes = 2;
inline constexpr std::size_t kMinFrameBlocks = 9;
inline constexpr std::size_t kMinFrameBytes = 7 + 7 * 8;

// Wire view of one memory message or one chunk of it.
// `port` is the destination on a host uplink and the source on a switch downlink.
struct MessageUnit {
  MessageKind kind = MessageKind::kRreq;
  PortId port;
  MessageId id;
  std::uint32_t size = 0;  // RREQ: bytes requested; otherwise bytes carried
  std::uint64_t addr = 0;
  std::uint32_t offset = 0;
  bool last = true;
  bool nack = false;
  std::optional<RmwOpcode> opcode;
  std::vector<std::uint8_t> data;

  bool operator==(const MessageUnit&) const = default;
};

struct Frame {
  std::vector<std::uint8_t> bytes;
  bool operator==(const Frame&) const = default;
};

// Block count of a memory unit without encoding it.
std::size_t memory_block_count(MessageKind kind, std::uint32_t size, std::uint64_t addr, std::uint32_t offset = 0,
                               bool last = true);

std::vector<PhyBlock> encode_memory_message(const MessageUnit& m);
void encode_memory_message(const MessageUnit& m, std::vector<PhyBlock>& out);
std::vector<PhyBlock> encode_frame(std::span<const std::uint8_t> bytes);

// Decodes exactly one memory unit (MST, or MS..MT).
MessageUnit decode_memory_message(std::span<const PhyBlock> blocks);
// Header-only view of an MS/MST opener.
struct OpenerView {
  MessageKind kind;
  PortId port;
  MessageId id;
  std::uint32_t size;
};
OpenerView peek_opener(const PhyBlock& opener);
PhyBlock rewrite_opener_port(const PhyBlock& opener, PortId port);

struct ControlEvent {
  BlockType type;
  std::uint64_t payload;
  bool operator==(const ControlEvent&) const = default;
};

using Decoded = std::variant<MessageUnit, Frame, ControlEvent>;

// Incremental decoder; one instance per simplex link.
class BlockDecoder {
 public:
  std::optional<Decoded> push(const PhyBlock& b);
  bool in_frame() const { return in_frame_; }
  bool in_memory_message() const { return !mem_.empty(); }
  std::uint64_t idles() const { return idles_; }

 private:
  bool in_frame_ = false;
  std::vector<std::uint8_t> frame_;
  std::vector<PhyBlock> mem_;
  std::uint64_t idles_ = 0;
};

struct DecodedStream {
  std::vector<MessageUnit> messages;
  std::vector<Frame> frames;
  std::vector<ControlEvent> controls;
  std::uint64_t idles = 0;
};

DecodedStream decode_block_stream(std::span<const PhyBlock> stream);

}  // namespace edm::phy
