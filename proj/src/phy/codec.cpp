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

#include "edm/phy/codec.hpp"

#include <string>

namespace edm::phy {

namespace {

// Opener (MS/MST) payload: kind[1:0] port[10:2] id[18:11] size[34:19] flag[35] aux[55:36].
// flag: MS -> address spills into the first MD; MST RRES -> NACK.
// aux: inline 20-bit address, or up to two inline RRES data bytes.
constexpr int kKindShift = 0;
constexpr int kPortShift = 2;
constexpr int kIdShift = 11;
constexpr int kSizeShift = 19;
constexpr int kFlagShift = 35;
constexpr int kAuxShift = 36;

// Terminator (MT) payload: opcode+1[7:0] last[8] nack[9] offset[25:10].
constexpr int kMtLastShift = 8;
constexpr int kMtNackShift = 9;
constexpr int kMtOffsetShift = 10;

std::uint64_t bits(std::uint64_t v, int shift, int width) { return (v >> shift) & ((std::uint64_t{1} << width) - 1); }

bool carries_address(MessageKind k) { return k != MessageKind::kRres; }

std::uint32_t data_bytes(MessageKind k, std::uint32_t size) { return k == MessageKind::kRreq ? 0 : size; }

bool fits_single_block(MessageKind k, std::uint32_t size, std::uint64_t addr, std::uint32_t offset, bool last) {
  if (k == MessageKind::kRreq) return addr < kInlineAddrLimit;
  if (k == MessageKind::kRres) return offset == 0 && last && size <= kInlineRresBytes;
  return false;
}

void check_fields(const MessageUnit& m) {
  if (m.port.value() >= kMaxPorts) throw FieldOverflow("port exceeds 9 bits");
  if (m.size > kMaxWireSize) throw FieldOverflow("size exceeds 16 bits");
  if (m.offset > kMaxWireSize) throw FieldOverflow("offset exceeds 16 bits");
  if (m.kind != MessageKind::kRreq && m.data.size() != m.size)
    throw std::invalid_argument("data length does not match size");
  if (m.kind == MessageKind::kRmwreq && (!m.opcode || m.size != kRmwArgBytes))
    throw std::invalid_argument("RMWREQ needs an opcode and 24 argument bytes");
}

std::uint64_t opener_header(const MessageUnit& m) {
  return (static_cast<std::uint64_t>(m.kind) << kKindShift) | (std::uint64_t{m.port.value()} << kPortShift) |
         (std::uint64_t{m.id.value()} << kIdShift) | (std::uint64_t{m.size} << kSizeShift);
}

std::uint64_t load_le(std::span<const std::uint8_t> bytes, std::size_t from, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n && from + i < bytes.size(); ++i) v |= std::uint64_t{bytes[from + i]} << (8 * i);
  return v;
}

void store_le(std::vector<std::uint8_t>& out, std::uint64_t v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::size_t memory_block_count(MessageKind kind, std::uint32_t size, std::uint64_t addr, std::uint32_t offset,
                               bool last) {
  if (fits_single_block(kind, size, addr, offset, last)) return 1;
  const std::size_t ext = carries_address(kind) && addr >= kInlineAddrLimit ? 1 : 0;
  return 2 + ext + (data_bytes(kind, size) + 7) / 8;
}

void encode_memory_message(const MessageUnit& m, std::vector<PhyBlock>& out) {
  check_fields(m);
  const std::uint64_t header = opener_header(m);
  if (fits_single_block(m.kind, m.size, m.addr, m.offset, m.last)) {
    std::uint64_t p = header;
    if (m.kind == MessageKind::kRreq) {
      p |= m.addr << kAuxShift;
    } else {
      p |= std::uint64_t{m.nack} << kFlagShift;
      p |= load_le(m.data, 0, m.size) << kAuxShift;
    }
    out.push_back(PhyBlock::control(BlockType::kMST, p));
    return;
  }
  const bool ext = carries_address(m.kind) && m.addr >= kInlineAddrLimit;
  std::uint64_t p = header | (std::uint64_t{ext} << kFlagShift);
  if (carries_address(m.kind) && !ext) p |= m.addr << kAuxShift;
  out.push_back(PhyBlock::control(BlockType::kMS, p));
  if (ext) out.push_back(PhyBlock::data(m.addr));
  const std::uint32_t n = data_bytes(m.kind, m.size);
  for (std::uint32_t off = 0; off < n; off += 8) out.push_back(PhyBlock::data(load_le(m.data, off, 8)));
  const std::uint64_t opcode = m.opcode ? static_cast<std::uint64_t>(*m.opcode) + 1 : 0;
  const std::uint64_t t = opcode | (std::uint64_t{m.last} << kMtLastShift) | (std::uint64_t{m.nack} << kMtNackShift) |
                          (std::uint64_t{m.offset} << kMtOffsetShift);
  out.push_back(PhyBlock::control(BlockType::kMT, t));
}

std::vector<PhyBlock> encode_memory_message(const MessageUnit& m) {
  std::vector<PhyBlock> out;
  out.reserve(memory_block_count(m.kind, m.size, m.addr, m.offset, m.last));
  encode_memory_message(m, out);
  return out;
}

std::vector<PhyBlock> encode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMinFrameBytes)
    throw std::invalid_argument("frame shorter than " + std::to_string(kMinFrameBytes) + " bytes");
  std::vector<PhyBlock> out;
  out.push_back(PhyBlock::control(BlockType::kS, load_le(bytes, 0, 7)));
  std::size_t pos = 7;
  while (bytes.size() - pos >= 8) {
    out.push_back(PhyBlock::data(load_le(bytes, pos, 8)));
    pos += 8;
  }
  const int tail = static_cast<int>(bytes.size() - pos);
  out.push_back(PhyBlock::control(terminate_type(tail), load_le(bytes, pos, static_cast<std::size_t>(tail))));
  return out;
}

OpenerView peek_opener(const PhyBlock& opener) {
  if (!opener.is(BlockType::kMS) && !opener.is(BlockType::kMST))
    throw ProtocolViolation("expected a memory message opener");
  const std::uint64_t p = opener.control_payload();
  return OpenerView{static_cast<MessageKind>(bits(p, kKindShift, 2)),
                    PortId(static_cast<std::uint16_t>(bits(p, kPortShift, 9))),
                    MessageId(static_cast<std::uint8_t>(bits(p, kIdShift, 8))),
                    static_cast<std::uint32_t>(bits(p, kSizeShift, 16))};
}

PhyBlock rewrite_opener_port(const PhyBlock& opener, PortId port) {
  const std::uint64_t mask = ((std::uint64_t{1} << 9) - 1) << kPortShift;
  const std::uint64_t p = (opener.control_payload() & ~mask) | (std::uint64_t{port.value()} << kPortShift);
  return PhyBlock::control(opener.type(), p);
}

MessageUnit decode_memory_message(std::span<const PhyBlock> blocks) {
  if (blocks.empty()) throw ProtocolViolation("empty memory message");
  const OpenerView h = peek_opener(blocks.front());
  const std::uint64_t p = blocks.front().control_payload();
  MessageUnit m;
  m.kind = h.kind;
  m.port = h.port;
  m.id = h.id;
  m.size = h.size;
  if (blocks.front().is(BlockType::kMST)) {
    if (blocks.size() != 1) throw ProtocolViolation("MST must stand alone");
    if (m.kind == MessageKind::kRreq) {
      m.addr = bits(p, kAuxShift, 20);
    } else if (m.kind == MessageKind::kRres) {
      if (m.size > kInlineRresBytes) throw ProtocolViolation("MST RRES too large");
      m.nack = bits(p, kFlagShift, 1) != 0;
      store_le(m.data, bits(p, kAuxShift, 16), m.size);
    } else {
      throw ProtocolViolation("MST of a kind that cannot be inline");
    }
    return m;
  }
  if (!blocks.back().is(BlockType::kMT)) throw ProtocolViolation("MS without MT");
  const bool ext = bits(p, kFlagShift, 1) != 0;
  const std::size_t body = blocks.size() - 2;
  const std::uint32_t n = data_bytes(m.kind, m.size);
  if (body != (ext ? 1u : 0u) + (n + 7) / 8) throw ProtocolViolation("memory message length mismatch");
  std::size_t i = 1;
  if (ext) {
    if (!blocks[i].is_data()) throw ProtocolViolation("expected address MD");
    m.addr = blocks[i++].data_payload();
  } else if (carries_address(m.kind)) {
    m.addr = bits(p, kAuxShift, 20);
  }
  m.data.reserve(n);
  for (std::uint32_t off = 0; off < n; off += 8, ++i) {
    if (!blocks[i].is_data()) throw ProtocolViolation("control block inside memory message");
    store_le(m.data, blocks[i].data_payload(), std::min<std::uint32_t>(8, n - off));
  }
  const std::uint64_t t = blocks.back().control_payload();
  const std::uint64_t op = bits(t, 0, 8);
  if (op != 0) m.opcode = static_cast<RmwOpcode>(op - 1);
  m.last = bits(t, kMtLastShift, 1) != 0;
  m.nack = bits(t, kMtNackShift, 1) != 0;
  m.offset = static_cast<std::uint32_t>(bits(t, kMtOffsetShift, 16));
  return m;
}

std::optional<Decoded> BlockDecoder::push(const PhyBlock& b) {
  if (b.is_data()) {
    if (!mem_.empty()) {
      mem_.push_back(b);
      return std::nullopt;
    }
    if (!in_frame_) throw ProtocolViolation("data block outside any frame or memory message");
    store_le(frame_, b.data_payload(), 8);
    return std::nullopt;
  }
  const BlockType t = b.type();
  if (t == BlockType::kE) {
    ++idles_;
    return std::nullopt;
  }
  if (!mem_.empty() && t != BlockType::kMT) throw ProtocolViolation("memory message interrupted");
  switch (t) {
    case BlockType::kS:
      if (in_frame_) throw ProtocolViolation("S inside a frame");
      in_frame_ = true;
      frame_.clear();
      store_le(frame_, b.control_payload(), 7);
      return std::nullopt;
    case BlockType::kMS:
      mem_.push_back(b);
      return std::nullopt;
    case BlockType::kMT: {
      if (mem_.empty()) throw ProtocolViolation("MT without matching MS");
      mem_.push_back(b);
      MessageUnit m = decode_memory_message(mem_);
      mem_.clear();
      return Decoded{std::move(m)};
    }
    case BlockType::kMST:
      return Decoded{decode_memory_message(std::span<const PhyBlock>(&b, 1))};
    case BlockType::kN:
    case BlockType::kG:
    case BlockType::kPause:
    case BlockType::kResume:
      return Decoded{ControlEvent{t, b.control_payload()}};
    default:
      break;
  }
  const int tail = terminate_bytes(t);
  if (tail < 0) throw ProtocolViolation("unknown control block type");
  if (!in_frame_) throw ProtocolViolation("T outside a frame");
  store_le(frame_, b.control_payload(), static_cast<std::size_t>(tail));
  in_frame_ = false;
  Frame f{std::move(frame_)};
  frame_.clear();
  return Decoded{std::move(f)};
}

DecodedStream decode_block_stream(std::span<const PhyBlock> stream) {
  DecodedStream out;
  BlockDecoder dec;
  for (const auto& b : stream) {
    auto item = dec.push(b);
    if (!item) continue;
    if (auto* m = std::get_if<MessageUnit>(&*item)) {
      out.messages.push_back(std::move(*m));
    } else if (auto* f = std::get_if<Frame>(&*item)) {
      out.frames.push_back(std::move(*f));
    } else {
      out.controls.push_back(std::get<ControlEvent>(*item));
    }
  }
  if (dec.in_frame() || dec.in_memory_message()) throw ProtocolViolation("stream ends inside a unit");
  out.idles = dec.idles();
  return out;
}

}  // namespace edm::phy
