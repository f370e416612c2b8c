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
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edm/core/time.hpp"

namespace edm {

inline constexpr int kMaxPorts = 512;
inline constexpr int kMaxMessageIds = 256;
inline constexpr std::uint32_t kMaxWireSize = 65535;

class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FieldOverflow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PortId {
 public:
  constexpr PortId() = default;
  constexpr explicit PortId(std::uint16_t index) : index_(index) {}
  constexpr std::uint16_t value() const { return index_; }
  constexpr auto operator<=>(const PortId&) const = default;

 private:
  std::uint16_t index_ = 0;
};

class MessageId {
 public:
  constexpr MessageId() = default;
  constexpr explicit MessageId(std::uint8_t id) : id_(id) {}
  constexpr std::uint8_t value() const { return id_; }
  constexpr auto operator<=>(const MessageId&) const = default;

 private:
  std::uint8_t id_ = 0;
};

enum class MessageKind : std::uint8_t { kRreq = 0, kWreq = 1, kRmwreq = 2, kRres = 3 };

std::string_view to_string(MessageKind k);
std::optional<MessageKind> parse_message_kind(std::string_view s);

// Opcode space beyond these two is unassigned.
enum class RmwOpcode : std::uint8_t { kCas = 0, kFetchAdd = 1 };

inline constexpr std::uint32_t kRmwArgBytes = 24;

// Response size implied by an atomic opcode.
std::uint32_t rmw_response_bytes(RmwOpcode op);

struct MemoryMessage {
  MessageKind kind = MessageKind::kRreq;
  PortId src;
  PortId dst;
  MessageId id;
  std::uint32_t size_bytes = 0;
  std::uint64_t remote_addr = 0;
  std::optional<RmwOpcode> opcode;
  std::array<std::uint64_t, 3> rmw_args{};
  SimTime created_at;
};

struct Chunk {
  PortId src;
  PortId dst;
  MessageId id;
  std::uint32_t offset_bytes = 0;
  std::uint32_t len_bytes = 0;
};

struct NotificationRecord {
  PortId src;
  PortId dst;
  MessageId id;
  std::uint32_t total_bytes = 0;
  std::uint32_t remaining_bytes = 0;
  std::int64_t priority = 0;
  SimTime enqueued_at;
  bool is_implicit_rreq = false;
  std::uint64_t seq = 0;  // arrival order at the scheduler
};

struct Grant {
  PortId dst_of_message;
  MessageId id;
  std::uint32_t chunk_bytes = 0;
};

enum class PriorityPolicy : std::uint8_t { kFcfs, kSrpt };

std::string_view to_string(PriorityPolicy p);
std::optional<PriorityPolicy> parse_priority_policy(std::string_view s);

// Key of (peer, id) used by per-host state tables.
struct PeerMessageKey {
  PortId peer;
  MessageId id;
  constexpr auto operator<=>(const PeerMessageKey&) const = default;
};

}  // namespace edm

template <>
struct std::hash<edm::PortId> {
  std::size_t operator()(edm::PortId p) const noexcept { return p.value(); }
};

template <>
struct std::hash<edm::PeerMessageKey> {
  std::size_t operator()(const edm::PeerMessageKey& k) const noexcept {
    return (static_cast<std::size_t>(k.peer.value()) << 8) | k.id.value();
  }
};
