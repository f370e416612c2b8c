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

#include "edm/core/types.hpp"

namespace edm {

inline constexpr int kPortFieldBits = 9;
inline constexpr int kIdFieldBits = 8;
inline constexpr int kSizeFieldBits = 16;
inline constexpr int kControlBundleBits = kPortFieldBits + kIdFieldBits + kSizeFieldBits;
inline constexpr int kBlockBits = 66;
// Set in a /G/ payload above the bundle when the grant is for read-response data.
inline constexpr int kGrantResponseBit = kControlBundleBits;

// (port:9 | id:8 | size:16) packed little end first: port in bits [8:0].
struct ControlBundle {
  PortId port;
  MessageId id;
  std::uint32_t size = 0;
  constexpr auto operator<=>(const ControlBundle&) const = default;
};

std::uint64_t pack_bundle(const ControlBundle& b);
ControlBundle unpack_bundle(std::uint64_t bits);

std::uint64_t notification_wire_encode(const NotificationRecord& rec);
ControlBundle notification_wire_decode(std::uint64_t bits);

std::uint64_t grant_wire_encode(const Grant& g);
Grant grant_wire_decode(std::uint64_t bits);

// One notification block and one grant block per chunk, relative to the chunk's data bits.
// A notification is sent once per message, so it amortizes over message_bytes / chunk_bytes.
double control_overhead_fraction(std::uint32_t chunk_bytes, std::uint32_t message_bytes = 0);

}  // namespace edm
