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

#include "edm/core/wire.hpp"

#include <string>

namespace edm {

namespace {
constexpr std::uint64_t kPortMask = (1u << kPortFieldBits) - 1;
constexpr std::uint64_t kIdMask = (1u << kIdFieldBits) - 1;
constexpr std::uint64_t kSizeMask = (1u << kSizeFieldBits) - 1;
}  // namespace

std::uint64_t pack_bundle(const ControlBundle& b) {
  if (b.port.value() > kPortMask) throw FieldOverflow("port " + std::to_string(b.port.value()) + " exceeds 9 bits");
  if (b.size > kSizeMask) throw FieldOverflow("size " + std::to_string(b.size) + " exceeds 16 bits");
  return static_cast<std::uint64_t>(b.port.value()) | (static_cast<std::uint64_t>(b.id.value()) << kPortFieldBits) |
         (static_cast<std::uint64_t>(b.size) << (kPortFieldBits + kIdFieldBits));
}

ControlBundle unpack_bundle(std::uint64_t bits) {
  ControlBundle b;
  b.port = PortId(static_cast<std::uint16_t>(bits & kPortMask));
  b.id = MessageId(static_cast<std::uint8_t>((bits >> kPortFieldBits) & kIdMask));
  b.size = static_cast<std::uint32_t>((bits >> (kPortFieldBits + kIdFieldBits)) & kSizeMask);
  return b;
}

std::uint64_t notification_wire_encode(const NotificationRecord& rec) {
  return pack_bundle({rec.dst, rec.id, rec.total_bytes});
}

ControlBundle notification_wire_decode(std::uint64_t bits) { return unpack_bundle(bits); }

std::uint64_t grant_wire_encode(const Grant& g) { return pack_bundle({g.dst_of_message, g.id, g.chunk_bytes}); }

Grant grant_wire_decode(std::uint64_t bits) {
  auto b = unpack_bundle(bits);
  return Grant{b.port, b.id, b.size};
}

double control_overhead_fraction(std::uint32_t chunk_bytes, std::uint32_t message_bytes) {
  if (chunk_bytes == 0) throw std::invalid_argument("chunk_bytes must be positive");
  if (message_bytes == 0) message_bytes = chunk_bytes;
  const double chunks_per_message =
      static_cast<double>((message_bytes + chunk_bytes - 1) / chunk_bytes);
  const double control_bits = kBlockBits + kBlockBits / chunks_per_message;
  return control_bits / (static_cast<double>(chunk_bytes) * 8.0);
}

}  // namespace edm
