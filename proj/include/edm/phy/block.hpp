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
#include <string_view>

namespace edm::phy {

enum class Sync : std::uint8_t { kControl = 0b01, kData = 0b10 };

// Standard 10GBASE-R codes for S/T/E; memory types use values the standard leaves free.
enum class BlockType : std::uint8_t {
  kE = 0x1E,
  kS = 0x78,
  kT0 = 0x87,
  kT1 = 0x99,
  kT2 = 0xAA,
  kT3 = 0xB4,
  kT4 = 0xCC,
  kT5 = 0xD2,
  kT6 = 0xE1,
  kT7 = 0xFF,
  kMS = 0x11,
  kMT = 0x22,
  kMST = 0x3C,
  kN = 0x44,
  kG = 0x5A,
  kPause = 0x69,
  kResume = 0x72,
};

inline constexpr std::uint64_t kControlPayloadMask = (std::uint64_t{1} << 56) - 1;

std::string_view to_string(BlockType t);
std::optional<BlockType> parse_block_type(std::string_view name);
std::optional<BlockType> block_type_from_code(std::uint8_t code);

// Terminate type carrying `n` trailing data bytes, n in [0, 7].
BlockType terminate_type(int n);
// Trailing byte count of a terminate type, or -1.
int terminate_bytes(BlockType t);

bool is_memory_type(BlockType t);

// One 66-bit PCS block: 2-bit sync header and 64-bit body.
// Control bodies carry the type code in the low octet and 56 payload bits above it.
class PhyBlock {
 public:
  constexpr PhyBlock() = default;

  static constexpr PhyBlock data(std::uint64_t payload) { return PhyBlock(Sync::kData, payload); }
  static constexpr PhyBlock control(BlockType t, std::uint64_t payload56 = 0) {
    return PhyBlock(Sync::kControl, ((payload56 & kControlPayloadMask) << 8) | static_cast<std::uint8_t>(t));
  }
  static constexpr PhyBlock idle() { return control(BlockType::kE); }

  constexpr Sync sync() const { return sync_; }
  constexpr bool is_control() const { return sync_ == Sync::kControl; }
  constexpr bool is_data() const { return sync_ == Sync::kData; }
  constexpr std::uint64_t body() const { return body_; }
  constexpr BlockType type() const { return static_cast<BlockType>(body_ & 0xFF); }
  constexpr std::uint64_t control_payload() const { return body_ >> 8; }
  constexpr std::uint64_t data_payload() const { return body_; }
  constexpr bool is(BlockType t) const { return is_control() && type() == t; }
  constexpr bool is_idle() const { return is(BlockType::kE); }

  constexpr bool operator==(const PhyBlock&) const = default;

 private:
  constexpr PhyBlock(Sync s, std::uint64_t body) : sync_(s), body_(body) {}

  Sync sync_ = Sync::kControl;
  std::uint64_t body_ = static_cast<std::uint8_t>(BlockType::kE);
};

}  // namespace edm::phy
