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

#include "edm/phy/block.hpp"

#include <array>
#include <utility>

namespace edm::phy {

namespace {
constexpr std::array<std::pair<BlockType, std::string_view>, 17> kNames{{
    {BlockType::kE, "E"},       {BlockType::kS, "S"},           {BlockType::kT0, "T0"},  {BlockType::kT1, "T1"},
    {BlockType::kT2, "T2"},     {BlockType::kT3, "T3"},         {BlockType::kT4, "T4"},  {BlockType::kT5, "T5"},
    {BlockType::kT6, "T6"},     {BlockType::kT7, "T7"},         {BlockType::kMS, "MS"},  {BlockType::kMT, "MT"},
    {BlockType::kMST, "MST"},   {BlockType::kN, "N"},           {BlockType::kG, "G"},    {BlockType::kPause, "PAUSE"},
    {BlockType::kResume, "RESUME"},
}};

constexpr std::array<BlockType, 8> kTerminates{BlockType::kT0, BlockType::kT1, BlockType::kT2, BlockType::kT3,
                                               BlockType::kT4, BlockType::kT5, BlockType::kT6, BlockType::kT7};
}  // namespace

std::string_view to_string(BlockType t) {
  for (const auto& [type, name] : kNames)
    if (type == t) return name;
  return "?";
}

std::optional<BlockType> parse_block_type(std::string_view name) {
  for (const auto& [type, n] : kNames)
    if (n == name) return type;
  return std::nullopt;
}

std::optional<BlockType> block_type_from_code(std::uint8_t code) {
  for (const auto& [type, name] : kNames)
    if (static_cast<std::uint8_t>(type) == code) return type;
  return std::nullopt;
}

BlockType terminate_type(int n) { return kTerminates.at(static_cast<std::size_t>(n)); }

int terminate_bytes(BlockType t) {
  for (std::size_t i = 0; i < kTerminates.size(); ++i)
    if (kTerminates[i] == t) return static_cast<int>(i);
  return -1;
}

bool is_memory_type(BlockType t) {
  switch (t) {
    case BlockType::kMS:
    case BlockType::kMT:
    case BlockType::kMST:
    case BlockType::kN:
    case BlockType::kG:
    case BlockType::kPause:
    case BlockType::kResume:
      return true;
    default:
      return false;
  }
}

}  // namespace edm::phy
