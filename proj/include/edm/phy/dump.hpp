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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edm/phy/block.hpp"

namespace edm::phy {

// One line per slot: slot,sync,type,payload_hex. Data blocks print "-" as type.
void dump_block_stream(std::ostream& os, std::span<const PhyBlock> stream, std::size_t first_slot = 0);
std::string dump_block_stream(std::span<const PhyBlock> stream);
std::vector<PhyBlock> parse_block_dump(std::istream& is);

}  // namespace edm::phy
