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

namespace edm::phy {

inline constexpr std::uint32_t kMinMacFrameBytes = 64;
inline constexpr std::uint32_t kPreambleBytes = 8;
inline constexpr std::uint32_t kIfgBytes = 12;

enum class FramingAccounting {
  kFrameOnly,  // padding to the 64 B minimum frame
  kIfgOnly,    // inter-frame gap relative to frame plus gap
  kFull,       // padding, preamble and gap
};

// Wasted share of wire bytes when `payload_bytes` rides one MAC frame.
double mac_framing_overhead(std::uint32_t payload_bytes, FramingAccounting acc = FramingAccounting::kFull);

}  // namespace edm::phy
