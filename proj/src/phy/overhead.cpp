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

#include "edm/phy/overhead.hpp"

#include <algorithm>
#include <stdexcept>

namespace edm::phy {

double mac_framing_overhead(std::uint32_t payload_bytes, FramingAccounting acc) {
  if (payload_bytes == 0) throw std::invalid_argument("payload_bytes must be positive");
  const double payload = payload_bytes;
  const double frame = std::max(payload_bytes, kMinMacFrameBytes);
  switch (acc) {
    case FramingAccounting::kFrameOnly:
      return (frame - payload) / frame;
    case FramingAccounting::kIfgOnly:
      return kIfgBytes / (frame + kIfgBytes);
    case FramingAccounting::kFull: {
      const double wire = frame + kPreambleBytes + kIfgBytes;
      return (wire - payload) / wire;
    }
  }
  return 0.0;
}

}  // namespace edm::phy
