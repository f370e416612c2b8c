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

#include "edm/core/types.hpp"

namespace edm {

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::kRreq:
      return "RREQ";
    case MessageKind::kWreq:
      return "WREQ";
    case MessageKind::kRmwreq:
      return "RMWREQ";
    case MessageKind::kRres:
      return "RRES";
  }
  return "?";
}

std::optional<MessageKind> parse_message_kind(std::string_view s) {
  if (s == "RREQ") return MessageKind::kRreq;
  if (s == "WREQ") return MessageKind::kWreq;
  if (s == "RMWREQ") return MessageKind::kRmwreq;
  if (s == "RRES") return MessageKind::kRres;
  return std::nullopt;
}

std::uint32_t rmw_response_bytes(RmwOpcode op) {
  switch (op) {
    case RmwOpcode::kCas:
      return 1;
    case RmwOpcode::kFetchAdd:
      return 8;
  }
  return 0;
}

std::string_view to_string(PriorityPolicy p) { return p == PriorityPolicy::kFcfs ? "fcfs" : "srpt"; }

std::optional<PriorityPolicy> parse_priority_policy(std::string_view s) {
  if (s == "fcfs" || s == "FCFS") return PriorityPolicy::kFcfs;
  if (s == "srpt" || s == "SRPT") return PriorityPolicy::kSrpt;
  return std::nullopt;
}

}  // namespace edm
