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
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edm/core/latency.hpp"
#include "edm/core/types.hpp"
#include "edm/sim/engine.hpp"
#include "edm/sim/link.hpp"

namespace edm::fabric {

// One application request handed to a fabric.
struct Request {
  SimTime arrival;
  PortId src;  // requester (compute node)
  PortId dst;  // memory node
  MessageKind kind = MessageKind::kRreq;
  std::uint32_t size = 0;  // bytes read or written; ignored for RMW
  std::uint64_t addr = 0;
  std::optional<RmwOpcode> opcode;
  std::array<std::uint64_t, 3> args{};
  std::vector<std::uint8_t> payload;  // WREQ bytes; empty means an address-derived pattern
};

struct CompletionRecord {
  SimTime submit;
  SimTime complete;
  SimTime first_data;  // first data block processed at the receiver
  MessageKind kind = MessageKind::kRreq;
  PortId src;
  PortId dst;
  MessageId id;
  std::uint32_t bytes = 0;
  bool null_response = false;
  bool nack = false;
  std::vector<std::uint8_t> result;  // read or RMW result bytes when kept

  SimTime latency() const { return complete - submit; }
};

class CompletionLog {
 public:
  void add(CompletionRecord r) { records_.push_back(std::move(r)); }
  const std::vector<CompletionRecord>& records() const { return records_; }
  std::vector<CompletionRecord>& records() { return records_; }
  std::size_t size() const { return records_.size(); }
  // submit_ps,complete_ps,kind,src,dst,id,bytes[,model]
  void write_csv(std::ostream& os, std::string_view model = {}) const;
  static std::vector<CompletionRecord> read_csv(std::istream& is);

 private:
  std::vector<CompletionRecord> records_;
};

struct FabricCounters {
  std::uint64_t submitted = 0;
  std::uint64_t completed = 0;
  std::uint64_t drops = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t pauses = 0;
  std::uint64_t max_egress_data_blocks = 0;
};

// Common surface of the EDM fabric and every baseline. Each instance owns its
// simulator; one host per port and one switch.
class Fabric {
 public:
  virtual ~Fabric() = default;
  virtual std::string_view name() const = 0;
  // Hands the request to the source host at sim().now().
  virtual void submit(const Request& r) = 0;
  virtual const ClusterConfig& config() const = 0;
  virtual sim::Simulator& sim() = 0;
  virtual CompletionLog& completions() = 0;
  virtual FabricCounters counters() const = 0;
  // Host-to-switch and switch-to-host links, indexed by port.
  virtual const sim::Link& uplink(PortId p) const = 0;
  virtual const sim::Link& downlink(PortId p) const = 0;
  virtual void enable_utilization(SimTime bucket) = 0;
  // Completion time of one message of `kind` moving `size` data bytes (the
  // response size for RMW) on an idle fabric. Lower bound for every loaded completion of the same message.
  virtual SimTime ideal_mct(MessageKind kind, std::uint32_t size) const = 0;

  std::uint64_t outstanding() const {
    const auto c = counters();
    return c.submitted - c.completed;
  }
};

// Data bytes a request moves: the payload for reads and writes, the response for RMW.
std::uint32_t data_bytes(MessageKind kind, std::uint32_t size, std::optional<RmwOpcode> opcode = std::nullopt);

// Blocks of all chunks of one message's data at `chunk_bytes` per chunk.
std::uint64_t data_blocks(MessageKind data_kind, std::uint32_t bytes, std::uint32_t chunk_bytes);

// Feeds requests at their arrival times and runs until every request completes
// or `horizon` passes. Returns true when all completed.
bool run_requests(Fabric& f, const std::vector<Request>& reqs, SimTime horizon = SimTime::max());

}  // namespace edm::fabric
