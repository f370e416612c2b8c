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
#include <deque>
#include <string>
#include <vector>

#include "edm/core/time.hpp"
#include "edm/sim/engine.hpp"

namespace edm::sim {

enum class TxClass : std::uint8_t { kPriority, kBulk };

// A run of consecutive blocks sent without interruption. `token` is opaque to the link.
struct WireUnit {
  std::uint32_t n_blocks = 1;
  TxClass cls = TxClass::kBulk;
  std::uint64_t token = 0;
  SimTime not_before;  // earliest start; used for cut-through underrun protection
};

class LinkReceiver {
 public:
  virtual ~LinkReceiver() = default;
  // Called at `head`; `tail` is the first-bit delivery time of the last block.
  virtual void on_unit(int rx_port, const WireUnit& u, SimTime head, SimTime tail) = 0;
};

struct LinkStats {
  std::uint64_t units_sent = 0;
  std::uint64_t blocks_sent = 0;
  std::uint64_t blocks_delivered = 0;
  SimTime busy;
  std::uint64_t max_queued_blocks = 0;
  std::uint64_t max_queued_bulk_units = 0;
};

// Simplex link: one block per slot, priority units ahead of queued bulk units,
// units are never split. First bit of block i reaches the receiver at
// start + i*slot + fixed_delay.
class Link {
 public:
  Link(Simulator& sim, std::string name, SimTime slot, SimTime fixed_delay, LinkReceiver* rx, int rx_port);
  Link(const Link&) = delete;
  Link& operator=(const Link&) = delete;

  void send(WireUnit u);
  // Holds bulk units; priority units still flow.
  void set_bulk_paused(bool paused);
  bool bulk_paused() const { return bulk_paused_; }

  bool busy() const { return busy_; }
  SimTime slot() const { return slot_; }
  SimTime fixed_delay() const { return fixed_; }
  std::uint64_t queued_blocks() const { return queued_blocks_; }
  std::size_t queued_bulk_units() const { return bulk_.size(); }
  const LinkStats& stats() const { return stats_; }
  const std::string& name() const { return name_; }

  // Busy time accumulated into fixed-width buckets from t=0.
  void enable_utilization(SimTime bucket);
  const std::vector<std::int64_t>& utilization_buckets() const { return util_; }
  SimTime utilization_bucket() const { return bucket_; }

 private:
  void try_start();
  void start(WireUnit u);
  void account_busy(SimTime from, SimTime to);

  Simulator& sim_;
  std::string name_;
  SimTime slot_;
  SimTime fixed_;
  LinkReceiver* rx_;
  int rx_port_;
  std::deque<WireUnit> prio_;
  std::deque<WireUnit> bulk_;
  std::uint64_t queued_blocks_ = 0;
  bool busy_ = false;
  bool bulk_paused_ = false;
  SimTime wake_at_ = SimTime::max();
  LinkStats stats_;
  SimTime bucket_;
  std::vector<std::int64_t> util_;
};

}  // namespace edm::sim
