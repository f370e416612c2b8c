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

#include "edm/sim/link.hpp"

#include <algorithm>
#include <stdexcept>

namespace edm::sim {

Link::Link(Simulator& sim, std::string name, SimTime slot, SimTime fixed_delay, LinkReceiver* rx, int rx_port)
    : sim_(sim), name_(std::move(name)), slot_(slot), fixed_(fixed_delay), rx_(rx), rx_port_(rx_port) {
  if (slot_.ps() <= 0) throw std::invalid_argument("link slot must be positive");
}

void Link::send(WireUnit u) {
  if (u.n_blocks == 0) throw std::invalid_argument("empty wire unit");
  queued_blocks_ += u.n_blocks;
  stats_.max_queued_blocks = std::max(stats_.max_queued_blocks, queued_blocks_);
  if (u.cls == TxClass::kPriority) {
    prio_.push_back(u);
  } else {
    bulk_.push_back(u);
    stats_.max_queued_bulk_units = std::max<std::uint64_t>(stats_.max_queued_bulk_units, bulk_.size());
  }
  try_start();
}

void Link::set_bulk_paused(bool paused) {
  bulk_paused_ = paused;
  if (!paused) try_start();
}

void Link::try_start() {
  if (busy_) return;
  if (!prio_.empty()) {
    WireUnit u = prio_.front();
    prio_.pop_front();
    start(u);
    return;
  }
  if (bulk_.empty() || bulk_paused_) return;
  const SimTime nb = bulk_.front().not_before;
  if (nb > sim_.now()) {
    if (wake_at_ != nb) {
      wake_at_ = nb;
      sim_.schedule_at(nb, [this] {
        wake_at_ = SimTime::max();
        try_start();
      });
    }
    return;
  }
  WireUnit u = bulk_.front();
  bulk_.pop_front();
  start(u);
}

void Link::start(WireUnit u) {
  busy_ = true;
  queued_blocks_ -= u.n_blocks;
  const SimTime t0 = sim_.now();
  const SimTime span = slot_ * static_cast<std::int64_t>(u.n_blocks);
  const SimTime head = t0 + fixed_;
  const SimTime tail = head + slot_ * static_cast<std::int64_t>(u.n_blocks - 1);
  ++stats_.units_sent;
  stats_.blocks_sent += u.n_blocks;
  stats_.busy += span;
  if (!util_.empty() || bucket_.ps() > 0) account_busy(t0, t0 + span);
  sim_.schedule_at(head, [this, u, head, tail] {
    stats_.blocks_delivered += u.n_blocks;
    if (rx_ != nullptr) rx_->on_unit(rx_port_, u, head, tail);
  });
  sim_.schedule_at(t0 + span, [this] {
    busy_ = false;
    try_start();
  });
}

void Link::enable_utilization(SimTime bucket) {
  if (bucket.ps() <= 0) throw std::invalid_argument("bucket must be positive");
  bucket_ = bucket;
}

void Link::account_busy(SimTime from, SimTime to) {
  const std::int64_t b = bucket_.ps();
  while (from < to) {
    const auto idx = static_cast<std::size_t>(from.ps() / b);
    if (util_.size() <= idx) util_.resize(idx + 1, 0);
    const SimTime edge(static_cast<std::int64_t>(idx + 1) * b);
    const SimTime end = std::min(edge, to);
    util_[idx] += (end - from).ps();
    from = end;
  }
}

}  // namespace edm::sim
