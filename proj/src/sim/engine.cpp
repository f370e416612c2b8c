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

#include "edm/sim/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace edm::sim {

void Simulator::schedule_at(SimTime at, Callback fn) {
  if (at < now_)
    throw std::logic_error("event scheduled in the past: " + std::to_string(at.ps()) + " < " +
                           std::to_string(now_.ps()));
  std::uint32_t slot;
  if (free_slots_.empty()) {
    slot = static_cast<std::uint32_t>(callbacks_.size());
    callbacks_.push_back(std::move(fn));
  } else {
    slot = free_slots_.back();
    free_slots_.pop_back();
    callbacks_[slot] = std::move(fn);
  }
  heap_.push_back(Entry{at, next_seq_++, slot});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

SimTime Simulator::next_time() const { return heap_.empty() ? SimTime::max() : heap_.front().at; }

std::uint64_t Simulator::run(SimTime until) {
  stopped_ = false;
  std::uint64_t n = 0;
  while (!heap_.empty() && !stopped_) {
    const Entry e = heap_.front();
    if (e.at > until) break;
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    heap_.pop_back();
    now_ = e.at;
    Callback fn = std::move(callbacks_[e.slot]);
    callbacks_[e.slot] = nullptr;
    free_slots_.push_back(e.slot);
    fn();
    ++n;
    ++dispatched_;
  }
  if (!stopped_ && until != SimTime::max() && now_ < until && (heap_.empty() || heap_.front().at > until))
    now_ = until;
  return n;
}

}  // namespace edm::sim
