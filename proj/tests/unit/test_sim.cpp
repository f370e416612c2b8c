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

#include <random>
#include <vector>

#include "doctest.h"
#include "edm/core/latency.hpp"
#include "edm/phy/codec.hpp"
#include "edm/sim/engine.hpp"
#include "edm/sim/link.hpp"
#include "edm/sim/rng.hpp"

using namespace edm;
using namespace edm::sim;

namespace {

struct Capture : LinkReceiver {
  struct Arrival {
    std::uint64_t token;
    SimTime head;
    SimTime tail;
  };
  std::vector<Arrival> got;
  void on_unit(int, const WireUnit& u, SimTime head, SimTime tail) override { got.push_back({u.token, head, tail}); }
};

}  // namespace

TEST_CASE("equal-time events dispatch in insertion order") {
  Simulator sim;
  std::vector<int> order;
  for (int i = 0; i < 5; ++i) sim.schedule_at(SimTime(100), [&order, i] { order.push_back(i); });
  sim.run();
  CHECK(order == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(sim.now().ps() == 100);
}

TEST_CASE("empty run returns immediately") {
  Simulator sim;
  CHECK(sim.run() == 0);
  CHECK(sim.now().ps() == 0);
}

TEST_CASE("scheduling in the past is refused") {
  Simulator sim;
  sim.schedule_at(SimTime(10), [&sim] { CHECK_THROWS(sim.schedule_at(SimTime(5), [] {})); });
  sim.run();
}

TEST_CASE("a million random events dispatch with monotone timestamps") {
  Simulator sim;
  auto rng = component_rng(1, 2);
  std::vector<std::int64_t> seen;
  seen.reserve(1'000'000);
  for (int i = 0; i < 1000; ++i) {
    sim.schedule_at(SimTime(static_cast<std::int64_t>(rng() % 1000)), [&] {
      seen.push_back(sim.now().ps());
      if (seen.size() < 999'000) sim.schedule_in(SimTime(static_cast<std::int64_t>(rng() % 5000)), [&] {
        seen.push_back(sim.now().ps());
      });
    });
  }
  // Fan out to a million through chained inserts.
  std::function<void()> chain = [&] {
    seen.push_back(sim.now().ps());
    if (seen.size() < 1'000'000) sim.schedule_in(SimTime(static_cast<std::int64_t>(rng() % 3)), chain);
  };
  sim.schedule_at(SimTime(0), chain);
  sim.run();
  CHECK(seen.size() >= 1'000'000);
  bool monotone = true;
  for (std::size_t i = 1; i < seen.size(); ++i) monotone = monotone && seen[i] >= seen[i - 1];
  CHECK(monotone);
}

TEST_CASE("run(until) stops at the horizon") {
  Simulator sim;
  int fired = 0;
  sim.schedule_at(SimTime(10), [&] { ++fired; });
  sim.schedule_at(SimTime(30), [&] { ++fired; });
  sim.run(SimTime(20));
  CHECK(fired == 1);
  CHECK(sim.now().ps() == 20);
  sim.run();
  CHECK(fired == 2);
}

TEST_CASE("component streams are reproducible and distinct") {
  auto a = component_rng(42, 1);
  auto b = component_rng(42, 1);
  auto c = component_rng(42, 2);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}

TEST_CASE("one block at 25 G occupies one 2.64 ns slot") {
  ClusterConfig cfg = ClusterConfig::testbed();
  Simulator sim;
  Capture cap;
  Link link(sim, "l", cfg.slot(), cfg.latency.hop_fixed(), &cap, 0);
  link.send(WireUnit{1, TxClass::kBulk, 1, {}});
  link.send(WireUnit{1, TxClass::kBulk, 2, {}});
  sim.run();
  REQUIRE(cap.got.size() == 2);
  CHECK(cap.got[0].head == cfg.latency.hop_fixed());
  CHECK((cap.got[1].head - cap.got[0].head).ps() == 2640);
}

TEST_CASE("64 B chunk spans ten slots at 100 G") {
  ClusterConfig cfg;
  Simulator sim;
  Capture cap;
  Link link(sim, "l", cfg.slot(), cfg.latency.hop_fixed(), &cap, 0);
  const auto blocks = static_cast<std::uint32_t>(phy::memory_block_count(MessageKind::kWreq, 64, 0));
  link.send(WireUnit{blocks, TxClass::kBulk, 7, {}});
  sim.run();
  REQUIRE(cap.got.size() == 1);
  CHECK((cap.got[0].tail - cap.got[0].head).ps() == 9 * 660);
  CHECK(link.stats().busy.ps() == 10 * 660);
}

TEST_CASE("priority units overtake queued bulk but never split one") {
  ClusterConfig cfg;
  Simulator sim;
  Capture cap;
  Link link(sim, "l", cfg.slot(), SimTime(0), &cap, 0);
  link.send(WireUnit{10, TxClass::kBulk, 1, {}});
  link.send(WireUnit{10, TxClass::kBulk, 2, {}});
  sim.schedule_at(SimTime(660), [&] { link.send(WireUnit{1, TxClass::kPriority, 3, {}}); });
  sim.run();
  REQUIRE(cap.got.size() == 3);
  CHECK(cap.got[0].token == 1);
  CHECK(cap.got[1].token == 3);
  CHECK(cap.got[1].head.ps() == 6600);
  CHECK(cap.got[2].token == 2);
  CHECK(cap.got[2].head.ps() == 7260);
  CHECK(link.stats().blocks_delivered == link.stats().blocks_sent);
}

TEST_CASE("not_before delays a bulk unit while priority flows") {
  Simulator sim;
  Capture cap;
  Link link(sim, "l", SimTime(100), SimTime(0), &cap, 0);
  link.send(WireUnit{2, TxClass::kBulk, 1, SimTime(1000)});
  link.send(WireUnit{1, TxClass::kPriority, 2, {}});
  sim.run();
  REQUIRE(cap.got.size() == 2);
  CHECK(cap.got[0].token == 2);
  CHECK(cap.got[1].head.ps() == 1000);
}

TEST_CASE("paused bulk resumes in order and utilization buckets add up") {
  Simulator sim;
  Capture cap;
  Link link(sim, "l", SimTime(100), SimTime(0), &cap, 0);
  link.enable_utilization(SimTime(1000));
  link.set_bulk_paused(true);
  for (std::uint64_t i = 0; i < 5; ++i) link.send(WireUnit{3, TxClass::kBulk, i, {}});
  sim.schedule_at(SimTime(500), [&] { link.set_bulk_paused(false); });
  sim.run();
  REQUIRE(cap.got.size() == 5);
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(cap.got[i].token == i);
  std::int64_t total = 0;
  for (auto b : link.utilization_buckets()) total += b;
  CHECK(total == 1500);
  CHECK(link.utilization_buckets()[0] == 500);
}
