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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "edm/fabric/edm_fabric.hpp"
#include "edm/phy/codec.hpp"

using namespace edm;
using fabric::EdmFabric;
using fabric::EdmFabricOptions;
using fabric::Request;

namespace {

PortId P(int i) { return PortId(static_cast<std::uint16_t>(i)); }

Request read_req(int src, int dst, std::uint64_t addr, std::uint32_t size, SimTime at = {}) {
  Request r;
  r.arrival = at;
  r.src = P(src);
  r.dst = P(dst);
  r.kind = MessageKind::kRreq;
  r.addr = addr;
  r.size = size;
  return r;
}

Request write_req(int src, int dst, std::uint64_t addr, std::vector<std::uint8_t> data, SimTime at = {}) {
  Request r;
  r.arrival = at;
  r.src = P(src);
  r.dst = P(dst);
  r.kind = MessageKind::kWreq;
  r.addr = addr;
  r.size = static_cast<std::uint32_t>(data.size());
  r.payload = std::move(data);
  return r;
}

Request rmw_req(int src, int dst, std::uint64_t addr, RmwOpcode op, std::array<std::uint64_t, 3> args, SimTime at = {}) {
  Request r;
  r.arrival = at;
  r.src = P(src);
  r.dst = P(dst);
  r.kind = MessageKind::kRmwreq;
  r.addr = addr;
  r.opcode = op;
  r.args = args;
  return r;
}

std::uint64_t le64(const std::vector<std::uint8_t>& b) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8 && i < b.size(); ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

ClusterConfig small(int n) {
  auto c = ClusterConfig::rack();
  c.n_ports = n;
  return c;
}

}  // namespace

TEST_CASE("unloaded read and write latencies equal the fixed-latency totals") {
  const auto cfg = ClusterConfig::testbed();
  {
    EdmFabric f(cfg);
    REQUIRE(fabric::run_requests(f, {read_req(0, 1, 64, 2)}));
    const auto& r = f.completions().records().at(0);
    CHECK(r.latency().ps() == 299520);
    CHECK(r.first_data == r.complete);
  }
  {
    EdmFabric f(cfg);
    REQUIRE(fabric::run_requests(f, {write_req(0, 1, 64, {0xAB})}));
    const auto& r = f.completions().records().at(0);
    CHECK((r.first_data - r.submit).ps() == 296960);
  }
}

TEST_CASE("larger unloaded reads add serialization of the response only") {
  auto cfg = ClusterConfig::testbed();
  EdmFabric f(cfg);
  REQUIRE(fabric::run_requests(f, {read_req(0, 1, 64, 64)}));
  const auto& r = f.completions().records().at(0);
  const auto blocks = phy::memory_block_count(MessageKind::kRres, 64, 0);
  CHECK(r.latency().ps() == 299520 + static_cast<std::int64_t>(blocks - 1) * cfg.slot().ps());
}

TEST_CASE("writes then reads return the written bytes across chunk boundaries") {
  auto cfg = small(4);
  EdmFabricOptions opt;
  opt.keep_results = true;
  EdmFabric f(cfg, opt);
  std::vector<std::uint8_t> data(700);
  std::mt19937 rng(7);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  REQUIRE(fabric::run_requests(f, {write_req(0, 2, 5000, data)}));
  const auto t = f.sim().now() + SimTime::from_ns(10);
  REQUIRE(fabric::run_requests(f, {read_req(1, 2, 5000, 700, t)}));
  const auto& recs = f.completions().records();
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].kind == MessageKind::kRreq);
  CHECK(recs[1].result == data);
  CHECK(f.host(P(2)).memory().read(5000, 700) == data);
}

TEST_CASE("first submission uses id 0 and loopback is rejected") {
  EdmFabric f(small(3));
  REQUIRE(fabric::run_requests(f, {read_req(0, 1, 0, 8)}));
  CHECK(f.completions().records().at(0).id.value() == 0);
  CHECK_THROWS_AS(f.submit(read_req(0, 0, 0, 8)), std::invalid_argument);
  CHECK_THROWS_AS(f.submit(read_req(0, 1, 0, 0)), std::invalid_argument);
}

TEST_CASE("write data waits for a grant") {
  EdmFabric f(ClusterConfig::testbed());
  f.submit(write_req(0, 1, 0, std::vector<std::uint8_t>(64, 1)));
  // Run until just after the notification left: nothing but /N/ on the uplink.
  f.sim().run(SimTime::from_ns(30));
  CHECK(f.uplink(P(0)).stats().blocks_sent == 1);
  f.sim().run();
  CHECK(f.uplink(P(0)).stats().blocks_sent == 1 + phy::memory_block_count(MessageKind::kWreq, 64, 0));
}

TEST_CASE("compare-and-swap and fetch-add execute atomically") {
  EdmFabricOptions opt;
  opt.keep_results = true;
  SUBCASE("matching and mismatching CAS") {
    EdmFabric f(small(3), opt);
    f.host(P(1)).memory().store_u64(64, 10);
    REQUIRE(fabric::run_requests(f, {rmw_req(0, 1, 64, RmwOpcode::kCas, {10, 20, 0})}));
    REQUIRE(fabric::run_requests(f, {rmw_req(0, 1, 64, RmwOpcode::kCas, {10, 30, 0}, f.sim().now())}));
    const auto& recs = f.completions().records();
    CHECK(recs[0].result == std::vector<std::uint8_t>{1});
    CHECK(recs[1].result == std::vector<std::uint8_t>{0});
    CHECK(f.host(P(1)).memory().load_u64(64) == 20);
  }
  SUBCASE("two concurrent CAS on one cell: exactly one succeeds") {
    // Oracle: both serial orders of the two operations give one success.
    for (int order = 0; order < 2; ++order) {
      host::MemoryStore m;
      m.store_u64(0, 5);
      const auto a = host::execute_rmw(m, 0, 0, {5, 6, 0});
      const auto b = host::execute_rmw(m, 0, 0, {5, 7, 0});
      CHECK(a.response[0] + b.response[0] == 1);
      (void)order;
    }
    EdmFabric f(small(4), opt);
    f.host(P(2)).memory().store_u64(128, 5);
    REQUIRE(fabric::run_requests(f, {rmw_req(0, 2, 128, RmwOpcode::kCas, {5, 6, 0}),
                                     rmw_req(1, 2, 128, RmwOpcode::kCas, {5, 7, 0})}));
    const auto& recs = f.completions().records();
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].result[0] + recs[1].result[0] == 1);
    const auto v = f.host(P(2)).memory().load_u64(128);
    CHECK((v == 6 || v == 7));
  }
  SUBCASE("fetch-add returns the old value") {
    EdmFabric f(small(3), opt);
    f.host(P(1)).memory().store_u64(8, 41);
    std::vector<Request> reqs;
    for (int i = 0; i < 5; ++i) reqs.push_back(rmw_req(0, 1, 8, RmwOpcode::kFetchAdd, {1, 0, 0}));
    REQUIRE(fabric::run_requests(f, reqs));
    std::vector<std::uint64_t> olds;
    for (const auto& r : f.completions().records()) olds.push_back(le64(r.result));
    std::sort(olds.begin(), olds.end());
    CHECK(olds == std::vector<std::uint64_t>{41, 42, 43, 44, 45});
    CHECK(f.host(P(1)).memory().load_u64(8) == 46);
  }
  SUBCASE("unsupported opcode gets a NACK") {
    EdmFabric f(small(3), opt);
    REQUIRE(fabric::run_requests(f, {rmw_req(0, 1, 0, static_cast<RmwOpcode>(9), {})}));
    const auto& r = f.completions().records().at(0);
    CHECK(r.nack);
    CHECK(r.bytes == 0);
  }
}

TEST_CASE("read to a failed memory node returns a NULL response at the timeout") {
  auto cfg = ClusterConfig::testbed();
  EdmFabric f(cfg);
  f.host(P(1)).set_failed(true);
  REQUIRE(fabric::run_requests(f, {read_req(0, 1, 0, 64)}));
  const auto& r = f.completions().records().at(0);
  CHECK(r.null_response);
  CHECK(r.bytes == 0);
  const auto expected = cfg.latency.cycles(cfg.latency.host.ntf_gen) + SimTime::from_ns(cfg.endpoint.read_timeout_us * 1000);
  CHECK(r.latency() == expected);
  CHECK(f.counters().timeouts == 1);
}

TEST_CASE("timeout racing a late response: the first event wins") {
  // Event-order enumeration: the response lands before or after the timer.
  for (const bool response_first : {true, false}) {
    auto cfg = ClusterConfig::testbed();
    // Unloaded read takes ~300 ns; place the timer on either side of it.
    cfg.endpoint.read_timeout_us = response_first ? 0.5 : 0.1;
    EdmFabric f(cfg);
    REQUIRE(fabric::run_requests(f, {read_req(0, 1, 0, 2)}));
    const auto& r = f.completions().records();
    REQUIRE(r.size() == 1);
    CHECK(r[0].null_response == !response_first);
    CHECK(f.host(P(0)).stats().late_responses_dropped == (response_first ? 0u : 1u));
    CHECK(f.host(P(0)).state_entries() == 0);
    // The id is free again once the late response has drained.
    REQUIRE(fabric::run_requests(f, {read_req(0, 1, 0, 2, f.sim().now())}));
    CHECK(f.completions().records().back().null_response == !response_first);
  }
}

TEST_CASE("no timeouts, no loss and per-pair order under random load") {
  auto cfg = small(8);
  EdmFabric f(cfg);
  std::mt19937_64 rng(99);
  std::vector<Request> reqs;
  SimTime t;
  std::uniform_int_distribution<int> node(0, 7);
  std::uniform_int_distribution<std::uint32_t> size(1, 3000);
  for (int i = 0; i < 4000; ++i) {
    t = t + SimTime::from_ps(static_cast<std::int64_t>(rng() % 40000));
    int s = node(rng), d = node(rng);
    if (s == d) d = (d + 1) % 8;
    if (rng() % 2) {
      reqs.push_back(read_req(s, d, rng() % 100000, size(rng), t));
    } else {
      Request w = read_req(s, d, rng() % 100000, size(rng), t);
      w.kind = MessageKind::kWreq;
      reqs.push_back(w);
    }
  }
  REQUIRE(fabric::run_requests(f, reqs));
  CHECK(f.counters().timeouts == 0);
  CHECK(f.fabric_switch().stats().rejected == 0);
  CHECK(f.completions().size() == reqs.size());

  // Completion order per (pair, kind) equals submission order.
  std::map<std::tuple<int, int, int>, std::vector<std::int64_t>> submits;
  for (const auto& r : f.completions().records())
    submits[{r.src.value(), r.dst.value(), static_cast<int>(r.kind)}].push_back(r.submit.ps());
  for (const auto& [k, v] : submits) CHECK(std::is_sorted(v.begin(), v.end()));

  // Forwarded data never exceeds granted bytes for any pair; all bytes arrive.
  auto& sw = f.fabric_switch();
  std::uint64_t granted = 0, forwarded = 0;
  for (int s = 0; s < 8; ++s)
    for (int d = 0; d < 8; ++d) {
      const auto& a = sw.audit(P(s), P(d));
      CHECK(a.forwarded <= a.granted);
      granted += a.granted;
      forwarded += a.forwarded;
    }
  std::uint64_t demanded = 0;
  for (const auto& r : reqs) demanded += r.size;
  CHECK(granted == demanded);
  CHECK(forwarded == demanded);
  for (int p = 0; p < 8; ++p) CHECK(f.host(P(p)).state_entries() == 0);
  CHECK(f.units().live() == 0);
}

TEST_CASE("identical inputs give identical completion logs") {
  auto run = [] {
    EdmFabric f(small(6));
    std::mt19937_64 rng(5);
    std::vector<Request> reqs;
    for (int i = 0; i < 500; ++i) {
      const int s = static_cast<int>(rng() % 6);
      const int d = (s + 1 + static_cast<int>(rng() % 5)) % 6;
      reqs.push_back(read_req(s, d, 0, 1 + static_cast<std::uint32_t>(rng() % 900), SimTime::from_ns(i * 20.0)));
    }
    fabric::run_requests(f, reqs);
    std::ostringstream os;
    f.completions().write_csv(os, "edm");
    return os.str();
  };
  CHECK(run() == run());
}

TEST_CASE("receiver pause stops grants and resume restarts them") {
  auto cfg = small(4);
  cfg.endpoint.rx_drain_gbps = 20;  // slower than the link: the buffer fills
  EdmFabric f(cfg);
  std::vector<Request> reqs;
  for (int s = 1; s < 4; ++s)
    for (int i = 0; i < 30; ++i) {
      Request w = read_req(s, 0, 0, 2048, SimTime::from_ns(i * 5.0));
      w.kind = MessageKind::kWreq;
      reqs.push_back(w);
    }
  REQUIRE(fabric::run_requests(f, reqs));
  const auto& st = f.host(P(0)).stats();
  CHECK(st.pauses_sent >= 1);
  CHECK(st.resumes_sent == st.pauses_sent);
  CHECK(f.completions().size() == reqs.size());
}

TEST_CASE("batched writes share one notification and land intact") {
  auto cfg = small(3);
  cfg.endpoint.batch_writes = true;
  EdmFabric f(cfg);
  std::vector<Request> reqs;
  for (int i = 0; i < 40; ++i) reqs.push_back(write_req(0, 1, 1000 + 100 * i, std::vector<std::uint8_t>(100, static_cast<std::uint8_t>(i))));
  REQUIRE(fabric::run_requests(f, reqs));
  CHECK(f.completions().size() == 40);
  CHECK(f.host(P(0)).stats().notifications < 40);
  for (int i = 0; i < 40; ++i) CHECK(f.host(P(1)).memory().read(1000 + 100 * i, 100) == std::vector<std::uint8_t>(100, static_cast<std::uint8_t>(i)));
}

TEST_CASE("switch classification and circuit contract") {
  using switching::BlockClass;
  using switching::classify;
  CHECK(classify(phy::PhyBlock::control(phy::BlockType::kN, 0)) == BlockClass::kNotification);
  CHECK(classify(phy::PhyBlock::control(phy::BlockType::kS, 0)) == BlockClass::kOther);
  phy::MessageUnit rreq;
  rreq.kind = MessageKind::kRreq;
  rreq.size = 64;
  CHECK(classify(phy::encode_memory_message(rreq).front()) == BlockClass::kMemoryControl);
  phy::MessageUnit chunk;
  chunk.kind = MessageKind::kWreq;
  chunk.size = 8;
  chunk.data.assign(8, 0);
  CHECK(classify(phy::encode_memory_message(chunk).front()) == BlockClass::kMemoryData);

  switching::CircuitMap cm(4);
  CHECK_THROWS_AS(cm.consume(P(1), MessageId(0), 8), ProtocolViolation);
  cm.install(P(1), {P(2), MessageId(3), 64});
  CHECK_THROWS_AS(cm.consume(P(1), MessageId(4), 8), ProtocolViolation);
  CHECK_THROWS_AS(cm.consume(P(1), MessageId(3), 65), ProtocolViolation);
  CHECK(cm.consume(P(1), MessageId(3), 32) == P(2));
  CHECK(cm.consume(P(1), MessageId(3), 32) == P(2));
  CHECK(cm.pending(P(1)) == 0);
  CHECK_THROWS_AS(cm.consume(P(1), MessageId(3), 8), ProtocolViolation);
}

TEST_CASE("disjoint chunks cross the switch with a constant offset") {
  auto cfg = ClusterConfig::testbed();
  cfg.n_ports = 4;
  EdmFabric f(cfg);
  // Two writes on disjoint pairs at the same instant see identical latency.
  REQUIRE(fabric::run_requests(f, {write_req(0, 1, 0, std::vector<std::uint8_t>(64, 1)),
                                   write_req(2, 3, 0, std::vector<std::uint8_t>(64, 2))}));
  const auto& r = f.completions().records();
  REQUIRE(r.size() == 2);
  CHECK(r[0].latency() == r[1].latency());
  CHECK((r[0].first_data - r[0].submit).ps() == 296960);
}

TEST_CASE("two grants to one host serialize on its downlink") {
  auto cfg = ClusterConfig::testbed();
  cfg.n_ports = 3;
  EdmFabric f(cfg);
  // Host 0 writes to 1 and 2 at once; both grants target port 0.
  REQUIRE(fabric::run_requests(f, {write_req(0, 1, 0, std::vector<std::uint8_t>(8, 1)),
                                   write_req(0, 2, 0, std::vector<std::uint8_t>(8, 2))}));
  CHECK(f.downlink(P(0)).stats().blocks_sent == 2);
  const auto& r = f.completions().records();
  REQUIRE(r.size() == 2);
  CHECK((r[1].first_data - r[0].first_data).ps() >= cfg.slot().ps());
}
