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
#include <sstream>

#include "edm/baselines/models.hpp"
#include "edm/workload/workload.hpp"

using namespace edm;
using baselines::make_fabric;
using fabric::Request;

namespace {

PortId P(int i) { return PortId(static_cast<std::uint16_t>(i)); }

ClusterConfig cluster(int n) {
  auto cfg = ClusterConfig::rack();
  cfg.n_ports = n;
  cfg.endpoint.functional_memory = false;
  cfg.endpoint.read_timeout_us = 1e6;  // loaded runs must not time out
  return cfg;
}

Request req(MessageKind k, int src, int dst, std::uint32_t size, SimTime at = {}, std::uint64_t addr = 0) {
  Request r;
  r.arrival = at;
  r.src = P(src);
  r.dst = P(dst);
  r.kind = k;
  r.size = size;
  r.addr = addr;
  return r;
}

const std::vector<std::string>& packet_fabrics() {
  static const std::vector<std::string> names{"ird", "dctcp", "pfabric", "pfc", "cxl", "fastpass"};
  return names;
}

SimTime latency_of(const fabric::Fabric& f, int src, int dst) {
  auto& log = const_cast<fabric::Fabric&>(f).completions().records();
  for (const auto& r : log)
    if (r.src == P(src) && r.dst == P(dst)) return r.latency();
  FAIL("no completion for pair");
  return {};
}

const baselines::PacketFabric& packet(const fabric::Fabric& f) {
  return dynamic_cast<const baselines::PacketFabric&>(f);
}

}  // namespace

TEST_CASE("every fabric name builds") {
  const auto cfg = cluster(4);
  for (const auto& n : baselines::fabric_names()) {
    auto f = make_fabric(n, cfg);
    REQUIRE(f);
    CHECK(f->name() == n);
  }
  CHECK_THROWS(make_fabric("token-ring", cfg));
}

TEST_CASE("single message completes in exactly its analytic ideal") {
  const auto cfg = cluster(4);
  for (const auto& n : baselines::fabric_names()) {
    for (auto k : {MessageKind::kRreq, MessageKind::kWreq}) {
      for (std::uint32_t size : {1u, 64u, 257u, 4096u, 10000u, 65535u}) {
        CAPTURE(n);
        CAPTURE(to_string(k));
        CAPTURE(size);
        auto f = make_fabric(n, cfg);
        REQUIRE(fabric::run_requests(*f, {req(k, 0, 2, size)}));
        REQUIRE(f->completions().size() == 1);
        const auto& r = f->completions().records().front();
        CHECK(r.bytes == size);
        CHECK(r.latency() == f->ideal_mct(k, size));
      }
    }
  }
}

TEST_CASE("sender-driven 64 B write matches a hand-computed path") {
  const auto cfg = cluster(4);
  auto f = make_fabric("dctcp", cfg);
  REQUIRE(fabric::run_requests(*f, {req(MessageKind::kWreq, 0, 1, 64)}));
  // Host send and receive cycles plus switch cut-through, two hops, then the
  // remaining nine blocks of the 10-block memory unit.
  const double expect_ns = 10 * 2.56 + 2 * 58.24 + 9 * 0.66;
  CHECK(f->completions().records().front().latency().ns() == doctest::Approx(expect_ns).epsilon(1e-9));
}

TEST_CASE("central arbiter adds its control round trip to one flow") {
  const auto cfg = cluster(4);
  auto direct = make_fabric("dctcp", cfg);
  auto arb = make_fabric("fastpass", cfg);
  for (auto k : {MessageKind::kRreq, MessageKind::kWreq}) {
    const auto a = direct->ideal_mct(k, 64);
    const auto b = arb->ideal_mct(k, 64);
    // NOTIFY up and down to the arbiter, grant back: two extra hops each way.
    CHECK(b - a >= cfg.latency.hop_fixed() * 4);
  }
  REQUIRE(fabric::run_requests(*arb, {req(MessageKind::kWreq, 0, 1, 64)}));
  const auto& fp = dynamic_cast<const baselines::FastpassFabric&>(*arb);
  CHECK(fp.arbiter_uplink().stats().blocks_sent > 0);
  CHECK(fp.arbiter_downlink().stats().blocks_sent > 0);
}

TEST_CASE("mixed loaded traffic conserves messages and bytes") {
  const auto cfg = cluster(16);
  const auto prof = workload::CdfProfile::load(workload::default_profile_dir() / "spark-sql.csv");
  workload::ProfileSpec s;
  s.load = 0.6;
  s.duration = SimTime::from_ns(20000);
  s.seed = 9;
  const auto trace = workload::gen_profile_trace(cfg, prof, s);
  REQUIRE(trace.size() > 50);
  std::multiset<std::tuple<int, int, int, std::uint32_t>> want;
  for (const auto& r : trace) want.emplace(r.src.value(), r.dst.value(), static_cast<int>(r.kind), r.size);
  for (const auto& n : baselines::fabric_names()) {
    CAPTURE(n);
    auto f = make_fabric(n, cfg);
    REQUIRE(fabric::run_requests(*f, trace, SimTime::from_ns(5'000'000)));
    CHECK(f->outstanding() == 0);
    std::multiset<std::tuple<int, int, int, std::uint32_t>> got;
    for (const auto& r : f->completions().records()) {
      got.emplace(r.src.value(), r.dst.value(), static_cast<int>(r.kind), r.bytes);
      CHECK(r.latency() >= f->ideal_mct(r.kind, r.bytes));
    }
    CHECK(got == want);
    if (n == "pfc" || n == "cxl" || n == "ird" || n == "fastpass" || n == "edm") CHECK(f->counters().drops == 0);
  }
}

TEST_CASE("permutation traffic at half load sustains its goodput") {
  const auto cfg = cluster(8);
  // Hosts 0..3 each write 16 KiB messages to a fixed partner at half link rate.
  const std::uint32_t size = 16384;
  const SimTime span = SimTime::from_ns(40000);
  const double msg_ns = size * 8 / 100.0 / 0.5;
  std::vector<Request> trace;
  for (double t = 0; t < span.ns(); t += msg_ns)
    for (int s = 0; s < 4; ++s) trace.push_back(req(MessageKind::kWreq, s, s + 4, size, SimTime::from_ns(t)));
  std::sort(trace.begin(), trace.end(), [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
  for (const auto& n : baselines::fabric_names()) {
    CAPTURE(n);
    auto f = make_fabric(n, cfg);
    REQUIRE(fabric::run_requests(*f, trace));
    SimTime last;
    for (const auto& r : f->completions().records()) last = std::max(last, r.complete);
    const double offered = trace.back().arrival.ns() + msg_ns;
    CHECK(offered / last.ns() >= 0.95);
  }
}

TEST_CASE("priority queues match FIFO for uniform single-packet flows") {
  const auto cfg = cluster(16);
  workload::AllToAllSpec s;
  s.load = 0.3;
  s.duration = SimTime::from_ns(20000);
  const auto trace = workload::gen_all_to_all(cfg, s);
  auto a = make_fabric("dctcp", cfg);
  auto b = make_fabric("pfabric", cfg);
  REQUIRE(fabric::run_requests(*a, trace));
  REQUIRE(fabric::run_requests(*b, trace));
  double la = 0, lb = 0;
  for (const auto& r : a->completions().records()) la += r.latency().ns();
  for (const auto& r : b->completions().records()) lb += r.latency().ns();
  CHECK(la == doctest::Approx(lb).epsilon(0.01));
}

TEST_CASE("receiver-driven grants from two receivers stall one sender") {
  const auto cfg = cluster(4);
  const std::uint32_t size = 65535;
  auto f = make_fabric("ird", cfg);
  REQUIRE(fabric::run_requests(*f, {req(MessageKind::kWreq, 0, 1, size), req(MessageKind::kWreq, 0, 2, size)}));
  const SimTime solo = f->ideal_mct(MessageKind::kWreq, size);
  // Both receivers keep granting, but the shared sender link serializes them.
  const SimTime l1 = latency_of(*f, 0, 1);
  const SimTime l2 = latency_of(*f, 0, 2);
  CHECK(std::max(l1, l2) > solo + (solo - f->ideal_mct(MessageKind::kWreq, 64)) * 0.9);
  const auto& down1 = f->downlink(P(1));
  const auto& down2 = f->downlink(P(2));
  const double busy = std::max(l1, l2).ns();
  CHECK(down1.stats().blocks_sent * cfg.slot().ns() < 0.6 * busy);
  CHECK(down2.stats().blocks_sent * cfg.slot().ns() < 0.6 * busy);
}

TEST_CASE("credit exhaustion under incast stalls traffic to other destinations") {
  const auto cfg = cluster(16);
  std::vector<Request> trace;
  for (int s = 1; s <= 8; ++s)
    for (int k = 0; k < 4; ++k) trace.push_back(req(MessageKind::kWreq, s, 0, 65535));
  trace.push_back(req(MessageKind::kWreq, 1, 9, 64, SimTime::from_ns(100)));
  auto f = make_fabric("cxl", cfg);
  REQUIRE(fabric::run_requests(*f, trace));
  const SimTime victim = latency_of(*f, 1, 9);
  CHECK(victim > f->ideal_mct(MessageKind::kWreq, 64) * 20);
  auto edm = make_fabric("edm", cfg);
  REQUIRE(fabric::run_requests(*edm, trace));
  CHECK(latency_of(*edm, 1, 9) < victim);
}

TEST_CASE("pause frames spread incast congestion to a victim flow") {
  const auto cfg = cluster(16);
  std::vector<Request> trace;
  for (int s = 1; s <= 8; ++s)
    for (int k = 0; k < 4; ++k) trace.push_back(req(MessageKind::kWreq, s, 0, 65535));
  trace.push_back(req(MessageKind::kWreq, 1, 9, 64, SimTime::from_ns(20000)));
  auto f = make_fabric("pfc", cfg);
  REQUIRE(fabric::run_requests(*f, trace));
  CHECK(f->counters().pauses > 0);
  CHECK(f->counters().drops == 0);
  CHECK(latency_of(*f, 1, 9) > f->ideal_mct(MessageKind::kWreq, 64) * 5);
}

TEST_CASE("window transport grows while unmarked and backs off under incast") {
  const auto cfg = cluster(16);
  {
    auto f = make_fabric("dctcp", cfg);
    auto& d = dynamic_cast<baselines::ReactiveFabric&>(*f);
    const double w0 = d.window(P(1), P(2));
    std::vector<Request> trace;
    for (int k = 0; k < 8; ++k) trace.push_back(req(MessageKind::kWreq, 1, 2, 65535, SimTime::from_ns(k * 6000.0)));
    REQUIRE(fabric::run_requests(*f, trace));
    CHECK(d.window(P(1), P(2)) > w0);
    CHECK(packet(*f).stats().marks == 0);
  }
  {
    auto f = make_fabric("dctcp", cfg);
    auto& d = dynamic_cast<baselines::ReactiveFabric&>(*f);
    std::vector<Request> trace;
    for (int s = 1; s <= 12; ++s)
      for (int k = 0; k < 4; ++k) trace.push_back(req(MessageKind::kWreq, s, 0, 65535));
    REQUIRE(fabric::run_requests(*f, trace));
    CHECK(packet(*f).stats().marks > 0);
    CHECK(d.alpha(P(1), P(0)) < 1.0);
    // Reaction lags the burst: the first window overflows the egress queue.
    double excess = 0;
    for (const auto& r : f->completions().records()) excess += r.latency().ns() / f->ideal_mct(r.kind, r.bytes).ns();
    CHECK(excess / f->completions().size() > 2.0);
  }
}

TEST_CASE("completion log rows carry the fabric name") {
  const auto cfg = cluster(4);
  for (const auto& n : packet_fabrics()) {
    auto f = make_fabric(n, cfg);
    REQUIRE(fabric::run_requests(*f, {req(MessageKind::kRreq, 0, 3, 64)}));
    std::ostringstream os;
    f->completions().write_csv(os, f->name());
    const auto text = os.str();
    CHECK(text.find(",model\n") != std::string::npos);
    CHECK(text.find("," + n + "\n") != std::string::npos);
  }
}
