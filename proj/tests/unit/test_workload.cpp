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
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "edm/phy/codec.hpp"
#include "edm/workload/workload.hpp"

using namespace edm;
using namespace edm::workload;

namespace {

ClusterConfig small_cluster(int n) {
  auto cfg = ClusterConfig::rack();
  cfg.n_ports = n;
  return cfg;
}

// Oracle: busiest-direction occupancy recomputed straight from the codec.
double oracle_load(const ClusterConfig& cfg, const std::vector<TraceRecord>& t) {
  std::vector<double> up(cfg.n_ports, 0), down(cfg.n_ports, 0);
  for (const auto& r : t) {
    const auto data_kind = r.kind == MessageKind::kWreq ? MessageKind::kWreq : MessageKind::kRres;
    double data = 0;
    std::uint32_t chunks = 0;
    for (std::uint32_t off = 0; off < r.size; off += cfg.chunk_bytes, ++chunks) {
      const std::uint32_t len = std::min(cfg.chunk_bytes, r.size - off);
      data += static_cast<double>(phy::memory_block_count(data_kind, len, 0, off, off + len == r.size));
    }
    if (r.kind == MessageKind::kWreq) {
      up[r.src.value()] += 1 + data;  // notification block + data
      down[r.src.value()] += chunks;  // one grant per chunk
      down[r.dst.value()] += data;
    } else {
      const double req = static_cast<double>(phy::memory_block_count(r.kind, r.size, r.addr));
      up[r.src.value()] += req;
      down[r.dst.value()] += req + (chunks - 1);
      up[r.dst.value()] += data;
      down[r.src.value()] += data;
    }
  }
  const double busiest = std::max(*std::max_element(up.begin(), up.end()), *std::max_element(down.begin(), down.end()));
  return busiest * cfg.slot().ns() / t.back().arrival.ns();
}

}  // namespace

TEST_CASE("roles split compute and memory ports") {
  const auto r = Roles::split(10, 0.5);
  CHECK(r.compute.size() == 5);
  CHECK(r.memory.size() == 5);
  CHECK(r.memory.front() == PortId(5));
  CHECK_FALSE(r.overlapping());
  CHECK(Roles::split(4, 1.0).overlapping());
  CHECK_THROWS(Roles::split(1, 0.5));
  CHECK_THROWS(Roles::split(8, 0.0));
}

TEST_CASE("zero load yields an empty trace") {
  const auto cfg = small_cluster(8);
  AllToAllSpec a;
  a.load = 0;
  CHECK(gen_all_to_all(cfg, a).empty());
  ProfileSpec p;
  p.load = 0;
  CHECK(gen_profile_trace(cfg, CdfProfile("one", {{64, 1.0}}), p).empty());
  a.load = 1.5;
  CHECK_THROWS(gen_all_to_all(cfg, a));
}

TEST_CASE("all-to-all trace hits the requested busiest-link load") {
  const auto cfg = small_cluster(8);
  AllToAllSpec s;
  s.load = 0.5;
  s.duration = SimTime::from_ns(2'000'000);
  s.seed = 7;
  const auto t = gen_all_to_all(cfg, s);
  REQUIRE(t.size() > 10000);
  const double measured = measured_offered_load(cfg, t);
  CHECK(measured == doctest::Approx(oracle_load(cfg, t)).epsilon(1e-9));
  CHECK(std::abs(measured - 0.5) <= 0.02 * 0.5);
  CHECK(std::is_sorted(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.arrival < b.arrival; }));
  const auto roles = Roles::split(cfg.n_ports, cfg.endpoint.compute_fraction);
  for (const auto& r : t) {
    CHECK(r.src.value() < roles.compute.size());
    CHECK(r.dst.value() >= roles.compute.size());
    CHECK(r.size == 64);
  }
}

TEST_CASE("read fraction one issues only reads") {
  const auto cfg = small_cluster(8);
  AllToAllSpec s;
  s.read_fraction = 1.0;
  s.duration = SimTime::from_ns(50'000);
  const auto t = gen_all_to_all(cfg, s);
  REQUIRE_FALSE(t.empty());
  CHECK(std::all_of(t.begin(), t.end(), [](const auto& r) { return r.kind == MessageKind::kRreq; }));
}

TEST_CASE("generators are reproducible by seed") {
  const auto cfg = small_cluster(16);
  const auto prof = CdfProfile::load(default_profile_dir() / "hadoop-sort.csv");
  ProfileSpec s;
  s.duration = SimTime::from_ns(20'000);
  s.seed = 42;
  const auto a = gen_profile_trace(cfg, prof, s);
  const auto b = gen_profile_trace(cfg, prof, s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].arrival == b[i].arrival);
    CHECK(a[i].dst == b[i].dst);
    CHECK(a[i].size == b[i].size);
    CHECK(a[i].addr == b[i].addr);
  }
  s.seed = 43;
  const auto c = gen_profile_trace(cfg, prof, s);
  CHECK((c.size() != a.size() || c.front().arrival != a.front().arrival));
}

TEST_CASE("single-knot profile always samples its size") {
  const CdfProfile p("fixed", {{64, 1.0}});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(p.sample(rng) == 64);
  CHECK(p.mean() == 64);
}

TEST_CASE("two-knot profile sample mean matches the closed form") {
  const CdfProfile p("two", {{64, 0.5}, {1024, 1.0}});
  // Half the mass at 64, half exp-uniform on [64, 1024].
  const double oracle = 0.5 * 64 + 0.5 * (1024.0 - 64.0) / std::log(16.0);
  CHECK(p.mean() == doctest::Approx(oracle).epsilon(1e-12));
  std::mt19937_64 rng(5);
  double sum = 0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) sum += p.sample(rng);
  CHECK(std::abs(sum / kN - oracle) <= 0.01 * oracle);
}

TEST_CASE("sampled sizes follow the profile CDF") {
  for (const auto& name : profile_names()) {
    CAPTURE(name);
    const auto p = CdfProfile::load(default_profile_dir() / (name + ".csv"));
    std::mt19937_64 rng(11);
    std::vector<std::uint32_t> xs(100000);
    for (auto& x : xs) x = p.sample(rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0;
    for (std::size_t i = 0; i < xs.size();) {
      std::size_t j = i;
      while (j < xs.size() && xs[j] == xs[i]) ++j;
      const double emp = static_cast<double>(j) / static_cast<double>(xs.size());
      ks = std::max(ks, std::abs(emp - p.cdf(xs[i])));
      i = j;
    }
    CHECK(ks <= 0.01);
  }
}

TEST_CASE("memcached profile is byte-dominated by its top percentile") {
  const auto p = CdfProfile::load(default_profile_dir() / "memcached.csv");
  std::mt19937_64 rng(3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = p.sample(rng);
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
  const double top = std::accumulate(xs.begin(), xs.begin() + xs.size() / 100, 0.0);
  CHECK(top > 0.5 * total);
}

TEST_CASE("all shipped profiles load") {
  REQUIRE(profile_names().size() == 5);
  for (const auto& name : profile_names()) {
    CAPTURE(name);
    const auto p = CdfProfile::load(default_profile_dir() / (name + ".csv"));
    CHECK(p.knots().back().p == 1.0);
    CHECK(p.mean() >= p.knots().front().size);
  }
}

TEST_CASE("profile parse errors name the line") {
  std::istringstream bad("# comment\n64,0.5\n128;0.9\n");
  try {
    (void)CdfProfile::parse(bad, "broken");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("broken:3") != std::string::npos);
  }
  std::istringstream unsorted("128,0.5\n64,1.0\n");
  CHECK_THROWS_AS((void)CdfProfile::parse(unsorted, "u"), std::invalid_argument);
  std::istringstream short_tail("64,0.5\n128,0.9\n");
  CHECK_THROWS_AS((void)CdfProfile::parse(short_tail, "s"), std::invalid_argument);
}

TEST_CASE("key-value workloads honour their write fractions") {
  const auto cfg = small_cluster(16);
  for (auto w : {KvWorkload::kA, KvWorkload::kB, KvWorkload::kF}) {
    KvSpec s;
    s.workload = w;
    s.ops = 40000;
    const auto t = gen_kv_profile(cfg, s);
    REQUIRE(t.size() == s.ops);
    std::size_t writes = 0;
    for (const auto& r : t) {
      if (r.kind == MessageKind::kWreq) {
        ++writes;
        CHECK(r.size == kKvWriteBytes);
      } else {
        CHECK(r.size == kKvReadBytes);
      }
    }
    CHECK(std::abs(static_cast<double>(writes) / t.size() - write_fraction(w)) <= 0.01);
  }
  CHECK(parse_kv_workload("b") == KvWorkload::kB);
  CHECK_THROWS(parse_kv_workload("z"));
}

TEST_CASE("trace CSV round trips") {
  const auto cfg = small_cluster(8);
  AllToAllSpec s;
  s.duration = SimTime::from_ns(5000);
  auto t = gen_all_to_all(cfg, s);
  REQUIRE_FALSE(t.empty());
  std::stringstream ss;
  write_trace_csv(ss, {"all-to-all", 1, 8, 100.0}, t);
  TraceHeader h;
  const auto back = read_trace_csv(ss, &h);
  CHECK(h.profile == "all-to-all");
  CHECK(h.n_ports == 8);
  CHECK(h.link_gbps == 100.0);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back[i].arrival == t[i].arrival);
    CHECK(back[i].src == t[i].src);
    CHECK(back[i].dst == t[i].dst);
    CHECK(back[i].kind == t[i].kind);
    CHECK(back[i].size == t[i].size);
  }
}

TEST_CASE("trace CSV errors carry line numbers") {
  std::istringstream bad("# profile,seed,n_ports,link_gbps\n# x,1,8,100\narrival_ps,src,dst,kind,size_bytes\n"
                         "0,0,4,RREQ,64\n10,1,5,BOGUS,64\n");
  try {
    (void)read_trace_csv(bad);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  std::istringstream unsorted("20,0,4,RREQ,64\n10,1,5,WREQ,64\n");
  CHECK_THROWS_AS((void)read_trace_csv(unsorted), std::runtime_error);
  std::istringstream zero("0,0,4,RREQ,0\n");
  CHECK_THROWS_AS((void)read_trace_csv(zero), std::runtime_error);
}
