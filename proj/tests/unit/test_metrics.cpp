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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edm/fabric/edm_fabric.hpp"
#include "edm/metrics/experiment.hpp"
#include "edm/metrics/metrics.hpp"
#include "edm/metrics/plot.hpp"

using namespace edm;
using namespace edm::metrics;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("edm_test_metrics_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.cluster.n_ports = 8;
  s.trace.load = 0.5;
  s.duration = SimTime::from_ns(5'000);
  s.seed = 4;
  return s;
}

}  // namespace

TEST_CASE("nearest-rank percentiles") {
  std::vector<double> xs;
  for (int i = 100; i >= 1; --i) xs.push_back(i);
  const auto s = summarize(xs);
  CHECK(s.count == 100);
  CHECK(s.mean == doctest::Approx(50.5));
  CHECK(s.p50 == 50);
  CHECK(s.p99 == 99);
  CHECK(s.max == 100);
  CHECK(summarize({}).count == 0);
  CHECK(summarize({7}).p99 == 7);
}

TEST_CASE("an unloaded read has slowdown exactly one") {
  ClusterConfig cfg;
  cfg.n_ports = 4;
  fabric::EdmFabric f(cfg);
  fabric::Request r;
  r.src = PortId(0);
  r.dst = PortId(2);
  r.kind = MessageKind::kRreq;
  r.size = 64;
  REQUIRE(fabric::run_requests(f, {r}));
  const auto sd = normalized_mct(f.completions().records(), f);
  REQUIRE(sd.values.size() == 1);
  CHECK(sd.values[0] == 1.0);
  CHECK(sd.skipped == 0);
}

TEST_CASE("null responses are skipped, not counted") {
  ClusterConfig cfg;
  cfg.n_ports = 4;
  fabric::EdmFabric f(cfg);
  fabric::CompletionRecord rec;
  rec.submit = SimTime{};
  rec.complete = SimTime::from_ns(10'000);
  rec.kind = MessageKind::kRreq;
  rec.bytes = 0;
  rec.null_response = true;
  const auto sd = normalized_mct({rec}, f);
  CHECK(sd.values.empty());
  CHECK(sd.skipped == 1);
  const auto lat = latency_by_kind({rec});
  CHECK(lat.read_ns.count == 0);
}

TEST_CASE("INI errors carry file and line") {
  std::istringstream bad("[experiment]\nfabric = edm\n\n[cluster]\nnodes = many\n");
  try {
    parse_experiment_ini(bad, "cell.ini");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("cell.ini:5:", 0) == 0);
  }
  std::istringstream unknown("[trace]\nloud = 0.3\n");
  CHECK_THROWS_WITH(parse_experiment_ini(unknown, "x.ini"), doctest::Contains("x.ini:2:"));
  std::istringstream nosection("load = 0.3\n");
  CHECK_THROWS_WITH(parse_experiment_ini(nosection, "y.ini"), doctest::Contains("y.ini:1:"));
}

TEST_CASE("INI round trip preserves the spec") {
  ExperimentSpec s = small_spec();
  s.fabric = "ird";
  s.cluster.chunk_bytes = 512;
  s.cluster.priority_policy = PriorityPolicy::kSrpt;
  s.cluster.endpoint.read_timeout_us = 77;
  s.trace.source = "memcached";
  s.trace.read_fraction = 0.25;
  std::ostringstream os;
  write_experiment_ini(os, s);
  std::istringstream is(os.str());
  const auto back = parse_experiment_ini(is, "rt.ini");
  std::ostringstream again;
  write_experiment_ini(again, back);
  CHECK(again.str() == os.str());
  CHECK(back.fabric == "ird");
  CHECK(back.cluster.chunk_bytes == 512);
  CHECK(back.cluster.priority_policy == PriorityPolicy::kSrpt);
  CHECK(back.trace.source == "memcached");
  CHECK(back.duration == s.duration);
}

TEST_CASE("same spec twice writes byte-identical outputs") {
  auto a = small_spec();
  auto b = small_spec();
  a.out = scratch("det_a");
  b.out = scratch("det_b");
  const auto ra = run_experiment(a);
  const auto rb = run_experiment(b);
  CHECK(ra.ok());
  for (const char* f : {"completions.csv", "utilization.csv", "audit.csv", "spec.ini", "summary.json"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(a.out / f));
    CHECK(slurp(a.out / f) == slurp(b.out / f));
  }
}

TEST_CASE("stored spec reproduces the run") {
  auto s = small_spec();
  s.out = scratch("replay");
  const auto first = run_experiment(s);
  auto again = load_experiment_ini(s.out / "spec.ini");
  again.out = scratch("replay_b");
  const auto second = run_experiment(again);
  CHECK(slurp(s.out / "completions.csv") == slurp(again.out / "completions.csv"));
  CHECK(first.slowdown.mean == second.slowdown.mean);
}

TEST_CASE("summary recomputed from the completion log matches") {
  auto s = small_spec();
  s.out = scratch("recompute");
  const auto r = run_experiment(s);
  std::ifstream in(s.out / "completions.csv");
  const auto log = fabric::CompletionLog::read_csv(in);
  REQUIRE(log.size() == r.completed);
  const auto lat = latency_by_kind(log);
  CHECK(lat.read_ns.mean == r.latency.read_ns.mean);
  CHECK(lat.read_ns.p99 == r.latency.read_ns.p99);
  CHECK(lat.write_ns.mean == r.latency.write_ns.mean);
  CHECK(lat.write_ns.p99 == r.latency.write_ns.p99);
  ClusterConfig cfg = s.cluster;
  fabric::EdmFabric f(cfg);
  const auto sd = summarize(normalized_mct(log, f).values);
  CHECK(sd.mean == r.slowdown.mean);
  CHECK(sd.p99 == r.slowdown.p99);
}

TEST_CASE("sweep emits one row per cell and both figures") {
  const auto root = scratch("sweep");
  std::vector<ExperimentSpec> cells;
  for (const char* fab : {"edm", "cxl"})
    for (double load : {0.2, 0.6}) {
      auto s = small_spec();
      s.fabric = fab;
      s.trace.load = load;
      cells.push_back(s);
    }
  auto wl = small_spec();
  wl.trace.source = "spark-sql";
  cells.push_back(wl);
  const auto results = run_sweep(cells, 2);
  REQUIRE(results.size() == cells.size());
  CHECK(results[2].fabric == "cxl");
  std::filesystem::create_directories(root);
  {
    std::ofstream csv(root / "sweep.csv");
    write_sweep_csv(csv, results);
  }
  std::istringstream rows(slurp(root / "sweep.csv"));
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  CHECK(n == 1 + static_cast<int>(cells.size()));
  const auto warnings = emit_plots(root);
  CHECK(warnings.empty());
  for (const char* f : {"latency_vs_load.csv", "latency_vs_load.svg", "slowdown_by_workload.csv", "slowdown_by_workload.svg"})
    CHECK(std::filesystem::exists(root / f));
  CHECK(slurp(root / "latency_vs_load.svg").find("<svg") == 0);
}

TEST_CASE("plotting an empty directory warns and writes nothing") {
  const auto root = scratch("empty");
  std::filesystem::create_directories(root);
  const auto warnings = emit_plots(root);
  CHECK(warnings.size() == 1);
  CHECK(std::filesystem::is_empty(root));
}

TEST_CASE("single-fabric input plots a single series pair") {
  Chart c{"t", "x", "y", {}, {Series{"edm", {0.1, 0.5}, {1.0, 1.1}}}, 0};
  const auto svg = render_svg(c);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<polyline", svg.find("<polyline") + 1) == std::string::npos);
}
