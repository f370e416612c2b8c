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

// edmsim: trace generation, single runs, sweeps, figures and the latency-table check.

#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "edm/baselines/models.hpp"
#include "edm/metrics/experiment.hpp"
#include "edm/metrics/plot.hpp"

using namespace edm;
using metrics::ExperimentSpec;

namespace {

// Shared flags; each is applied only when given so config files keep their values.
struct CommonFlags {
  std::string config;
  std::string fabric;
  int nodes = 0;
  double link_gbps = 0;
  std::uint32_t chunk_bytes = 0;
  int max_notifications = 0;
  std::string policy;
  double load = -1;
  std::string trace;
  std::uint64_t seed = 0;
  double duration_ms = 0;
  double read_timeout_us = 0;
  std::string out;
  CLI::App* app = nullptr;

  void add(CLI::App& a, bool single_fabric) {
    app = &a;
    a.add_option("--config", config, "experiment INI file")->check(CLI::ExistingFile);
    if (single_fabric) {
      a.add_option("--fabric", fabric, "fabric model")->check(CLI::IsMember(baselines::fabric_names()));
      a.add_option("--load", load, "offered load on the busiest link direction")->check(CLI::Range(0.0, 1.0));
      a.add_option("--trace", trace, "all-to-all, a profile name, kv-a|kv-b|kv-f, or a trace CSV");
    }
    a.add_option("--nodes", nodes, "switch ports")->check(CLI::Range(2, 4096));
    a.add_option("--link-gbps", link_gbps, "link rate")->check(CLI::PositiveNumber);
    a.add_option("--chunk-bytes", chunk_bytes, "scheduler chunk size")->check(CLI::PositiveNumber);
    a.add_option("--max-notifications", max_notifications, "active notifications per pair")->check(CLI::PositiveNumber);
    a.add_option("--policy", policy, "scheduler priority")->check(CLI::IsMember({"fcfs", "srpt"}));
    a.add_option("--seed", seed, "random seed");
    a.add_option("--duration-ms", duration_ms, "arrival window")->check(CLI::PositiveNumber);
    a.add_option("--read-timeout-us", read_timeout_us, "EDM read timeout")->check(CLI::PositiveNumber);
    a.add_option("--out", out, "output directory");
  }
  bool given(const char* name) const { return app->count(name) > 0; }

  ExperimentSpec apply() const {
    ExperimentSpec s;
    if (!config.empty()) s = metrics::load_experiment_ini(config);
    if (given("--fabric")) s.fabric = fabric;
    if (given("--nodes")) s.cluster.n_ports = nodes;
    if (given("--link-gbps")) s.cluster.link_gbps = link_gbps;
    if (given("--chunk-bytes")) s.cluster.chunk_bytes = chunk_bytes;
    if (given("--max-notifications")) s.cluster.max_active_notifications = max_notifications;
    if (given("--policy")) s.cluster.priority_policy = metrics::parse_policy(policy);
    if (given("--load")) s.trace.load = load;
    if (given("--trace")) s.trace.source = trace;
    if (given("--seed")) s.seed = seed;
    if (given("--duration-ms")) s.duration = SimTime::from_ns(duration_ms * 1e6);
    if (given("--read-timeout-us")) s.cluster.endpoint.read_timeout_us = read_timeout_us;
    if (given("--out")) s.out = out;
    s.cluster.validate();
    return s;
  }
};

void report(const metrics::ExperimentResult& r) {
  spdlog::info("{} on {} at load {:.2f}: {}/{} done, read {:.1f} ns, write {:.1f} ns, slowdown mean {:.3f} p99 {:.3f}",
               r.fabric, r.trace, r.load, r.completed, r.submitted, r.latency.read_ns.mean, r.latency.write_ns.mean,
               r.slowdown.mean, r.slowdown.p99);
  for (const auto& v : r.violations) spdlog::error("invariant: {}", v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-fabric simulator"};
  app.require_subcommand(1);

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "write a request trace CSV");
  CommonFlags gflags;
  gflags.add(*gen, true);
  std::string trace_file = "-";
  gen->add_option("--file", trace_file, "trace output path, - for stdout");

  // run
  auto* run = app.add_subcommand("run", "run one experiment");
  CommonFlags rflags;
  rflags.add(*run, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a fabric x trace x load grid");
  CommonFlags sflags;
  sflags.add(*sweep, false);
  std::vector<std::string> sweep_fabrics{"edm"};
  std::vector<std::string> sweep_traces{"all-to-all"};
  std::vector<double> sweep_loads{0.1, 0.3, 0.5, 0.7, 0.9};
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  sweep->add_option("--fabric", sweep_fabrics, "fabric models")->delimiter(',')->check(CLI::IsMember(baselines::fabric_names()));
  sweep->add_option("--trace", sweep_traces, "trace sources")->delimiter(',');
  sweep->add_option("--load", sweep_loads, "offered loads")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  // plot
  auto* plot = app.add_subcommand("plot", "render figures from a sweep directory");
  std::string plot_dir;
  plot->add_option("dir", plot_dir, "sweep output directory")->required()->check(CLI::ExistingDirectory);

  // verify-table1
  auto* table = app.add_subcommand("verify-table1", "check unloaded EDM latency against the reference totals");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto spec = gflags.apply();
      const auto trace = metrics::build_trace(spec);
      const workload::TraceHeader h{spec.trace.source, spec.seed, spec.cluster.n_ports, spec.cluster.link_gbps};
      if (trace_file == "-") {
        workload::write_trace_csv(std::cout, h, trace);
      } else {
        std::ofstream os(trace_file);
        if (!os) throw std::runtime_error("cannot write " + trace_file);
        workload::write_trace_csv(os, h, trace);
        spdlog::info("{} requests, offered load {:.3f}", trace.size(), workload::measured_offered_load(spec.cluster, trace));
      }
      return 0;
    }
    if (*run) {
      const auto spec = rflags.apply();
      const auto r = metrics::run_experiment(spec);
      report(r);
      if (spec.out.empty()) std::cout << metrics::summary_json(spec, r) << '\n';
      return r.ok() ? 0 : 1;
    }
    if (*sweep) {
      const auto base = sflags.apply();
      const std::filesystem::path root = base.out.empty() ? std::filesystem::path("sweep") : base.out;
      std::vector<ExperimentSpec> cells;
      for (const auto& t : sweep_traces)
        for (double l : sweep_loads)
          for (const auto& f : sweep_fabrics) {
            ExperimentSpec s = base;
            s.fabric = f;
            s.trace.source = t;
            s.trace.load = l;
            s.out = root / s.label();
            cells.push_back(std::move(s));
          }
      spdlog::info("{} cells on {} threads", cells.size(), threads);
      const auto results = metrics::run_sweep(cells, threads);
      bool ok = true;
      for (const auto& r : results) {
        report(r);
        ok = ok && r.ok();
      }
      std::filesystem::create_directories(root);
      std::ofstream csv(root / "sweep.csv");
      metrics::write_sweep_csv(csv, results);
      csv.close();
      for (const auto& w : metrics::emit_plots(root)) spdlog::warn("{}", w);
      return ok ? 0 : 1;
    }
    if (*plot) {
      for (const auto& w : metrics::emit_plots(plot_dir)) spdlog::warn("{}", w);
      return 0;
    }
    if (*table) {
      const auto r = metrics::verify_unloaded_latency(ClusterConfig::testbed());
      metrics::print_unloaded_latency(std::cout, r);
      return r.read_ok && r.write_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
