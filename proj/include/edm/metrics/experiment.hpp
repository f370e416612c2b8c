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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "edm/fabric/fabric.hpp"
#include "edm/metrics/metrics.hpp"
#include "edm/workload/workload.hpp"

namespace edm::metrics {

// Where requests come from. `source` is "all-to-all", a profile name, "kv-a",
// "kv-b", "kv-f", or a path to a trace CSV.
struct TraceSpec {
  std::string source = "all-to-all";
  double load = 0.5;
  double read_fraction = 0.5;
  std::uint32_t size = 64;  // all-to-all message size
  std::uint64_t kv_ops = 10000;

  bool is_file() const;
};

struct ExperimentSpec {
  std::string fabric = "edm";
  ClusterConfig cluster = default_cluster();
  TraceSpec trace;
  SimTime duration = SimTime::from_ns(100'000);
  std::uint64_t seed = 1;
  std::filesystem::path out;             // empty writes nothing
  SimTime utilization_bucket;            // zero picks duration / 100
  SimTime drain = SimTime::from_ns(5'000'000);  // run past the last arrival at most this long

  // Rack defaults with a read timeout long enough that loaded runs never hit it.
  static ClusterConfig default_cluster();
  // Directory-safe cell name: fabric, trace and load.
  std::string label() const;
};

struct ExperimentResult {
  std::string fabric;
  std::string trace;
  double load = 0;
  std::uint64_t seed = 0;
  std::uint64_t submitted = 0;
  std::uint64_t completed = 0;
  double offered_load = 0;
  LatencySummary latency;
  Summary slowdown;
  std::size_t slowdown_skipped = 0;
  double unloaded_read_ns = 0;   // ideal of one read of the all-to-all size
  double unloaded_write_ns = 0;
  fabric::FabricCounters counters;
  double mean_iterations = 0;  // EDM matching rounds only
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

std::vector<fabric::Request> build_trace(const ExperimentSpec& spec);

// Runs one cell. With spec.out set, writes completions.csv, utilization.csv,
// audit.csv (EDM only), spec.ini and summary.json there.
ExperimentResult run_experiment(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::vector<fabric::Request>& trace);

// Cells run on `threads` workers, each with its own simulator. Results keep input order.
std::vector<ExperimentResult> run_sweep(const std::vector<ExperimentSpec>& cells, int threads);
void write_sweep_csv(std::ostream& os, const std::vector<ExperimentResult>& rows);
std::string summary_json(const ExperimentSpec& spec, const ExperimentResult& r);

// Flat INI: [experiment], [cluster], [latency], [endpoint], [trace].
// Errors are std::runtime_error with "file:line: message".
ExperimentSpec parse_experiment_ini(std::istream& is, const std::string& filename, ExperimentSpec base = {});
ExperimentSpec load_experiment_ini(const std::filesystem::path& path, ExperimentSpec base = {});
void write_experiment_ini(std::ostream& os, const ExperimentSpec& spec);

PriorityPolicy parse_policy(const std::string& s);

}  // namespace edm::metrics
