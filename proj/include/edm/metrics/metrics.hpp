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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edm/fabric/fabric.hpp"

namespace edm::metrics {

struct Summary {
  std::size_t count = 0;
  double mean = 0;
  double p50 = 0;
  double p99 = 0;
  double max = 0;
};

// Nearest-rank percentiles over a copy of `xs`.
Summary summarize(std::vector<double> xs);

struct SlowdownSet {
  std::vector<double> values;  // one per counted message, log order
  std::size_t skipped = 0;     // null or NACKed responses carry no data
};

// Latency divided by the fabric's unloaded completion time for the same kind
// and size. Every counted value is at least 1 for a well-formed run.
SlowdownSet normalized_mct(const std::vector<fabric::CompletionRecord>& log, const fabric::Fabric& f);

struct LatencySummary {
  Summary read_ns;
  Summary write_ns;
  Summary all_ns;
};
LatencySummary latency_by_kind(const std::vector<fabric::CompletionRecord>& log);

// Per-bucket mean and max busy fraction over all host uplinks and downlinks.
struct UtilizationRow {
  SimTime start;
  double up_mean = 0;
  double up_max = 0;
  double down_mean = 0;
  double down_max = 0;
};
std::vector<UtilizationRow> utilization(const fabric::Fabric& f);
void write_utilization_csv(std::ostream& os, const std::vector<UtilizationRow>& rows);

// Unloaded EDM read (one response block) and write (timed at first data) against the reference totals.
struct UnloadedLatencyReport {
  double read_ns = 0;
  double write_ns = 0;
  double expected_read_ns = 0;
  double expected_write_ns = 0;
  bool read_ok = false;
  bool write_ok = false;
  std::vector<std::pair<std::string, double>> read_rows;
  std::vector<std::pair<std::string, double>> write_rows;
};
UnloadedLatencyReport verify_unloaded_latency(const ClusterConfig& cfg);
void print_unloaded_latency(std::ostream& os, const UnloadedLatencyReport& r);

}  // namespace edm::metrics
