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
#include <random>
#include <string>
#include <vector>

#include "edm/core/latency.hpp"
#include "edm/fabric/fabric.hpp"

namespace edm::workload {

using TraceRecord = fabric::Request;

// Compute nodes issue requests; memory nodes serve them. The first
// round(n * compute_fraction) ports compute, the rest serve. A fraction of 1
// makes every port both.
struct Roles {
  std::vector<PortId> compute;
  std::vector<PortId> memory;
  static Roles split(int n_ports, double compute_fraction);
  bool overlapping() const;
};

// 66-bit blocks one message puts on each link direction of its two endpoints.
struct DirectionalBlocks {
  double src_up = 0;
  double src_down = 0;
  double dst_up = 0;
  double dst_down = 0;
};
DirectionalBlocks message_blocks(MessageKind kind, std::uint32_t size, std::uint32_t chunk_bytes,
                                 std::uint64_t addr = 0);

// Per-compute-node message rate (messages per ns) that fills the busiest link
// direction to `load`, given the average per-message block footprint.
double arrival_rate_per_ns(const ClusterConfig& cfg, const Roles& roles, const DirectionalBlocks& mean_blocks,
                           double load);

class CdfProfile {
 public:
  struct Knot {
    double size;
    double p;
  };
  CdfProfile(std::string name, std::vector<Knot> knots);
  static CdfProfile parse(std::istream& is, std::string name);
  static CdfProfile load(const std::filesystem::path& path);

  // Inverse-transform sample, log-linear in size between knots, rounded up.
  std::uint32_t sample(std::mt19937_64& rng) const;
  std::uint32_t quantile(double u) const;
  // Profile CDF at `size` (continuous, log-linear between knots).
  double cdf(double size) const;
  // Exact mean of the continuous distribution before rounding.
  double mean() const;
  const std::string& name() const { return name_; }
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  std::string name_;
  std::vector<Knot> knots_;
};

// Standard names shipped under data/profiles.
const std::vector<std::string>& profile_names();
std::filesystem::path default_profile_dir();

struct AllToAllSpec {
  double load = 0.5;
  double read_fraction = 0.5;
  std::uint32_t size = 64;  // read response and write payload bytes
  SimTime duration = SimTime::from_ns(100000);
  std::uint64_t seed = 1;
};
std::vector<TraceRecord> gen_all_to_all(const ClusterConfig& cfg, const AllToAllSpec& spec);

struct ProfileSpec {
  double load = 0.8;
  double read_fraction = 0.5;
  SimTime duration = SimTime::from_ns(100000);
  std::uint64_t seed = 1;
};
std::vector<TraceRecord> gen_profile_trace(const ClusterConfig& cfg, const CdfProfile& profile, const ProfileSpec& spec);

enum class KvWorkload { kA, kB, kF };
double write_fraction(KvWorkload w);
KvWorkload parse_kv_workload(const std::string& s);
inline constexpr std::uint32_t kKvReadBytes = 1024;
inline constexpr std::uint32_t kKvWriteBytes = 100;
struct KvSpec {
  KvWorkload workload = KvWorkload::kA;
  std::uint64_t ops = 10000;
  double load = 0.5;
  std::uint64_t seed = 1;
};
std::vector<TraceRecord> gen_kv_profile(const ClusterConfig& cfg, const KvSpec& spec);

// Offered load of a trace: busiest link direction occupancy over its span.
double measured_offered_load(const ClusterConfig& cfg, const std::vector<TraceRecord>& trace);

struct TraceHeader {
  std::string profile;
  std::uint64_t seed = 0;
  int n_ports = 0;
  double link_gbps = 0;
};
void write_trace_csv(std::ostream& os, const TraceHeader& h, const std::vector<TraceRecord>& trace);
// Throws std::runtime_error naming the offending line.
std::vector<TraceRecord> read_trace_csv(std::istream& is, TraceHeader* header = nullptr);

}  // namespace edm::workload
