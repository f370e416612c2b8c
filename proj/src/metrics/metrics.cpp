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

#include "edm/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "edm/fabric/edm_fabric.hpp"

namespace edm::metrics {

Summary summarize(std::vector<double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
    return xs[std::clamp<std::size_t>(k, 1, xs.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p99 = rank(0.99);
  s.max = xs.back();
  return s;
}

SlowdownSet normalized_mct(const std::vector<fabric::CompletionRecord>& log, const fabric::Fabric& f) {
  SlowdownSet out;
  out.values.reserve(log.size());
  for (const auto& r : log) {
    if (r.null_response || r.nack || r.bytes == 0) {
      ++out.skipped;
      continue;
    }
    const double ideal = static_cast<double>(f.ideal_mct(r.kind, r.bytes).ps());
    out.values.push_back(static_cast<double>(r.latency().ps()) / ideal);
  }
  return out;
}

LatencySummary latency_by_kind(const std::vector<fabric::CompletionRecord>& log) {
  std::vector<double> rd, wr, all;
  for (const auto& r : log) {
    if (r.null_response) continue;
    const double ns = r.latency().ns();
    (r.kind == MessageKind::kWreq ? wr : rd).push_back(ns);
    all.push_back(ns);
  }
  return {summarize(std::move(rd)), summarize(std::move(wr)), summarize(std::move(all))};
}

std::vector<UtilizationRow> utilization(const fabric::Fabric& f) {
  const int n = f.config().n_ports;
  const SimTime bucket = f.uplink(PortId(0)).utilization_bucket();
  std::vector<UtilizationRow> rows;
  if (bucket.ps() <= 0) return rows;
  std::size_t len = 0;
  for (int p = 0; p < n; ++p) {
    len = std::max(len, f.uplink(PortId(static_cast<std::uint16_t>(p))).utilization_buckets().size());
    len = std::max(len, f.downlink(PortId(static_cast<std::uint16_t>(p))).utilization_buckets().size());
  }
  rows.resize(len);
  const double width = static_cast<double>(bucket.ps());
  for (std::size_t i = 0; i < len; ++i) rows[i].start = bucket * static_cast<std::int64_t>(i);
  for (int p = 0; p < n; ++p) {
    const PortId id(static_cast<std::uint16_t>(p));
    const auto& up = f.uplink(id).utilization_buckets();
    const auto& down = f.downlink(id).utilization_buckets();
    for (std::size_t i = 0; i < up.size(); ++i) {
      const double u = static_cast<double>(up[i]) / width;
      rows[i].up_mean += u / n;
      rows[i].up_max = std::max(rows[i].up_max, u);
    }
    for (std::size_t i = 0; i < down.size(); ++i) {
      const double u = static_cast<double>(down[i]) / width;
      rows[i].down_mean += u / n;
      rows[i].down_max = std::max(rows[i].down_max, u);
    }
  }
  return rows;
}

void write_utilization_csv(std::ostream& os, const std::vector<UtilizationRow>& rows) {
  os << "bucket_start_ps,uplink_mean,uplink_max,downlink_mean,downlink_max\n";
  for (const auto& r : rows)
    os << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.start.ps(), r.up_mean, r.up_max, r.down_mean, r.down_max);
}

UnloadedLatencyReport verify_unloaded_latency(const ClusterConfig& cfg) {
  UnloadedLatencyReport rep;
  const auto& l = cfg.latency;
  const double c = l.cycle_ns;
  const double pcs = l.pcs_fixed_ns;
  const auto& h = l.host;
  const auto& s = l.sw;
  const int sched = l.sched.head_read + l.sched.per_iteration;
  // Scheduler cycles counted at the fabric clock; the reference setup runs both on one clock.
  const double sched_ns = cfg.sched_cycles(sched).ns();

  rep.read_rows = {
      {"compute node PCS", 2 * pcs + (h.ntf_gen + h.mdata_rx_proc) * c},
      {"switch PCS and scheduler", 4 * pcs + (2 * s.classify + s.forward) * c + sched_ns + s.g_block_gen * c},
      {"memory node PCS", 2 * pcs + (h.g_block_proc + h.rreq_to_memctrl_extra + h.grant_q_read + h.mdata_gen) * c},
      {"PMA/PMD and transceiver", 8 * l.pma_pmd_transceiver_ns},
      {"propagation", 4 * l.propagation_ns},
  };
  rep.write_rows = {
      {"compute node PCS", 3 * pcs + (h.ntf_gen + h.g_block_proc + h.grant_q_read + h.mdata_gen) * c},
      {"switch PCS and scheduler", 4 * pcs + (2 * s.classify + s.forward + s.g_block_gen) * c + sched_ns},
      {"memory node PCS", pcs + h.mdata_rx_proc * c},
      {"PMA/PMD and transceiver", 8 * l.pma_pmd_transceiver_ns},
      {"propagation", 4 * l.propagation_ns},
  };

  // Two-byte reads answer in one block; a one-byte write is timed at its first data block.
  {
    fabric::EdmFabric f(cfg);
    fabric::Request r;
    r.src = PortId(0);
    r.dst = PortId(1);
    r.kind = MessageKind::kRreq;
    r.size = 2;
    fabric::run_requests(f, {r});
    if (!f.completions().records().empty()) rep.read_ns = f.completions().records().front().latency().ns();
  }
  {
    fabric::EdmFabric f(cfg);
    fabric::Request r;
    r.src = PortId(0);
    r.dst = PortId(1);
    r.kind = MessageKind::kWreq;
    r.size = 1;
    r.payload = {0x5A};
    fabric::run_requests(f, {r});
    if (!f.completions().records().empty()) {
      const auto& w = f.completions().records().front();
      rep.write_ns = (w.first_data - w.submit).ns();
    }
  }
  rep.expected_read_ns = l.reference.edm_read_ns;
  rep.expected_write_ns = l.reference.edm_write_ns;
  rep.read_ok = SimTime::from_ns(rep.read_ns) == SimTime::from_ns(rep.expected_read_ns);
  rep.write_ok = SimTime::from_ns(rep.write_ns) == SimTime::from_ns(rep.expected_write_ns);
  return rep;
}

void print_unloaded_latency(std::ostream& os, const UnloadedLatencyReport& r) {
  const auto block = [&](const char* what, const auto& rows, double sim, double want, bool ok) {
    os << fmt::format("{}\n", what);
    double sum = 0;
    for (const auto& [name, ns] : rows) {
      os << fmt::format("  {:<28}{:>10.2f} ns\n", name, ns);
      sum += ns;
    }
    os << fmt::format("  {:<28}{:>10.2f} ns\n", "breakdown sum", sum);
    os << fmt::format("  {:<28}{:>10.2f} ns\n", "simulated", sim);
    os << fmt::format("  {:<28}{:>10.2f} ns  {}\n", "reference", want, ok ? "MATCH" : "MISMATCH");
  };
  block("read", r.read_rows, r.read_ns, r.expected_read_ns, r.read_ok);
  block("write", r.write_rows, r.write_ns, r.expected_write_ns, r.write_ok);
}

}  // namespace edm::metrics
