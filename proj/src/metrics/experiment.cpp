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

#include "edm/metrics/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "edm/baselines/models.hpp"
#include "edm/fabric/edm_fabric.hpp"

namespace edm::metrics {

namespace {

bool is_kv(const std::string& s) { return s == "kv-a" || s == "kv-b" || s == "kv-f"; }

std::string policy_name(PriorityPolicy p) { return p == PriorityPolicy::kSrpt ? "srpt" : "fcfs"; }

nlohmann::json summary_to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"p50", s.p50}, {"p99", s.p99}, {"max", s.max}};
}

void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  body(os);
}

}  // namespace

bool TraceSpec::is_file() const {
  if (source == "all-to-all" || is_kv(source)) return false;
  const auto& names = workload::profile_names();
  return std::find(names.begin(), names.end(), source) == names.end();
}

ClusterConfig ExperimentSpec::default_cluster() {
  auto c = ClusterConfig::rack();
  c.endpoint.read_timeout_us = 1000.0;
  c.endpoint.functional_memory = false;
  return c;
}

std::string ExperimentSpec::label() const {
  std::string t = trace.is_file() ? std::filesystem::path(trace.source).stem().string() : trace.source;
  return fmt::format("{}_{}_load{:.2f}", fabric, t, trace.load);
}

PriorityPolicy parse_policy(const std::string& s) {
  if (s == "fcfs" || s == "FCFS") return PriorityPolicy::kFcfs;
  if (s == "srpt" || s == "SRPT") return PriorityPolicy::kSrpt;
  throw std::invalid_argument("unknown policy '" + s + "' (fcfs or srpt)");
}

std::vector<fabric::Request> build_trace(const ExperimentSpec& spec) {
  const auto& t = spec.trace;
  if (t.source == "all-to-all") {
    workload::AllToAllSpec a;
    a.load = t.load;
    a.read_fraction = t.read_fraction;
    a.size = t.size;
    a.duration = spec.duration;
    a.seed = spec.seed;
    return workload::gen_all_to_all(spec.cluster, a);
  }
  if (is_kv(t.source)) {
    workload::KvSpec k;
    k.workload = workload::parse_kv_workload(t.source.substr(3));
    k.ops = t.kv_ops;
    k.load = t.load;
    k.seed = spec.seed;
    return workload::gen_kv_profile(spec.cluster, k);
  }
  if (!t.is_file()) {
    const auto prof = workload::CdfProfile::load(workload::default_profile_dir() / (t.source + ".csv"));
    workload::ProfileSpec p;
    p.load = t.load;
    p.read_fraction = t.read_fraction;
    p.duration = spec.duration;
    p.seed = spec.seed;
    return workload::gen_profile_trace(spec.cluster, prof, p);
  }
  std::ifstream in(t.source);
  if (!in) throw std::runtime_error("cannot open trace " + t.source);
  workload::TraceHeader h;
  auto reqs = workload::read_trace_csv(in, &h);
  for (const auto& r : reqs)
    if (r.src.value() >= spec.cluster.n_ports || r.dst.value() >= spec.cluster.n_ports)
      throw std::runtime_error(t.source + ": port beyond cluster size " + std::to_string(spec.cluster.n_ports));
  return reqs;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) { return run_experiment(spec, build_trace(spec)); }

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::vector<fabric::Request>& trace) {
  spec.cluster.validate();
  auto f = baselines::make_fabric(spec.fabric, spec.cluster);
  const SimTime bucket =
      spec.utilization_bucket.ps() > 0 ? spec.utilization_bucket : SimTime(std::max<std::int64_t>(1, spec.duration.ps() / 100));
  f->enable_utilization(bucket);

  const SimTime last = trace.empty() ? SimTime{} : trace.back().arrival;
  const bool drained = fabric::run_requests(*f, trace, last + spec.drain);

  ExperimentResult r;
  r.fabric = spec.fabric;
  r.trace = spec.trace.source;
  r.load = spec.trace.load;
  r.seed = spec.seed;
  r.counters = f->counters();
  r.submitted = r.counters.submitted;
  r.completed = r.counters.completed;
  r.offered_load = workload::measured_offered_load(spec.cluster, trace);
  const auto& log = f->completions().records();
  r.latency = latency_by_kind(log);
  auto sd = normalized_mct(log, *f);
  r.slowdown_skipped = sd.skipped;
  r.unloaded_read_ns = f->ideal_mct(MessageKind::kRreq, spec.trace.size).ns();
  r.unloaded_write_ns = f->ideal_mct(MessageKind::kWreq, spec.trace.size).ns();

  if (!drained) r.violations.push_back(fmt::format("{} of {} requests incomplete", r.submitted - r.completed, trace.size()));
  const auto below = std::count_if(sd.values.begin(), sd.values.end(), [](double x) { return x < 1.0 - 1e-9; });
  if (below > 0) r.violations.push_back(fmt::format("{} messages faster than their unloaded ideal", below));
  r.slowdown = summarize(std::move(sd.values));

  auto* edm = dynamic_cast<fabric::EdmFabric*>(f.get());
  if (edm != nullptr) {
    const auto& st = edm->fabric_switch().scheduler().stats();
    r.mean_iterations = st.rounds == 0 ? 0.0 : static_cast<double>(st.iteration_sum) / static_cast<double>(st.rounds);
    const int n = spec.cluster.n_ports;
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d) {
        const auto& a = edm->fabric_switch().audit(PortId(static_cast<std::uint16_t>(s)), PortId(static_cast<std::uint16_t>(d)));
        if (a.forwarded > a.granted)
          r.violations.push_back(fmt::format("pair {}->{} forwarded {} B over {} B granted", s, d, a.forwarded, a.granted));
      }
  }

  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    write_file(spec.out / "completions.csv", [&](std::ostream& os) { f->completions().write_csv(os, f->name()); });
    write_file(spec.out / "utilization.csv", [&](std::ostream& os) { write_utilization_csv(os, utilization(*f)); });
    if (edm != nullptr)
      write_file(spec.out / "audit.csv", [&](std::ostream& os) { edm->fabric_switch().write_audit_csv(os); });
    write_file(spec.out / "spec.ini", [&](std::ostream& os) { write_experiment_ini(os, spec); });
    write_file(spec.out / "summary.json", [&](std::ostream& os) { os << summary_json(spec, r) << '\n'; });
  }
  return r;
}

std::vector<ExperimentResult> run_sweep(const std::vector<ExperimentSpec>& cells, int threads) {
  std::vector<ExperimentResult> out(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        out[i] = run_experiment(cells[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(1, cells.size())));
  std::vector<std::jthread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<ExperimentResult>& rows) {
  os << "fabric,trace,load,seed,submitted,completed,offered_load,read_mean_ns,read_p99_ns,write_mean_ns,write_p99_ns,"
        "unloaded_read_ns,unloaded_write_ns,slowdown_mean,slowdown_p50,slowdown_p99,slowdown_skipped,ok\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{:.3f},{},{},{},{:.4f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{:.5f},{:.5f},{:.5f},{},{}\n",
                      r.fabric, r.trace, r.load, r.seed, r.submitted, r.completed, r.offered_load, r.latency.read_ns.mean,
                      r.latency.read_ns.p99, r.latency.write_ns.mean, r.latency.write_ns.p99, r.unloaded_read_ns,
                      r.unloaded_write_ns, r.slowdown.mean, r.slowdown.p50, r.slowdown.p99, r.slowdown_skipped,
                      r.ok() ? 1 : 0);
}

std::string summary_json(const ExperimentSpec& spec, const ExperimentResult& r) {
  nlohmann::json j;
  j["fabric"] = r.fabric;
  j["trace"] = r.trace;
  j["load"] = r.load;
  j["seed"] = r.seed;
  j["nodes"] = spec.cluster.n_ports;
  j["link_gbps"] = spec.cluster.link_gbps;
  j["chunk_bytes"] = spec.cluster.chunk_bytes;
  j["max_notifications"] = spec.cluster.max_active_notifications;
  j["policy"] = policy_name(spec.cluster.priority_policy);
  j["duration_ns"] = spec.duration.ns();
  j["submitted"] = r.submitted;
  j["completed"] = r.completed;
  j["offered_load"] = r.offered_load;
  j["latency_ns"] = {{"read", summary_to_json(r.latency.read_ns)},
                     {"write", summary_to_json(r.latency.write_ns)},
                     {"all", summary_to_json(r.latency.all_ns)}};
  j["unloaded_ns"] = {{"read", r.unloaded_read_ns}, {"write", r.unloaded_write_ns}};
  j["slowdown"] = summary_to_json(r.slowdown);
  j["slowdown"]["skipped"] = r.slowdown_skipped;
  j["counters"] = {{"drops", r.counters.drops},         {"retransmits", r.counters.retransmits},
                   {"timeouts", r.counters.timeouts},   {"pauses", r.counters.pauses},
                   {"max_egress_data_blocks", r.counters.max_egress_data_blocks}};
  if (r.fabric == "edm") j["mean_matching_iterations"] = r.mean_iterations;
  j["violations"] = r.violations;
  return j.dump(2);
}

// ---- INI -----------------------------------------------------------------------

namespace {

struct IniCursor {
  const std::string& file;
  int line;
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(fmt::format("{}:{}: {}", file, line, what));
  }
  double num(const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) fail("trailing characters in number '" + v + "'");
      return x;
    } catch (const std::logic_error&) {
      fail("expected a number, got '" + v + "'");
    }
  }
  std::int64_t integer(const std::string& v) const {
    const double x = num(v);
    if (x != std::floor(x)) fail("expected an integer, got '" + v + "'");
    return static_cast<std::int64_t>(x);
  }
  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("expected a boolean, got '" + v + "'");
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentSpec parse_experiment_ini(std::istream& is, const std::string& filename, ExperimentSpec spec) {
  using Setter = std::function<void(const IniCursor&, const std::string&)>;
  auto& c = spec.cluster;
  const std::map<std::string, Setter> keys{
      {"experiment.fabric", [&](auto&, auto& v) { spec.fabric = v; }},
      {"experiment.duration_ms", [&](auto& k, auto& v) { spec.duration = SimTime::from_ns(k.num(v) * 1e6); }},
      {"experiment.seed", [&](auto& k, auto& v) { spec.seed = static_cast<std::uint64_t>(k.integer(v)); }},
      {"experiment.out", [&](auto&, auto& v) { spec.out = v; }},
      {"experiment.drain_ms", [&](auto& k, auto& v) { spec.drain = SimTime::from_ns(k.num(v) * 1e6); }},
      {"cluster.nodes", [&](auto& k, auto& v) { c.n_ports = static_cast<int>(k.integer(v)); }},
      {"cluster.link_gbps", [&](auto& k, auto& v) { c.link_gbps = k.num(v); }},
      {"cluster.chunk_bytes", [&](auto& k, auto& v) { c.chunk_bytes = static_cast<std::uint32_t>(k.integer(v)); }},
      {"cluster.max_notifications", [&](auto& k, auto& v) { c.max_active_notifications = static_cast<int>(k.integer(v)); }},
      {"cluster.scheduler_clock_ghz", [&](auto& k, auto& v) { c.scheduler_clock_ghz = k.num(v); }},
      {"cluster.policy",
       [&](auto& k, auto& v) {
         try {
           c.priority_policy = parse_policy(v);
         } catch (const std::invalid_argument& e) {
           k.fail(e.what());
         }
       }},
      {"latency.cycle_ns", [&](auto& k, auto& v) { c.latency.cycle_ns = k.num(v); }},
      {"latency.pcs_ns", [&](auto& k, auto& v) { c.latency.pcs_fixed_ns = k.num(v); }},
      {"latency.pma_pmd_ns", [&](auto& k, auto& v) { c.latency.pma_pmd_transceiver_ns = k.num(v); }},
      {"latency.propagation_ns", [&](auto& k, auto& v) { c.latency.propagation_ns = k.num(v); }},
      {"latency.dram_ns", [&](auto& k, auto& v) { c.latency.dram_ns = k.num(v); }},
      {"endpoint.compute_fraction", [&](auto& k, auto& v) { c.endpoint.compute_fraction = k.num(v); }},
      {"endpoint.rx_drain_gbps", [&](auto& k, auto& v) { c.endpoint.rx_drain_gbps = k.num(v); }},
      {"endpoint.pause_threshold_bdp", [&](auto& k, auto& v) { c.endpoint.pause_threshold_bdp = k.num(v); }},
      {"endpoint.read_timeout_us", [&](auto& k, auto& v) { c.endpoint.read_timeout_us = k.num(v); }},
      {"endpoint.batch_writes", [&](auto& k, auto& v) { c.endpoint.batch_writes = k.boolean(v); }},
      {"endpoint.functional_memory", [&](auto& k, auto& v) { c.endpoint.functional_memory = k.boolean(v); }},
      {"trace.source", [&](auto&, auto& v) { spec.trace.source = v; }},
      {"trace.load", [&](auto& k, auto& v) { spec.trace.load = k.num(v); }},
      {"trace.read_fraction", [&](auto& k, auto& v) { spec.trace.read_fraction = k.num(v); }},
      {"trace.size", [&](auto& k, auto& v) { spec.trace.size = static_cast<std::uint32_t>(k.integer(v)); }},
      {"trace.kv_ops", [&](auto& k, auto& v) { spec.trace.kv_ops = static_cast<std::uint64_t>(k.integer(v)); }},
  };

  std::string section;
  std::string raw;
  IniCursor cur{filename, 0};
  while (std::getline(is, raw)) {
    ++cur.line;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') cur.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) cur.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) cur.fail("key '" + key + "' outside any section");
    const auto it = keys.find(section + "." + key);
    if (it == keys.end()) cur.fail("unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) cur.fail("empty value for '" + key + "'");
    it->second(cur, value);
  }
  try {
    spec.cluster.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(filename + ": " + e.what());
  }
  if (!(spec.trace.load >= 0 && spec.trace.load <= 1)) throw std::runtime_error(filename + ": trace load must be in [0, 1]");
  return spec;
}

ExperimentSpec load_experiment_ini(const std::filesystem::path& path, ExperimentSpec base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_experiment_ini(in, path.string(), std::move(base));
}

void write_experiment_ini(std::ostream& os, const ExperimentSpec& s) {
  const auto& c = s.cluster;
  os << "[experiment]\n"
     << "fabric = " << s.fabric << '\n'
     << fmt::format("duration_ms = {}\n", s.duration.ns() / 1e6) << "seed = " << s.seed << '\n'
     << fmt::format("drain_ms = {}\n", s.drain.ns() / 1e6) << "\n[cluster]\n"
     << "nodes = " << c.n_ports << '\n'
     << fmt::format("link_gbps = {}\n", c.link_gbps) << "chunk_bytes = " << c.chunk_bytes << '\n'
     << "max_notifications = " << c.max_active_notifications << '\n'
     << fmt::format("scheduler_clock_ghz = {}\n", c.scheduler_clock_ghz) << "policy = " << policy_name(c.priority_policy)
     << "\n\n[latency]\n"
     << fmt::format("cycle_ns = {}\npcs_ns = {}\npma_pmd_ns = {}\npropagation_ns = {}\ndram_ns = {}\n", c.latency.cycle_ns,
                    c.latency.pcs_fixed_ns, c.latency.pma_pmd_transceiver_ns, c.latency.propagation_ns, c.latency.dram_ns)
     << "\n[endpoint]\n"
     << fmt::format("compute_fraction = {}\nrx_drain_gbps = {}\npause_threshold_bdp = {}\nread_timeout_us = {}\n",
                    c.endpoint.compute_fraction, c.endpoint.rx_drain_gbps, c.endpoint.pause_threshold_bdp,
                    c.endpoint.read_timeout_us)
     << "batch_writes = " << (c.endpoint.batch_writes ? "true" : "false") << '\n'
     << "functional_memory = " << (c.endpoint.functional_memory ? "true" : "false") << "\n\n[trace]\n"
     << "source = " << s.trace.source << '\n'
     << fmt::format("load = {}\nread_fraction = {}\n", s.trace.load, s.trace.read_fraction) << "size = " << s.trace.size
     << '\n'
     << "kv_ops = " << s.trace.kv_ops << '\n';
}

}  // namespace edm::metrics
