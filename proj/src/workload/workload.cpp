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

#include "edm/workload/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "edm/phy/codec.hpp"
#include "edm/sim/rng.hpp"

#ifndef EDM_DATA_DIR
#define EDM_DATA_DIR "data"
#endif

namespace edm::workload {

namespace {

// Addresses stay inside the inline-address window so requests are one block.
constexpr std::uint64_t kAddrSpan = phy::kInlineAddrLimit - 65536;
constexpr std::uint64_t kGeneratorStream = std::uint64_t{1} << 40;

std::uint64_t random_addr(std::mt19937_64& rng) { return (rng() % (kAddrSpan / 64)) * 64; }

double chunk_blocks_sum(MessageKind data_kind, std::uint32_t size, std::uint32_t chunk) {
  double blocks = 0;
  for (std::uint32_t off = 0; off < size; off += chunk) {
    const std::uint32_t len = std::min(chunk, size - off);
    blocks += static_cast<double>(phy::memory_block_count(data_kind, len, 0, off, off + len == size));
  }
  return blocks;
}

std::uint32_t chunk_count(std::uint32_t size, std::uint32_t chunk) { return size == 0 ? 1 : (size + chunk - 1) / chunk; }

}  // namespace

Roles Roles::split(int n_ports, double compute_fraction) {
  if (n_ports < 2) throw std::invalid_argument("need at least two ports");
  if (!(compute_fraction > 0 && compute_fraction <= 1)) throw std::invalid_argument("compute_fraction must be in (0, 1]");
  Roles r;
  if (compute_fraction >= 1.0) {
    for (int p = 0; p < n_ports; ++p) {
      r.compute.emplace_back(static_cast<std::uint16_t>(p));
      r.memory.emplace_back(static_cast<std::uint16_t>(p));
    }
    return r;
  }
  int nc = static_cast<int>(std::lround(n_ports * compute_fraction));
  nc = std::clamp(nc, 1, n_ports - 1);
  for (int p = 0; p < n_ports; ++p) (p < nc ? r.compute : r.memory).emplace_back(static_cast<std::uint16_t>(p));
  return r;
}

bool Roles::overlapping() const { return !compute.empty() && !memory.empty() && compute.front() == memory.front(); }

DirectionalBlocks message_blocks(MessageKind kind, std::uint32_t size, std::uint32_t chunk, std::uint64_t addr) {
  DirectionalBlocks b;
  switch (kind) {
    case MessageKind::kRreq:
    case MessageKind::kRmwreq: {
      const bool rmw = kind == MessageKind::kRmwreq;
      const std::uint32_t resp = rmw ? 8 : size;
      const double req = static_cast<double>(
          phy::memory_block_count(kind, rmw ? kRmwArgBytes : size, addr));
      const double data = chunk_blocks_sum(MessageKind::kRres, resp, chunk);
      b.src_up = req;
      b.dst_down = req + (chunk_count(resp, chunk) - 1);
      b.dst_up = data;
      b.src_down = data;
      break;
    }
    case MessageKind::kWreq: {
      const double data = chunk_blocks_sum(MessageKind::kWreq, size, chunk);
      b.src_up = 1 + data;
      b.src_down = chunk_count(size, chunk);
      b.dst_down = data;
      b.dst_up = 0;
      break;
    }
    case MessageKind::kRres:
      throw std::invalid_argument("responses are not generated");
  }
  return b;
}

double arrival_rate_per_ns(const ClusterConfig& cfg, const Roles& roles, const DirectionalBlocks& m, double load) {
  const double slot_ns = cfg.slot().ns();
  double busiest;
  if (roles.overlapping()) {
    busiest = std::max(m.src_up + m.dst_up, m.src_down + m.dst_down);
  } else {
    const double fan = static_cast<double>(roles.compute.size()) / static_cast<double>(roles.memory.size());
    busiest = std::max({m.src_up, m.src_down, fan * m.dst_up, fan * m.dst_down});
  }
  return load / (busiest * slot_ns);
}

// ---- CDF profiles --------------------------------------------------------------

CdfProfile::CdfProfile(std::string name, std::vector<Knot> knots) : name_(std::move(name)), knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("profile " + name_ + " has no knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& k = knots_[i];
    if (!(k.size >= 1) || k.size > kMaxWireSize) throw std::invalid_argument("profile " + name_ + ": size out of range");
    if (!(k.p > 0) || k.p > 1) throw std::invalid_argument("profile " + name_ + ": probability out of range");
    if (i > 0 && (k.p <= knots_[i - 1].p || k.size <= knots_[i - 1].size))
      throw std::invalid_argument("profile " + name_ + ": knots must increase strictly");
  }
  if (std::abs(knots_.back().p - 1.0) > 1e-12) throw std::invalid_argument("profile " + name_ + ": must end at 1.0");
  knots_.back().p = 1.0;
}

CdfProfile CdfProfile::parse(std::istream& is, std::string name) {
  std::vector<Knot> knots;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Knot k{};
    char comma = 0;
    if (!(ss >> k.size >> comma >> k.p) || comma != ',')
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected size,probability");
    knots.push_back(k);
  }
  return CdfProfile(std::move(name), std::move(knots));
}

CdfProfile CdfProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile " + path.string());
  return parse(in, path.stem().string());
}

std::uint32_t CdfProfile::quantile(double u) const {
  if (u <= knots_.front().p) return static_cast<std::uint32_t>(std::ceil(knots_.front().size));
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const Knot& a = knots_[i - 1];
    const Knot& b = knots_[i];
    if (u <= b.p) {
      const double t = (u - a.p) / (b.p - a.p);
      const double s = std::exp(std::log(a.size) + t * (std::log(b.size) - std::log(a.size)));
      return static_cast<std::uint32_t>(std::min(std::ceil(s - 1e-9), b.size));
    }
  }
  return static_cast<std::uint32_t>(knots_.back().size);
}

std::uint32_t CdfProfile::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return quantile(u(rng));
}

double CdfProfile::cdf(double size) const {
  if (size < knots_.front().size) return 0.0;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const Knot& a = knots_[i - 1];
    const Knot& b = knots_[i];
    if (size < b.size) return a.p + (b.p - a.p) * std::log(size / a.size) / std::log(b.size / a.size);
  }
  return 1.0;
}

double CdfProfile::mean() const {
  double m = knots_.front().p * knots_.front().size;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const Knot& a = knots_[i - 1];
    const Knot& b = knots_[i];
    // Size is exp-uniform on [a, b] with mass (b.p - a.p).
    m += (b.p - a.p) * (b.size - a.size) / std::log(b.size / a.size);
  }
  return m;
}

const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names{"hadoop-sort", "spark-sort", "spark-sql", "graphlab", "memcached"};
  return names;
}

std::filesystem::path default_profile_dir() {
  if (const char* env = std::getenv("EDM_DATA_DIR")) return std::filesystem::path(env) / "profiles";
  return std::filesystem::path(EDM_DATA_DIR) / "profiles";
}

// ---- generators ----------------------------------------------------------------

namespace {

// Merges independent per-source Poisson processes in time order.
template <typename MakeRecord>
std::vector<TraceRecord> poisson_merge(const Roles& roles, double rate_per_ns, SimTime duration, std::uint64_t seed,
                                       std::uint64_t max_records, MakeRecord&& make) {
  std::vector<TraceRecord> out;
  if (rate_per_ns <= 0) return out;
  struct Src {
    std::mt19937_64 rng;
    double next_ns;
    PortId id;
  };
  std::vector<Src> srcs;
  std::exponential_distribution<double> gap(rate_per_ns);
  for (PortId p : roles.compute) {
    Src s{sim::component_rng(seed, p.value()), 0.0, p};
    s.next_ns = gap(s.rng);
    srcs.push_back(std::move(s));
  }
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t i = 0; i < srcs.size(); ++i) heap.emplace(srcs[i].next_ns, i);
  const double end = duration.ns();
  while (!heap.empty() && out.size() < max_records) {
    const auto [t, i] = heap.top();
    heap.pop();
    if (t >= end) continue;
    Src& s = srcs[i];
    TraceRecord r = make(s.rng, s.id);
    r.arrival = SimTime::from_ns(t);
    r.src = s.id;
    out.push_back(std::move(r));
    s.next_ns = t + gap(s.rng);
    heap.emplace(s.next_ns, i);
  }
  return out;
}

PortId pick_destination(std::mt19937_64& rng, const Roles& roles, PortId self) {
  for (;;) {
    const PortId d = roles.memory[rng() % roles.memory.size()];
    if (d != self) return d;
  }
}

}  // namespace

std::vector<TraceRecord> gen_all_to_all(const ClusterConfig& cfg, const AllToAllSpec& spec) {
  if (spec.load < 0 || spec.load > 1) throw std::invalid_argument("load must be in [0, 1]");
  if (spec.read_fraction < 0 || spec.read_fraction > 1) throw std::invalid_argument("read fraction must be in [0, 1]");
  if (spec.load == 0) return {};
  const Roles roles = Roles::split(cfg.n_ports, cfg.endpoint.compute_fraction);
  const auto rd = message_blocks(MessageKind::kRreq, spec.size, cfg.chunk_bytes);
  const auto wr = message_blocks(MessageKind::kWreq, spec.size, cfg.chunk_bytes);
  const double f = spec.read_fraction;
  const DirectionalBlocks mean{f * rd.src_up + (1 - f) * wr.src_up, f * rd.src_down + (1 - f) * wr.src_down,
                               f * rd.dst_up + (1 - f) * wr.dst_up, f * rd.dst_down + (1 - f) * wr.dst_down};
  const double rate = arrival_rate_per_ns(cfg, roles, mean, spec.load);
  std::bernoulli_distribution is_read(f);
  return poisson_merge(roles, rate, spec.duration, spec.seed, UINT64_MAX, [&](std::mt19937_64& rng, PortId self) {
    TraceRecord r;
    r.kind = is_read(rng) ? MessageKind::kRreq : MessageKind::kWreq;
    r.dst = pick_destination(rng, roles, self);
    r.size = spec.size;
    r.addr = random_addr(rng);
    return r;
  });
}

std::vector<TraceRecord> gen_profile_trace(const ClusterConfig& cfg, const CdfProfile& profile, const ProfileSpec& spec) {
  if (spec.load < 0 || spec.load > 1) throw std::invalid_argument("load must be in [0, 1]");
  if (spec.load == 0) return {};
  const Roles roles = Roles::split(cfg.n_ports, cfg.endpoint.compute_fraction);
  // Mean block footprint estimated from a fixed side stream of samples.
  auto est = sim::component_rng(spec.seed, kGeneratorStream);
  DirectionalBlocks mean;
  constexpr int kSamples = 20000;
  for (int i = 0; i < kSamples; ++i) {
    const std::uint32_t sz = profile.sample(est);
    const auto rd = message_blocks(MessageKind::kRreq, sz, cfg.chunk_bytes);
    const auto wr = message_blocks(MessageKind::kWreq, sz, cfg.chunk_bytes);
    const double f = spec.read_fraction;
    mean.src_up += f * rd.src_up + (1 - f) * wr.src_up;
    mean.src_down += f * rd.src_down + (1 - f) * wr.src_down;
    mean.dst_up += f * rd.dst_up + (1 - f) * wr.dst_up;
    mean.dst_down += f * rd.dst_down + (1 - f) * wr.dst_down;
  }
  mean.src_up /= kSamples;
  mean.src_down /= kSamples;
  mean.dst_up /= kSamples;
  mean.dst_down /= kSamples;
  const double rate = arrival_rate_per_ns(cfg, roles, mean, spec.load);
  std::bernoulli_distribution is_read(spec.read_fraction);
  return poisson_merge(roles, rate, spec.duration, spec.seed, UINT64_MAX, [&](std::mt19937_64& rng, PortId self) {
    TraceRecord r;
    r.kind = is_read(rng) ? MessageKind::kRreq : MessageKind::kWreq;
    r.dst = pick_destination(rng, roles, self);
    r.size = profile.sample(rng);
    r.addr = random_addr(rng);
    return r;
  });
}

double write_fraction(KvWorkload w) {
  switch (w) {
    case KvWorkload::kA:
      return 0.50;
    case KvWorkload::kB:
      return 0.05;
    case KvWorkload::kF:
      return 0.33;
  }
  return 0;
}

KvWorkload parse_kv_workload(const std::string& s) {
  if (s == "A" || s == "a") return KvWorkload::kA;
  if (s == "B" || s == "b") return KvWorkload::kB;
  if (s == "F" || s == "f") return KvWorkload::kF;
  throw std::invalid_argument("unknown key-value workload " + s);
}

std::vector<TraceRecord> gen_kv_profile(const ClusterConfig& cfg, const KvSpec& spec) {
  const Roles roles = Roles::split(cfg.n_ports, cfg.endpoint.compute_fraction);
  const double wf = write_fraction(spec.workload);
  const auto rd = message_blocks(MessageKind::kRreq, kKvReadBytes, cfg.chunk_bytes);
  const auto wr = message_blocks(MessageKind::kWreq, kKvWriteBytes, cfg.chunk_bytes);
  const DirectionalBlocks mean{(1 - wf) * rd.src_up + wf * wr.src_up, (1 - wf) * rd.src_down + wf * wr.src_down,
                               (1 - wf) * rd.dst_up + wf * wr.dst_up, (1 - wf) * rd.dst_down + wf * wr.dst_down};
  const double rate = arrival_rate_per_ns(cfg, roles, mean, spec.load);
  std::bernoulli_distribution is_write(wf);
  // Long enough for `ops` arrivals; the record cap ends the stream.
  const double per_source = static_cast<double>(spec.ops) / static_cast<double>(roles.compute.size());
  const SimTime horizon = SimTime::from_ns(std::max(1.0, 4.0 * (per_source + 10.0) / rate));
  return poisson_merge(roles, rate, horizon, spec.seed, spec.ops, [&](std::mt19937_64& rng, PortId self) {
    TraceRecord r;
    const bool w = is_write(rng);
    r.kind = w ? MessageKind::kWreq : MessageKind::kRreq;
    r.size = w ? kKvWriteBytes : kKvReadBytes;
    r.dst = pick_destination(rng, roles, self);
    r.addr = random_addr(rng);
    return r;
  });
}

double measured_offered_load(const ClusterConfig& cfg, const std::vector<TraceRecord>& trace) {
  if (trace.empty()) return 0.0;
  std::vector<double> up(static_cast<std::size_t>(cfg.n_ports), 0.0), down(up);
  for (const auto& r : trace) {
    const auto b = message_blocks(r.kind, r.size, cfg.chunk_bytes, r.addr);
    up[r.src.value()] += b.src_up;
    down[r.src.value()] += b.src_down;
    up[r.dst.value()] += b.dst_up;
    down[r.dst.value()] += b.dst_down;
  }
  const double busiest = std::max(*std::max_element(up.begin(), up.end()), *std::max_element(down.begin(), down.end()));
  const double span_ns = trace.back().arrival.ns();
  return span_ns <= 0 ? 0.0 : busiest * cfg.slot().ns() / span_ns;
}

// ---- trace CSV -------------------------------------------------------------------

void write_trace_csv(std::ostream& os, const TraceHeader& h, const std::vector<TraceRecord>& trace) {
  os << "# profile,seed,n_ports,link_gbps\n";
  os << "# " << h.profile << ',' << h.seed << ',' << h.n_ports << ',' << h.link_gbps << '\n';
  os << "# load counts 66-bit PHY blocks on the busiest link direction\n";
  os << "arrival_ps,src,dst,kind,size_bytes\n";
  for (const auto& r : trace)
    os << r.arrival.ps() << ',' << r.src.value() << ',' << r.dst.value() << ',' << to_string(r.kind) << ',' << r.size
       << '\n';
}

std::vector<TraceRecord> read_trace_csv(std::istream& is, TraceHeader* header) {
  std::vector<TraceRecord> out;
  std::string line;
  int lineno = 0;
  int comment_lines = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      ++comment_lines;
      if (comment_lines == 2 && header != nullptr) {
        std::istringstream ss(line.substr(1));
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() == 4) {
          header->profile = fields[0].substr(fields[0].find_first_not_of(' '));
          header->seed = std::stoull(fields[1]);
          header->n_ports = std::stoi(fields[2]);
          header->link_gbps = std::stod(fields[3]);
        }
      }
      continue;
    }
    if (line.rfind("arrival_ps", 0) == 0) continue;
    std::istringstream ss(line);
    std::string f[5];
    for (auto& x : f)
      if (!std::getline(ss, x, ',')) fail("expected 5 fields");
    TraceRecord r;
    try {
      r.arrival = SimTime::from_ps(std::stoll(f[0]));
      r.src = PortId(static_cast<std::uint16_t>(std::stoul(f[1])));
      r.dst = PortId(static_cast<std::uint16_t>(std::stoul(f[2])));
      const long long size = std::stoll(f[4]);
      if (size < 1 || size > kMaxWireSize) fail("size out of range");
      r.size = static_cast<std::uint32_t>(size);
    } catch (const std::logic_error&) {
      fail("malformed number");
    }
    const auto k = parse_message_kind(f[3]);
    if (!k || *k == MessageKind::kRres) fail("bad kind '" + f[3] + "'");
    r.kind = *k;
    if (r.kind == MessageKind::kRmwreq) r.opcode = RmwOpcode::kFetchAdd;
    if (!out.empty() && r.arrival < out.back().arrival) fail("arrivals not sorted");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace edm::workload
