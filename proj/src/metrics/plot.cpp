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

#include "edm/metrics/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace edm::metrics {

namespace {

constexpr double kW = 720;
constexpr double kH = 440;
constexpr double kLeft = 70;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      default: o += ch;
    }
  }
  return o;
}

// 1-2-5 tick step covering `span` in about five ticks.
double tick_step(double span) {
  if (span <= 0) return 1;
  const double raw = span / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10 * mag;
}

struct Row {
  std::map<std::string, std::string> f;
  double num(const std::string& k) const { return std::stod(f.at(k)); }
};

std::vector<Row> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return {};
  std::string line;
  std::vector<std::string> head;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string x;
    while (std::getline(ss, x, ',')) out.push_back(x);
    return out;
  };
  if (!std::getline(in, line)) return {};
  head = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto v = split(line);
    if (v.size() != head.size()) throw std::runtime_error(p.string() + ": ragged row");
    Row r;
    for (std::size_t i = 0; i < v.size(); ++i) r.f[head[i]] = v[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::string render_svg(const Chart& c) {
  const bool bars = !c.categories.empty();
  double xmin = 0, xmax = 1, ymin = 0, ymax = 0;
  bool any = false;
  for (const auto& s : c.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        xmin = xmax = s.x[i];
        any = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  ymax = std::max(ymax, c.y_reference);
  if (bars) {
    xmin = -0.5;
    xmax = static_cast<double>(c.categories.size()) - 0.5;
  } else if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  const double ystep = tick_step(ymax - ymin);
  ymax = std::max(ystep, std::ceil(ymax / ystep) * ystep);
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)", kW, kH)
    << '\n';
  o << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", kW, kH) << '\n';
  o << fmt::format(R"(<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>)", kLeft + pw / 2, esc(c.title)) << '\n';
  for (double y = ymin; y <= ymax + 1e-9; y += ystep) {
    o << fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="#ddd"/>)", kLeft, Y(y), kLeft + pw, Y(y)) << '\n';
    o << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="end">{:g}</text>)", kLeft - 6, Y(y) + 4, y) << '\n';
  }
  if (bars) {
    for (std::size_t i = 0; i < c.categories.size(); ++i)
      o << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)", X(static_cast<double>(i)), kTop + ph + 18,
                       esc(c.categories[i]))
        << '\n';
  } else {
    const double xstep = tick_step(xmax - xmin);
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep)
      o << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{:g}</text>)", X(x), kTop + ph + 18, x) << '\n';
  }
  o << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", kLeft, kTop, pw, ph) << '\n';
  o << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)", kLeft + pw / 2, kH - 15, esc(c.x_label)) << '\n';
  o << fmt::format(R"svg(<text transform="translate(18,{:.1f}) rotate(-90)" text-anchor="middle">{}</text>)svg", kTop + ph / 2,
                   esc(c.y_label))
    << '\n';
  if (c.y_reference > 0)
    o << fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="#555" stroke-dasharray="5,4"/>)", kLeft,
                     Y(c.y_reference), kLeft + pw, Y(c.y_reference))
      << '\n';

  const double group = 0.8;
  const double bw = c.series.empty() ? group : group / static_cast<double>(c.series.size());
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& s = c.series[k];
    const char* color = kColors[k % std::size(kColors)];
    if (bars) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double left = s.x[i] - group / 2 + bw * static_cast<double>(k);
        o << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="{}"/>)", X(left), Y(s.y[i]),
                         X(left + bw) - X(left), Y(ymin) - Y(s.y[i]), color)
          << '\n';
      }
    } else {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) pts += fmt::format("{:.1f},{:.1f} ", X(s.x[i]), Y(s.y[i]));
      o << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>)", pts, color) << '\n';
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="3" fill="{}"/>)", X(s.x[i]), Y(s.y[i]), color) << '\n';
    }
    const double ly = kTop + 12 + 18 * static_cast<double>(k);
    o << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="12" height="12" fill="{}"/>)", kLeft + pw + 14, ly - 10, color) << '\n';
    o << fmt::format(R"(<text x="{:.1f}" y="{:.1f}">{}</text>)", kLeft + pw + 32, ly, esc(s.name)) << '\n';
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> emit_plots(const std::filesystem::path& dir) {
  std::vector<std::string> warnings;
  const auto rows = read_csv(dir / "sweep.csv");
  if (rows.empty()) {
    warnings.push_back("no sweep.csv rows in " + dir.string() + "; nothing plotted");
    return warnings;
  }

  // Panel a: all-to-all latency relative to unloaded, per fabric and kind.
  {
    std::map<std::string, std::vector<std::tuple<double, double, double>>> by_fabric;
    for (const auto& r : rows)
      if (r.f.at("trace") == "all-to-all")
        by_fabric[r.f.at("fabric")].emplace_back(r.num("load"), r.num("read_mean_ns") / r.num("unloaded_read_ns"),
                                                 r.num("write_mean_ns") / r.num("unloaded_write_ns"));
    if (by_fabric.empty()) {
      warnings.push_back("no all-to-all rows; latency-vs-load figure skipped");
    } else {
      Chart c{"Mean latency relative to unloaded", "offered load", "latency / unloaded", {}, {}, 0};
      std::ofstream csv(dir / "latency_vs_load.csv");
      csv << "fabric,load,read_ratio,write_ratio\n";
      for (auto& [fab, pts] : by_fabric) {
        std::sort(pts.begin(), pts.end());
        Series rd{fab + " read", {}, {}}, wr{fab + " write", {}, {}};
        for (const auto& [x, r, w] : pts) {
          csv << fmt::format("{},{:.3f},{:.5f},{:.5f}\n", fab, x, r, w);
          rd.x.push_back(x);
          rd.y.push_back(r);
          wr.x.push_back(x);
          wr.y.push_back(w);
        }
        c.series.push_back(std::move(rd));
        c.series.push_back(std::move(wr));
      }
      std::ofstream(dir / "latency_vs_load.svg") << render_svg(c);
    }
  }

  // Panel b: mean slowdown per workload at each workload's highest load.
  {
    std::map<std::string, double> top_load;
    for (const auto& r : rows)
      if (r.f.at("trace") != "all-to-all") top_load[r.f.at("trace")] = std::max(top_load[r.f.at("trace")], r.num("load"));
    if (top_load.empty()) {
      warnings.push_back("no workload rows; slowdown figure skipped");
      return warnings;
    }
    Chart c{"Normalized message completion time", "workload", "mean slowdown", {}, {}, 1.0};
    std::map<std::string, std::size_t> cat;
    for (const auto& [t, l] : top_load) {
      cat[t] = c.categories.size();
      c.categories.push_back(t);
    }
    std::map<std::string, Series> series;
    std::ofstream csv(dir / "slowdown_by_workload.csv");
    csv << "fabric,trace,load,slowdown_mean,slowdown_p99\n";
    for (const auto& r : rows) {
      const auto& t = r.f.at("trace");
      if (t == "all-to-all" || r.num("load") != top_load[t]) continue;
      auto& s = series[r.f.at("fabric")];
      s.name = r.f.at("fabric");
      s.x.push_back(static_cast<double>(cat[t]));
      s.y.push_back(r.num("slowdown_mean"));
      csv << fmt::format("{},{},{},{},{}\n", r.f.at("fabric"), t, r.f.at("load"), r.f.at("slowdown_mean"), r.f.at("slowdown_p99"));
    }
    for (auto& [n, s] : series) c.series.push_back(std::move(s));
    std::ofstream(dir / "slowdown_by_workload.svg") << render_svg(c);
  }
  return warnings;
}

}  // namespace edm::metrics
