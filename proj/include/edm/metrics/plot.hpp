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

#include <filesystem>
#include <string>
#include <vector>

namespace edm::metrics {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;  // bar chart when non-empty: x holds category indices
  std::vector<Series> series;
  double y_reference = 0;  // dashed horizontal line when positive
};

std::string render_svg(const Chart& c);

// Reads `dir`/sweep.csv and writes latency_vs_load.{csv,svg} and
// slowdown_by_workload.{csv,svg}. Returns warnings for skipped figures.
std::vector<std::string> emit_plots(const std::filesystem::path& dir);

}  // namespace edm::metrics
