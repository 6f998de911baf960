// Copyright 2026 The pifs-sim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pifs/report.hpp"
#include "pifs/systems.hpp"
#include "pifs/workload.hpp"

namespace pifs {

// How to obtain a trace: synthesize from a model preset, or read a file.
struct TraceSpec {
  std::string model = "RMC4";
  std::string dist = "zipf:1.0";
  std::uint32_t batches = 4;
  std::uint32_t batch_size = 256;
  std::uint32_t num_tables = 0;  // 0 keeps the preset's count
  bool weighted = false;
  std::uint64_t seed = 1;
  std::string path;  // non-empty: read this file instead

  std::string key() const;
};

Trace make_trace(const TraceSpec& spec);

struct ExperimentPoint {
  std::string group;
  std::string label;
  SystemConfig system;
  TraceSpec trace;
  std::uint64_t seed = 1;
};

// Runs every point; traces shared between points are built once. Output
// order follows the input order whatever `jobs` is.
std::vector<ReportRow> run_points(const std::vector<ExperimentPoint>& points, unsigned jobs);

const std::vector<std::string>& recipe_names();
std::vector<ExperimentPoint> recipe_points(const std::string& name);

}  // namespace pifs
