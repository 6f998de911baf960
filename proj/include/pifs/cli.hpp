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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pifs/recipes.hpp"
#include "pifs/report.hpp"
#include "pifs/systems.hpp"

namespace pifs {

struct RunSpec {
  std::string system;       // preset name or path to a JSON config
  std::string config_path;  // optional overlay file
  TraceSpec trace;
  bool synth_given = false;
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string out;  // empty: standard output
  ReportFormat format = ReportFormat::Csv;
  unsigned jobs = 1;
};

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// "key=a:b:step" (inclusive range) or "key=v1,v2,...".
SweepAxis parse_axis(const std::string& text);
// "key=value".
std::pair<std::string, std::string> parse_assignment(const std::string& text);

enum class CommandKind { Run, Sweep, Synth, Report, Recipe };

struct Command {
  CommandKind kind = CommandKind::Run;
  RunSpec spec;
  std::vector<SweepAxis> axes;
  std::vector<std::string> inputs;  // report: text reports to merge
  std::string recipe;
  bool list = false;
  bool help = false;
  std::string usage;
};

// Throws UsageError on unknown, missing or conflicting flags.
Command parse_args(int argc, const char* const* argv);

// Preset or file, then the --config overlay, then --set overrides.
SystemConfig resolve_system(const RunSpec& spec);

// One point per combination of axis values, first axis outermost.
std::vector<ExperimentPoint> sweep_points(const RunSpec& spec, const std::vector<SweepAxis>& axes);

// 0 ok, 1 simulation or I/O error, 2 usage error. Diagnostics go to `err`.
int execute(const Command& cmd, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pifs
