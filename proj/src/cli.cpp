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

#include "pifs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace pifs {

using nlohmann::json;

namespace {

double axis_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("bad number '" + s + "' in axis '" + whole + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw UsageError("bad number '" + s + "' in axis '" + whole + "'");
  return v;
}

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

bool is_file(const std::string& s) {
  std::ifstream in(s);
  return static_cast<bool>(in);
}

// Writes through `fallback` when no path is given.
template <class F>
void with_output(const std::string& path, std::ostream& fallback, F&& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  body(f);
  f.flush();
  if (!f) throw IoError("write failed for " + path);
}

void write_rows(const std::vector<ReportRow>& rows, const RunSpec& spec, std::ostream& out) {
  with_output(spec.out, out, [&](std::ostream& o) { write_report(rows, spec.format, o); });
}

}  // namespace

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

SweepAxis parse_axis(const std::string& text) {
  auto [key, spec] = parse_assignment(text);
  SweepAxis axis{key, {}};
  if (spec.empty()) throw UsageError("axis '" + text + "' has no values");

  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 != std::string::npos && spec.find(':', c2 + 1) == std::string::npos) {
    const double a = axis_number(spec.substr(0, c1), text);
    const double b = axis_number(spec.substr(c1 + 1, c2 - c1 - 1), text);
    const double step = axis_number(spec.substr(c2 + 1), text);
    if (!(step > 0.0) || b < a) throw UsageError("axis '" + text + "' needs a <= b and step > 0");
    const auto n = static_cast<std::uint64_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 100000) throw UsageError("axis '" + text + "' has too many points");
    for (std::uint64_t i = 0; i < n; ++i) axis.values.push_back(fmt_value(a + static_cast<double>(i) * step));
    return axis;
  }
  // A JSON array is one value; anything else splits on commas.
  if (spec.front() == '[') {
    axis.values.push_back(spec);
    return axis;
  }
  std::string cur;
  std::istringstream is(spec);
  while (std::getline(is, cur, ',')) {
    if (cur.empty()) throw UsageError("axis '" + text + "' has an empty value");
    axis.values.push_back(cur);
  }
  if (spec.back() == ',') throw UsageError("axis '" + text + "' has an empty value");
  return axis;
}

Command parse_args(int argc, const char* const* argv) {
  Command cmd;
  RunSpec& s = cmd.spec;
  std::vector<std::string> sets, axes;
  std::string format = "csv";
  std::string model = s.trace.model;

  CLI::App app{"Trace-driven simulator of near-data SLS processing in CXL fabric switches", "pifs_sim"};
  app.require_subcommand(1);

  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--system", s.system, "preset name or JSON config file");
    sub->add_option("--config", s.config_path, "JSON overlay applied over the system");
    sub->add_option("--set", sets, "dotted.key=value override (repeatable)");
    sub->add_option("--seed", s.seed, "simulation seed");
  };
  auto add_trace = [&](CLI::App* sub) {
    sub->add_option("--model", model, "RMC1..RMC4");
    sub->add_option("--trace", s.trace.path, "trace file (JSON lines)");
    sub->add_option("--synth", s.trace.dist, "zipf:<s> | normal:<mu>:<sigma> | uniform | random");
    sub->add_option("--batches", s.trace.batches, "synthetic batches");
    sub->add_option("--batch-size", s.trace.batch_size, "samples per batch");
    sub->add_option("--tables", s.trace.num_tables, "override the model's table count");
    sub->add_option("--trace-seed", s.trace.seed, "synthesis seed");
    sub->add_flag("--weighted", s.trace.weighted, "draw per-lookup weights");
  };
  auto add_output = [&](CLI::App* sub, bool jobs) {
    sub->add_option("-o,--out", s.out, "output file (default: stdout)");
    sub->add_option("--format", format, "csv | text");
    if (jobs) sub->add_option("--jobs", s.jobs, "parallel simulations");
  };

  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_system(run);
  add_trace(run);
  add_output(run, false);

  auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
  add_system(sweep);
  add_trace(sweep);
  add_output(sweep, true);
  sweep->add_option("--axis", axes, "key=a:b:step or key=v1,v2 (repeatable)");

  auto* synth = app.add_subcommand("synth", "write a synthetic trace");
  add_trace(synth);
  synth->add_option("-o,--out", s.out, "output file (default: stdout)");

  auto* report = app.add_subcommand("report", "merge text reports and re-emit them");
  report->add_option("--in", cmd.inputs, "text report (repeatable)")->required();
  add_output(report, false);

  auto* recipe = app.add_subcommand("recipe", "run a bundled experiment");
  recipe->add_option("name", cmd.recipe, "recipe name");
  recipe->add_flag("--list", cmd.list, "print the recipe names");
  add_output(recipe, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    cmd.help = true;
    cmd.usage = app.help();
    return cmd;
  } catch (const CLI::CallForAllHelp&) {
    cmd.help = true;
    cmd.usage = app.help("", CLI::AppFormatMode::All);
    return cmd;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }

  s.trace.model = model;
  s.format = parse_report_format(format);
  for (const auto& kv : sets) s.overrides.push_back(parse_assignment(kv));
  for (const auto& a : axes) cmd.axes.push_back(parse_axis(a));

  auto source_check = [&](CLI::App* sub) {
    s.synth_given = sub->count("--synth") > 0;
    if (s.synth_given && !s.trace.path.empty()) throw UsageError("--trace and --synth are mutually exclusive");
  };

  if (run->parsed()) {
    cmd.kind = CommandKind::Run;
    source_check(run);
    if (s.system.empty()) throw UsageError("run needs --system");
  } else if (sweep->parsed()) {
    cmd.kind = CommandKind::Sweep;
    source_check(sweep);
    if (s.system.empty()) throw UsageError("sweep needs --system");
    if (cmd.axes.empty()) throw UsageError("sweep needs at least one --axis");
  } else if (synth->parsed()) {
    cmd.kind = CommandKind::Synth;
    source_check(synth);
    if (!s.trace.path.empty()) throw UsageError("synth writes a trace; it does not read one");
  } else if (report->parsed()) {
    cmd.kind = CommandKind::Report;
  } else {
    cmd.kind = CommandKind::Recipe;
    if (cmd.list == !cmd.recipe.empty()) throw UsageError("recipe needs a name or --list, not both");
  }
  if (s.jobs == 0) throw UsageError("--jobs must be at least 1");
  return cmd;
}

SystemConfig resolve_system(const RunSpec& spec) {
  SystemConfig base;
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), spec.system) == names.end() && is_file(spec.system)) {
    base = from_json(read_json_file(spec.system), SystemConfig{});
  } else {
    base = preset_system(spec.system);
  }
  if (!spec.config_path.empty()) base = from_json(read_json_file(spec.config_path), base);
  if (spec.overrides.empty()) return base;

  json tree = to_json(base);
  for (const auto& [k, v] : spec.overrides) {
    try {
      apply_override(tree, k, v);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  return from_json(tree, base);
}

std::vector<ExperimentPoint> sweep_points(const RunSpec& spec, const std::vector<SweepAxis>& axes) {
  const SystemConfig base = resolve_system(spec);
  const json tree = to_json(base);
  for (const auto& a : axes) {
    json probe = tree;
    try {
      apply_override(probe, a.key, a.values.front());
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }

  std::vector<ExperimentPoint> out;
  std::vector<std::size_t> at(axes.size(), 0);
  for (;;) {
    json t = tree;
    std::string label;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const auto& v = axes[i].values[at[i]];
      apply_override(t, axes[i].key, v);
      label += (i ? "," : "") + axes[i].key + "=" + v;
    }
    ExperimentPoint p;
    p.system = from_json(t, base);
    p.group = base.name;
    p.label = label;
    p.trace = spec.trace;
    p.seed = spec.seed;
    out.push_back(std::move(p));

    // Odometer with the last axis spinning fastest.
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++at[k] < axes[k].values.size()) break;
      at[k] = 0;
      if (k == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.help) {
    out << cmd.usage;
    return 0;
  }
  const RunSpec& s = cmd.spec;
  try {
    switch (cmd.kind) {
      case CommandKind::Run: {
        ExperimentPoint p;
        p.system = resolve_system(s);
        p.group = p.system.name;
        p.label = "seed=" + std::to_string(s.seed);
        p.trace = s.trace;
        p.seed = s.seed;
        write_rows(run_points({p}, 1), s, out);
        break;
      }
      case CommandKind::Sweep:
        write_rows(run_points(sweep_points(s, cmd.axes), s.jobs), s, out);
        break;
      case CommandKind::Synth: {
        const Trace t = make_trace(s.trace);
        with_output(s.out, out, [&](std::ostream& o) { emit_trace(t, o); });
        break;
      }
      case CommandKind::Report: {
        std::vector<ReportRow> rows;
        for (const auto& path : cmd.inputs) {
          auto part = load_text_report(path);
          rows.insert(rows.end(), part.begin(), part.end());
        }
        write_rows(rows, s, out);
        break;
      }
      case CommandKind::Recipe:
        if (cmd.list) {
          for (const auto& n : recipe_names()) out << n << '\n';
          break;
        }
        write_rows(run_points(recipe_points(cmd.recipe), s.jobs), s, out);
        break;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << '\n';
    return 2;
  }
  return execute(cmd, out, err);
}

}  // namespace pifs
