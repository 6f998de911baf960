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

#include "pifs/recipes.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "pifs/engine.hpp"

namespace pifs {

std::string TraceSpec::key() const {
  std::ostringstream os;
  if (!path.empty()) {
    os << "file:" << path << ':' << model;
  } else {
    os << model << '/' << dist << '/' << batches << 'x' << batch_size << "/t" << num_tables << '/'
       << (weighted ? 'w' : 'u') << "/s" << seed;
  }
  return os.str();
}

Trace make_trace(const TraceSpec& spec) {
  ModelConfig m = load_model_preset(spec.model);
  m.batch_size = spec.batch_size;
  if (spec.num_tables) m.num_tables = spec.num_tables;
  if (!spec.path.empty()) {
    std::ifstream in(spec.path);
    if (!in) throw IoError("cannot read trace " + spec.path);
    return parse_trace(in, m);
  }
  return synthesize_trace(m, parse_distribution(spec.dist), spec.batches, spec.seed, spec.weighted);
}

std::vector<ReportRow> run_points(const std::vector<ExperimentPoint>& points, unsigned jobs) {
  std::map<std::string, std::shared_ptr<const Trace>> traces;
  for (const auto& p : points) {
    auto& t = traces[p.trace.key()];
    if (!t) t = std::make_shared<const Trace>(make_trace(p.trace));
  }

  std::vector<ReportRow> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const auto& p = points[i];
      try {
        rows[i] = ReportRow{p.group, p.label, run_simulation(p.system, *traces.at(p.trace.key()), p.seed)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

namespace {

SystemConfig with(const std::string& preset, const std::vector<std::pair<std::string, std::string>>& sets) {
  const SystemConfig base = preset_system(preset);
  auto tree = to_json(base);
  for (const auto& [k, v] : sets) apply_override(tree, k, v);
  return from_json(tree, base);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<ExperimentPoint> fig9a_models() {
  std::vector<ExperimentPoint> out;
  for (const char* model : {"RMC1", "RMC2", "RMC3", "RMC4"}) {
    for (const char* sys : {"pond", "pond_pm", "beacon_s", "recnmp", "pifs_rec"}) {
      ExperimentPoint p;
      p.group = model;
      p.label = sys;
      p.system = preset_system(sys);
      p.trace.model = model;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ExperimentPoint> fig9b_distributions() {
  std::vector<ExperimentPoint> out;
  for (const char* sys : {"pond", "pifs_rec"}) {
    for (const char* dist : {"zipf:1.0", "normal:0.5:0.125", "uniform", "random"}) {
      ExperimentPoint p;
      p.group = sys;
      p.label = dist;
      p.system = preset_system(sys);
      p.trace.dist = dist;
      out.push_back(p);
    }
  }
  return out;
}

// The whole trace lives in CXL, so device count matters.
std::vector<ExperimentPoint> fig9c_devices() {
  std::vector<ExperimentPoint> out;
  for (const char* sys : {"pond", "pifs_rec"}) {
    for (int n : {2, 4, 8, 16}) {
      ExperimentPoint p;
      p.group = sys;
      p.label = "devices=" + std::to_string(n);
      p.system = with(sys, {{"memory.cxl_devices", std::to_string(n)}, {"placement", "all_cxl"}});
      p.trace.dist = "uniform";
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ExperimentPoint> fig9e_ablation() {
  std::vector<ExperimentPoint> out;
  const std::vector<std::pair<std::string, std::string>> tier = {{"placement", "local_first"},
                                                                 {"memory.local_first_cap_gb", "0.25"}};
  auto add = [&](const std::string& label, const std::string& preset,
                 std::vector<std::pair<std::string, std::string>> sets) {
    sets.insert(sets.begin(), tier.begin(), tier.end());
    ExperimentPoint p;
    p.group = "ablation";
    p.label = label;
    p.system = with(preset, sets);
    p.system.name = label;
    p.trace.batches = 16;
    out.push_back(p);
  };
  add("pond", "pond", {});
  add("pc", "pifs_pc_only", {});
  add("pc+ooo", "pifs_pc_ooo", {});
  add("pc+ooo+pm", "pifs_pc_ooo", {{"page_mgmt_enabled", "true"}});
  add("pc+ooo+pm+buffer", "pifs_rec", {});
  return out;
}

std::vector<ExperimentPoint> fig10_hosts() {
  std::vector<ExperimentPoint> out;
  for (const char* sys : {"pond", "pifs_rec"}) {
    for (int h : {1, 2, 4, 8}) {
      ExperimentPoint p;
      p.group = sys;
      p.label = "hosts=" + std::to_string(h);
      p.system = with(sys, {{"host.num_hosts", std::to_string(h)}});
      p.trace.batches = 8;
      out.push_back(p);
    }
  }
  return out;
}

// One hot table on CXL only, so a few pages overload one device.
std::vector<ExperimentPoint> fig11a_migrate_sweep() {
  std::vector<ExperimentPoint> out;
  for (const char* mode : {"page_block", "cacheline"}) {
    for (int k = 0; k <= 8; ++k) {
      const double th = 0.10 + 0.05 * k;
      ExperimentPoint p;
      p.group = mode;
      p.label = "migrate_threshold=" + fmt(th);
      p.system = with("pifs_rec", {{"pm.migration_mode", mode},
                                   {"pm.migrate_threshold", fmt(th)},
                                   {"pm.epoch_length_accesses", "16384"},
                                   {"placement", "all_cxl"},
                                   {"buffer.enabled", "false"}});
      p.trace.dist = "zipf:1.4";
      p.trace.num_tables = 1;
      p.trace.batches = 32;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ExperimentPoint> fig11c_switch_scaling() {
  std::vector<ExperimentPoint> out;
  for (const char* cnv : {"true", "false"}) {
    for (int s : {2, 4, 8}) {
      std::string mask = "[true";
      for (int i = 1; i < s; ++i) mask += std::string(",") + cnv;
      mask += "]";
      ExperimentPoint p;
      p.group = std::string("cnv=") + (cnv[0] == 't' ? "1" : "0");
      p.label = "switches=" + std::to_string(s);
      // One host and one CXL device per switch.
      p.system = with("pifs_rec", {{"topology.num_switches", std::to_string(s)},
                                   {"topology.cnv", mask},
                                   {"host.num_hosts", std::to_string(s)},
                                   {"memory.cxl_devices", std::to_string(s)}});
      p.trace.batches = 8;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ExperimentPoint> fig11d_swap_sweep() {
  std::vector<ExperimentPoint> out;
  for (double th : {0.02, 0.04, 0.08, 0.12, 0.16, 0.2, 0.35, 0.5, 0.8}) {
    ExperimentPoint p;
    p.group = "swap";
    p.label = "cold_age_threshold=" + fmt(th);
    p.system = with("pifs_rec", {{"pm.cold_age_threshold", fmt(th)},
                                 {"placement", "local_first"},
                                 {"memory.local_first_cap_gb", "0.01"}});
    // Small tables: every page is touched each epoch, so counts are comparable.
    p.trace.model = "RMC1";
    p.trace.batches = 16;
    out.push_back(p);
  }
  return out;
}

// Everything behind the switch and a fixed hot set, so the buffer sits on the critical path.
std::vector<ExperimentPoint> fig13_buffer_sizes() {
  std::vector<ExperimentPoint> out;
  for (const char* policy : {"htr", "lru", "fifo"}) {
    for (int kb : {0, 64, 128, 256, 512, 1024, 2048, 4096}) {
      ExperimentPoint p;
      p.group = policy;
      p.label = "capacity_kb=" + std::to_string(kb);
      p.system = with("pifs_rec", {{"buffer.enabled", kb ? "true" : "false"},
                                   {"buffer.capacity_kb", std::to_string(kb ? kb : 64)},
                                   {"buffer.policy", policy},
                                   {"buffer.latency_penalty_ns_per_doubling", "0.6"},
                                   {"placement", "all_cxl"},
                                   {"page_mgmt_enabled", "false"}});
      p.trace.batches = 8;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names = {
      "fig9a_models",         "fig9b_distributions",   "fig9c_devices",     "fig9e_ablation",    "fig10_hosts",
      "fig11a_migrate_sweep", "fig11c_switch_scaling", "fig11d_swap_sweep", "fig13_buffer_sizes"};
  return names;
}

std::vector<ExperimentPoint> recipe_points(const std::string& name) {
  if (name == "fig9a_models") return fig9a_models();
  if (name == "fig9b_distributions") return fig9b_distributions();
  if (name == "fig9c_devices") return fig9c_devices();
  if (name == "fig9e_ablation") return fig9e_ablation();
  if (name == "fig10_hosts") return fig10_hosts();
  if (name == "fig11a_migrate_sweep") return fig11a_migrate_sweep();
  if (name == "fig11c_switch_scaling") return fig11c_switch_scaling();
  if (name == "fig11d_swap_sweep") return fig11d_swap_sweep();
  if (name == "fig13_buffer_sizes") return fig13_buffer_sizes();
  throw NotFound("unknown recipe '" + name + "'");
}

}  // namespace pifs
