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

#include "pifs/systems.hpp"

#include <algorithm>

namespace pifs {

using nlohmann::json;

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"pond",     "pond_pm",      "beacon_s",    "recnmp",
                                                 "local_dram", "pifs_rec",   "pifs_pc_only", "pifs_pc_ooo",
                                                 "pifs_pc_pm", "pifs_pc_buffer"};
  return names;
}

SystemConfig preset_system(const std::string& name) {
  SystemConfig c;
  c.name = name;
  c.buffer.enabled = false;
  c.switch_compute = false;
  c.ooo_enabled = false;
  c.page_mgmt_enabled = false;

  if (name == "pond") {
  } else if (name == "pond_pm") {
    c.page_mgmt_enabled = true;
  } else if (name == "beacon_s") {
    c.placement = Placement::all_cxl();
    c.switch_compute = true;
  } else if (name == "recnmp") {
    c.placement = Placement::local_first();
    c.recnmp_mode = true;
    c.buffer.enabled = true;  // DIMM-side cache, same size and policy as the switch buffer
  } else if (name == "local_dram") {
    c.placement = Placement::all_local();
  } else if (name == "pifs_rec") {
    c.switch_compute = true;
    c.ooo_enabled = true;
    c.page_mgmt_enabled = true;
    c.buffer.enabled = true;
  } else if (name == "pifs_pc_only") {
    c.switch_compute = true;
  } else if (name == "pifs_pc_ooo") {
    c.switch_compute = true;
    c.ooo_enabled = true;
  } else if (name == "pifs_pc_pm") {
    c.switch_compute = true;
    c.page_mgmt_enabled = true;
  } else if (name == "pifs_pc_buffer") {
    c.switch_compute = true;
    c.buffer.enabled = true;
  } else {
    throw NotFound("unknown system preset '" + name + "'");
  }
  return c;
}

std::vector<MemoryDeviceConfig> build_devices(const SystemConfig& cfg) {
  std::vector<MemoryDeviceConfig> out;
  for (std::uint32_t h = 0; h < cfg.host.num_hosts; ++h) {
    MemoryDeviceConfig d = cfg.memory.local;
    d.kind = DeviceKind::LocalDram;
    d.device_id = "dram" + std::to_string(h);
    d.owner_host = h;
    if (cfg.recnmp_mode) {
      // Rank-level NDP: each rank is an independent accumulation port with DIMM-internal bandwidth.
      d.channels *= cfg.recnmp.ranks_per_channel;
      d.link_bandwidth_bytes_per_ns *= cfg.recnmp.dimm_bandwidth_factor / cfg.recnmp.ranks_per_channel;
    }
    out.push_back(d);
  }
  const std::uint32_t switches = std::max<std::uint32_t>(1, cfg.topology.num_switches);
  for (std::uint32_t i = 0; i < cfg.memory.cxl_devices; ++i) {
    MemoryDeviceConfig d = cfg.memory.cxl;
    d.kind = DeviceKind::CxlExpander;
    d.device_id = "cxl" + std::to_string(i);
    d.switch_id = i % switches;
    out.push_back(d);
  }
  return out;
}

Topology build_topology(const SystemConfig& cfg, const std::vector<MemoryDeviceConfig>& devices) {
  Topology t = make_topology(cfg.topology.num_switches, cfg.host.num_hosts, devices, cfg.topology.cnv,
                             cfg.topology.inter_switch_latency_ns);
  t.inter_switch_bandwidth_bytes_per_ns = cfg.topology.inter_switch_bandwidth_bytes_per_ns;
  return t;
}

std::vector<std::string> validate_config(const SystemConfig& cfg, const ModelConfig& model) {
  std::vector<std::string> errs;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  try {
    model.validate();
  } catch (const Error& e) {
    errs.emplace_back(e.what());
  }
  check(!(cfg.recnmp_mode && cfg.switch_compute), "recnmp_mode excludes switch_compute");
  check(!(cfg.name == "beacon_s" && cfg.placement.kind == Placement::Kind::Interleave),
        "beacon_s does not allow interleaved placement");
  try {
    cfg.pm.validate();
  } catch (const Error& e) {
    errs.emplace_back(e.what());
  }
  check(cfg.host.num_hosts > 0, "host.num_hosts must be positive");
  check(cfg.host.pipelines > 0, "host.pipelines must be positive");
  check(cfg.host.upstream_bandwidth_bytes_per_ns > 0, "host.upstream_bandwidth_bytes_per_ns must be positive");
  check(cfg.topology.num_switches > 0, "topology.num_switches must be positive");
  check(cfg.topology.inter_switch_bandwidth_bytes_per_ns > 0, "topology link bandwidth must be positive");
  check(cfg.core.acr_capacity > 0, "core.acr_capacity must be at least 1");
  check(cfg.core.iir_capacity > 0, "core.iir_capacity must be at least 1");
  check(cfg.core.cycle_ns > 0, "core.cycle_ns must be positive");
  check(cfg.buffer.refresh_period > 0, "buffer.refresh_period must be positive");
  check(cfg.buffer.profiler_decay >= 0 && cfg.buffer.profiler_decay <= 1, "buffer.profiler_decay must lie in [0,1]");
  check(cfg.engine.discard_probability >= 0 && cfg.engine.discard_probability < 1,
        "engine.discard_probability must lie in [0,1)");
  for (const auto* d : {&cfg.memory.local, &cfg.memory.cxl}) {
    check(d->channels > 0 && d->banks_per_channel > 0, "memory devices need channels and banks");
    check(d->link_bandwidth_bytes_per_ns > 0, "memory bandwidth must be positive");
    check(d->timing.tck_ns > 0, "tCK must be positive");
  }
  if (cfg.placement.kind != Placement::Kind::AllLocal) {
    check(cfg.memory.cxl_devices > 0 || cfg.placement.kind == Placement::Kind::LocalFirst,
          "placement needs at least one CXL device");
  }
  if (errs.empty()) {
    try {
      auto devices = build_devices(cfg);
      build_topology(cfg, devices).validate(devices.size(), cfg.host.num_hosts);
      build_address_map(model, devices, cfg.placement, cfg.memory.local_first_cap_bytes);
    } catch (const Error& e) {
      errs.emplace_back(e.what());
    }
  }
  return errs;
}

// ---------------------------------------------------------------------------
// Structured-text form

namespace {

json timing_json(const DramTiming& t) {
  return json{{"tck_ns", t.tck_ns}, {"cl", t.cl}, {"trcd", t.trcd}, {"trp", t.trp}, {"tras", t.tras}};
}

json device_json(const MemoryDeviceConfig& d) {
  return json{{"capacity_gb", static_cast<double>(d.capacity_bytes) / static_cast<double>(1ULL << 30)},
              {"channels", d.channels},
              {"banks_per_channel", d.banks_per_channel},
              {"timing", timing_json(d.timing)},
              {"bandwidth_bytes_per_ns", d.link_bandwidth_bytes_per_ns},
              {"extra_latency_ns", d.extra_access_latency_ns}};
}

// Reject keys the base tree does not have, so typos fail loudly.
void check_keys(const json& given, const json& known, const std::string& path) {
  if (!given.is_object()) return;
  for (auto it = given.begin(); it != given.end(); ++it) {
    if (path.empty() && (it.key() == "preset" || it.key() == "name")) continue;
    if (!known.contains(it.key())) throw ConfigError("unknown config key '" + path + it.key() + "'");
    if (known.at(it.key()).is_object()) check_keys(it.value(), known.at(it.key()), path + it.key() + ".");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void read_device(const json& j, MemoryDeviceConfig& d) {
  if (j.contains("capacity_gb")) {
    double gb = 0;
    read(j, "capacity_gb", gb);
    d.capacity_bytes = static_cast<std::uint64_t>(gb * static_cast<double>(1ULL << 30));
  }
  read(j, "channels", d.channels);
  read(j, "banks_per_channel", d.banks_per_channel);
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    read(t, "tck_ns", d.timing.tck_ns);
    read(t, "cl", d.timing.cl);
    read(t, "trcd", d.timing.trcd);
    read(t, "trp", d.timing.trp);
    read(t, "tras", d.timing.tras);
  }
  read(j, "bandwidth_bytes_per_ns", d.link_bandwidth_bytes_per_ns);
  read(j, "extra_latency_ns", d.extra_access_latency_ns);
}

}  // namespace

json to_json(const SystemConfig& c) {
  json j;
  j["name"] = c.name;
  j["placement"] = c.placement.to_string();
  j["switch_compute"] = c.switch_compute;
  j["ooo_enabled"] = c.ooo_enabled;
  j["page_mgmt_enabled"] = c.page_mgmt_enabled;
  j["recnmp_mode"] = c.recnmp_mode;
  j["buffer"] = {{"enabled", c.buffer.enabled},
                 {"capacity_kb", static_cast<double>(c.buffer.capacity_bytes) / 1024.0},
                 {"policy", to_string(c.buffer.policy)},
                 {"refresh_period", c.buffer.refresh_period},
                 {"hit_latency_ns", c.buffer.hit_latency_ns},
                 {"profiler_decay", c.buffer.profiler_decay},
                 {"latency_penalty_ns_per_doubling", c.buffer.latency_penalty_ns_per_doubling}};
  j["core"] = {{"acr_capacity", c.core.acr_capacity}, {"iir_capacity", c.core.iir_capacity},
               {"swap_slots", c.core.swap_slots},     {"spill_enabled", c.core.spill_enabled},
               {"cycle_ns", c.core.cycle_ns}};
  j["pm"] = {{"epoch_length_accesses", c.pm.epoch_length_accesses},
             {"cold_age_threshold", c.pm.cold_age_threshold},
             {"migrate_threshold", c.pm.migrate_threshold},
             {"migration_mode", to_string(c.pm.migration_mode)},
             {"page_block_cost_ns", c.pm.page_block_cost_ns},
             {"cacheline_block_cost_ns", c.pm.cacheline_block_cost_ns},
             {"max_spread_iterations", c.pm.max_spread_iterations},
             {"max_swaps_per_epoch", c.pm.max_swaps_per_epoch}};
  j["host"] = {{"num_hosts", c.host.num_hosts},
               {"pipelines", c.host.pipelines},
               {"threading", c.host.threading == Threading::Table ? "table" : "batch"},
               {"issue_ns", c.host.issue_ns},
               {"accumulate_ns", c.host.accumulate_ns},
               {"switch_link_ns", c.host.switch_link_ns},
               {"upstream_bandwidth_bytes_per_ns", c.host.upstream_bandwidth_bytes_per_ns}};
  j["memory"] = {{"local", device_json(c.memory.local)},
                 {"cxl", device_json(c.memory.cxl)},
                 {"cxl_devices", c.memory.cxl_devices},
                 {"local_first_cap_gb", static_cast<double>(c.memory.local_first_cap_bytes) / (1ULL << 30)}};
  j["topology"] = {{"num_switches", c.topology.num_switches},
                   {"cnv", c.topology.cnv},
                   {"inter_switch_latency_ns", c.topology.inter_switch_latency_ns},
                   {"inter_switch_bandwidth_bytes_per_ns", c.topology.inter_switch_bandwidth_bytes_per_ns}};
  j["recnmp"] = {{"ranks_per_channel", c.recnmp.ranks_per_channel},
                 {"dimm_bandwidth_factor", c.recnmp.dimm_bandwidth_factor}};
  j["engine"] = {{"functional", c.engine.functional}, {"discard_probability", c.engine.discard_probability}};
  return j;
}

SystemConfig from_json(const json& j, const SystemConfig& base) {
  if (!j.is_object()) throw ConfigError("system config must be an object");
  check_keys(j, to_json(base), "");
  SystemConfig c = base;
  read(j, "name", c.name);
  if (j.contains("placement")) c.placement = parse_placement(j.at("placement").get<std::string>());
  read(j, "switch_compute", c.switch_compute);
  read(j, "ooo_enabled", c.ooo_enabled);
  read(j, "page_mgmt_enabled", c.page_mgmt_enabled);
  read(j, "recnmp_mode", c.recnmp_mode);
  if (j.contains("buffer")) {
    const json& b = j.at("buffer");
    read(b, "enabled", c.buffer.enabled);
    if (b.contains("capacity_kb")) {
      double kb = 0;
      read(b, "capacity_kb", kb);
      c.buffer.capacity_bytes = static_cast<std::uint64_t>(kb * 1024.0);
    }
    if (b.contains("policy")) c.buffer.policy = parse_buffer_policy(b.at("policy").get<std::string>());
    read(b, "refresh_period", c.buffer.refresh_period);
    read(b, "hit_latency_ns", c.buffer.hit_latency_ns);
    read(b, "profiler_decay", c.buffer.profiler_decay);
    read(b, "latency_penalty_ns_per_doubling", c.buffer.latency_penalty_ns_per_doubling);
  }
  if (j.contains("core")) {
    const json& k = j.at("core");
    read(k, "acr_capacity", c.core.acr_capacity);
    read(k, "iir_capacity", c.core.iir_capacity);
    read(k, "swap_slots", c.core.swap_slots);
    read(k, "spill_enabled", c.core.spill_enabled);
    read(k, "cycle_ns", c.core.cycle_ns);
  }
  if (j.contains("pm")) {
    const json& p = j.at("pm");
    read(p, "epoch_length_accesses", c.pm.epoch_length_accesses);
    read(p, "cold_age_threshold", c.pm.cold_age_threshold);
    read(p, "migrate_threshold", c.pm.migrate_threshold);
    if (p.contains("migration_mode")) c.pm.migration_mode = parse_migration_mode(p.at("migration_mode").get<std::string>());
    read(p, "page_block_cost_ns", c.pm.page_block_cost_ns);
    read(p, "cacheline_block_cost_ns", c.pm.cacheline_block_cost_ns);
    read(p, "max_spread_iterations", c.pm.max_spread_iterations);
    read(p, "max_swaps_per_epoch", c.pm.max_swaps_per_epoch);
  }
  if (j.contains("host")) {
    const json& h = j.at("host");
    read(h, "num_hosts", c.host.num_hosts);
    read(h, "pipelines", c.host.pipelines);
    if (h.contains("threading")) {
      const auto t = h.at("threading").get<std::string>();
      if (t == "table") {
        c.host.threading = Threading::Table;
      } else if (t == "batch") {
        c.host.threading = Threading::Batch;
      } else {
        throw ConfigError("host.threading must be 'table' or 'batch'");
      }
    }
    read(h, "issue_ns", c.host.issue_ns);
    read(h, "accumulate_ns", c.host.accumulate_ns);
    read(h, "switch_link_ns", c.host.switch_link_ns);
    read(h, "upstream_bandwidth_bytes_per_ns", c.host.upstream_bandwidth_bytes_per_ns);
  }
  if (j.contains("memory")) {
    const json& m = j.at("memory");
    if (m.contains("local")) read_device(m.at("local"), c.memory.local);
    if (m.contains("cxl")) read_device(m.at("cxl"), c.memory.cxl);
    read(m, "cxl_devices", c.memory.cxl_devices);
    if (m.contains("local_first_cap_gb")) {
      double gb = 0;
      read(m, "local_first_cap_gb", gb);
      c.memory.local_first_cap_bytes = static_cast<std::uint64_t>(gb * static_cast<double>(1ULL << 30));
    }
  }
  if (j.contains("topology")) {
    const json& t = j.at("topology");
    read(t, "num_switches", c.topology.num_switches);
    read(t, "cnv", c.topology.cnv);
    read(t, "inter_switch_latency_ns", c.topology.inter_switch_latency_ns);
    read(t, "inter_switch_bandwidth_bytes_per_ns", c.topology.inter_switch_bandwidth_bytes_per_ns);
  }
  if (j.contains("recnmp")) {
    read(j.at("recnmp"), "ranks_per_channel", c.recnmp.ranks_per_channel);
    read(j.at("recnmp"), "dimm_bandwidth_factor", c.recnmp.dimm_bandwidth_factor);
  }
  if (j.contains("engine")) {
    read(j.at("engine"), "functional", c.engine.functional);
    read(j.at("engine"), "discard_probability", c.engine.discard_probability);
  }
  return c;
}

void apply_override(json& tree, const std::string& key, const std::string& value) {
  json* node = &tree;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("override key '" + key + "' does not name a config field");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (node->is_object()) throw ConfigError("override key '" + key + "' names a section, not a field");
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded() || (node->is_string() && !parsed.is_string())) {
    *node = value;
  } else {
    *node = std::move(parsed);
  }
}

}  // namespace pifs
