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
#include <string>
#include <vector>

#include <json.hpp>

#include "pifs/fabric.hpp"
#include "pifs/memsys.hpp"
#include "pifs/pagemgr.hpp"
#include "pifs/switch_core.hpp"
#include "pifs/workload.hpp"

namespace pifs {

enum class Threading { Table, Batch };

struct HostConfig {
  std::uint32_t num_hosts = 1;
  std::uint32_t pipelines = 32;  // per host
  Threading threading = Threading::Table;
  double issue_ns = 1.0;           // per instruction sent by a pipeline
  double accumulate_ns = 1.0;      // per row summed on the host
  double switch_link_ns = 20.0;    // one-way host <-> switch traversal
  double upstream_bandwidth_bytes_per_ns = 64.0;
  bool operator==(const HostConfig&) const = default;
};

struct MemoryConfig {
  MemoryDeviceConfig local = default_local_dram("dram");
  MemoryDeviceConfig cxl = default_cxl_expander("cxl");
  std::uint32_t cxl_devices = 4;
  std::uint64_t local_first_cap_bytes = 128ULL << 30;
  bool operator==(const MemoryConfig&) const = default;
};

struct TopologyConfig {
  std::uint32_t num_switches = 1;
  std::vector<bool> cnv;  // missing entries default to compute-capable
  double inter_switch_latency_ns = 100.0;
  double inter_switch_bandwidth_bytes_per_ns = 64.0;
  bool operator==(const TopologyConfig&) const = default;
};

struct CoreConfig {
  std::uint32_t acr_capacity = 64;
  std::uint32_t iir_capacity = 512;
  std::uint32_t swap_slots = 4;
  bool spill_enabled = true;
  double cycle_ns = 1.0;
  bool operator==(const CoreConfig&) const = default;
};

struct RecNmpConfig {
  std::uint32_t ranks_per_channel = 2;
  double dimm_bandwidth_factor = 2.0;
  bool operator==(const RecNmpConfig&) const = default;
};

struct EngineConfig {
  bool functional = true;          // carry real FP32 row data and check results
  double discard_probability = 0.0;  // injected partial-result errors on forwarded groups
  bool operator==(const EngineConfig&) const = default;
};

struct SystemConfig {
  std::string name = "custom";
  Placement placement = Placement::interleave(0.8);
  bool switch_compute = true;
  bool ooo_enabled = true;
  bool page_mgmt_enabled = true;
  bool recnmp_mode = false;
  BufferConfig buffer;
  CoreConfig core;
  PmConfig pm;
  HostConfig host;
  MemoryConfig memory;
  TopologyConfig topology;
  RecNmpConfig recnmp;
  EngineConfig engine;

  bool operator==(const SystemConfig&) const = default;
};

const std::vector<std::string>& preset_names();
SystemConfig preset_system(const std::string& name);

// Local DRAM (one per host) followed by the CXL expanders.
std::vector<MemoryDeviceConfig> build_devices(const SystemConfig& cfg);
Topology build_topology(const SystemConfig& cfg, const std::vector<MemoryDeviceConfig>& devices);

// Cross-module checks; never throws, returns the violations.
std::vector<std::string> validate_config(const SystemConfig& cfg, const ModelConfig& model);

nlohmann::json to_json(const SystemConfig& cfg);
// Reads every key present in j over `base`; unknown keys raise ConfigError.
SystemConfig from_json(const nlohmann::json& j, const SystemConfig& base);

// Sets a dotted key path; the path must already exist in the tree.
void apply_override(nlohmann::json& tree, const std::string& key, const std::string& value);

}  // namespace pifs
