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
#include <map>
#include <optional>
#include <vector>

#include "pifs/common.hpp"
#include "pifs/memsys.hpp"

namespace pifs {

struct SwitchSpec {
  std::uint32_t switch_id = 0;
  bool cnv = true;
  std::vector<std::uint32_t> devices;  // CXL device indices
  std::vector<std::uint32_t> hosts;
};

struct Topology {
  std::vector<SwitchSpec> switches;
  double inter_switch_latency_ns = 100.0;
  double inter_switch_bandwidth_bytes_per_ns = 64.0;

  void validate(std::size_t num_devices, std::uint32_t num_hosts) const;
  std::uint32_t switch_of_host(std::uint32_t host) const;
};

// Full mesh: n switches, hosts and CXL devices attached round robin.
Topology make_topology(std::uint32_t num_switches, std::uint32_t num_hosts,
                       const std::vector<MemoryDeviceConfig>& devices, const std::vector<bool>& cnv,
                       double inter_switch_latency_ns);

struct ForwardRecord {
  std::uint32_t sumtag = 0;
  std::map<std::uint32_t, std::uint32_t> sub_counts;
  std::map<std::uint32_t, std::vector<double>> partials_received;
  std::uint32_t total_count = 0;
};

struct Partition {
  ForwardRecord record;
  std::map<std::uint32_t, std::vector<std::size_t>> groups;  // switch -> candidate indices
};

// Groups candidate addresses by the switch owning their device.
Partition partition_accumulation(std::uint32_t sumtag, const std::vector<std::uint64_t>& candidates,
                                 const AddressMap& map, const std::vector<MemoryDeviceConfig>& devices);

enum class MergeStatus { Waiting, Complete, Discard };
struct MergeResult {
  MergeStatus status = MergeStatus::Waiting;
  std::vector<double> sum;  // set on Complete
};

MergeResult merge_partials(ForwardRecord& record, std::uint32_t switch_id, const std::vector<double>& partial,
                           std::uint32_t reported_count);

// Delivery delay between two switches of the mesh.
Tick route_hop(std::uint32_t from, std::uint32_t to, const Topology& topo);

struct RemoteTraffic {
  std::uint64_t cross_link_bytes = 0;
  std::uint32_t transfers = 0;
  bool accumulate_remotely = false;
};

// Data movement for one remote group of `candidates` rows of `row_bytes`.
RemoteTraffic handle_non_compute(const SwitchSpec& remote, std::uint32_t candidates, std::uint32_t row_bytes);

}  // namespace pifs
