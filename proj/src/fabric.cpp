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

#include "pifs/fabric.hpp"

#include <algorithm>

namespace pifs {

void Topology::validate(std::size_t num_devices, std::uint32_t num_hosts) const {
  if (switches.empty()) throw ConfigError("topology needs at least one switch");
  if (inter_switch_latency_ns < 0) throw ConfigError("inter-switch latency must be >= 0");
  std::vector<int> dev_seen(num_devices, 0), host_seen(num_hosts, 0);
  for (std::size_t i = 0; i < switches.size(); ++i) {
    if (switches[i].switch_id != i) throw ConfigError("switch ids must be 0..n-1");
    for (auto d : switches[i].devices) {
      if (d >= num_devices) throw ConfigError("switch attaches unknown device");
      ++dev_seen[d];
    }
    for (auto h : switches[i].hosts) {
      if (h >= num_hosts) throw ConfigError("switch attaches unknown host");
      ++host_seen[h];
    }
  }
  for (auto h : host_seen) {
    if (h != 1) throw ConfigError("every host must attach to exactly one switch");
  }
  for (auto d : dev_seen) {
    if (d > 1) throw ConfigError("a device is attached to more than one switch");
  }
}

std::uint32_t Topology::switch_of_host(std::uint32_t host) const {
  for (const auto& s : switches) {
    if (std::find(s.hosts.begin(), s.hosts.end(), host) != s.hosts.end()) return s.switch_id;
  }
  throw ConfigError("host " + std::to_string(host) + " is not attached");
}

Topology make_topology(std::uint32_t num_switches, std::uint32_t num_hosts,
                       const std::vector<MemoryDeviceConfig>& devices, const std::vector<bool>& cnv,
                       double inter_switch_latency_ns) {
  if (num_switches == 0) throw ConfigError("topology needs at least one switch");
  Topology t;
  t.inter_switch_latency_ns = inter_switch_latency_ns;
  t.switches.resize(num_switches);
  for (std::uint32_t s = 0; s < num_switches; ++s) {
    t.switches[s].switch_id = s;
    t.switches[s].cnv = s < cnv.size() ? cnv[s] : true;
  }
  for (std::uint32_t d = 0; d < devices.size(); ++d) {
    if (devices[d].kind != DeviceKind::CxlExpander) continue;
    if (devices[d].switch_id >= num_switches) throw ConfigError("device " + devices[d].device_id + " names a missing switch");
    t.switches[devices[d].switch_id].devices.push_back(d);
  }
  for (std::uint32_t h = 0; h < num_hosts; ++h) t.switches[h % num_switches].hosts.push_back(h);
  return t;
}

Partition partition_accumulation(std::uint32_t sumtag, const std::vector<std::uint64_t>& candidates,
                                 const AddressMap& map, const std::vector<MemoryDeviceConfig>& devices) {
  if (candidates.empty()) throw ConfigError("SumCandidateCount must be positive");
  Partition p;
  p.record.sumtag = sumtag;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto [dev, local] = map.locate(candidates[i]);
    (void)local;
    const std::uint32_t sw = devices[dev].switch_id;
    p.groups[sw].push_back(i);
    ++p.record.sub_counts[sw];
  }
  p.record.total_count = static_cast<std::uint32_t>(candidates.size());
  return p;
}

MergeResult merge_partials(ForwardRecord& record, std::uint32_t switch_id, const std::vector<double>& partial,
                           std::uint32_t reported_count) {
  auto it = record.sub_counts.find(switch_id);
  if (it == record.sub_counts.end()) {
    throw ProtocolError("partial from switch " + std::to_string(switch_id) + " not in forward record");
  }
  MergeResult r;
  if (reported_count != it->second) {
    r.status = MergeStatus::Discard;
    return r;
  }
  record.partials_received[switch_id] = partial;
  if (record.partials_received.size() < record.sub_counts.size()) return r;
  r.status = MergeStatus::Complete;
  for (const auto& [sw, v] : record.partials_received) {
    if (r.sum.size() < v.size()) r.sum.resize(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) r.sum[i] += v[i];
  }
  return r;
}

Tick route_hop(std::uint32_t from, std::uint32_t to, const Topology& topo) {
  if (from >= topo.switches.size() || to >= topo.switches.size()) throw ConfigError("route to unknown switch");
  return from == to ? 0 : from_ns(topo.inter_switch_latency_ns);
}

RemoteTraffic handle_non_compute(const SwitchSpec& remote, std::uint32_t candidates, std::uint32_t row_bytes) {
  RemoteTraffic t;
  if (remote.cnv) {
    t.accumulate_remotely = true;
    t.transfers = 1;
    t.cross_link_bytes = row_bytes;
  } else {
    t.transfers = candidates;
    t.cross_link_bytes = static_cast<std::uint64_t>(candidates) * row_bytes;
  }
  return t;
}

}  // namespace pifs
