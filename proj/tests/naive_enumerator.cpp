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

#include "naive_enumerator.hpp"

#include <algorithm>
#include <vector>

#include "pifs/engine.hpp"

namespace pifs::naive {

namespace {

struct Dram {
  const MemoryDeviceConfig* cfg;
  std::vector<std::int64_t> open;
  std::vector<Tick> bank_free;
  std::vector<Tick> bus_free;

  explicit Dram(const MemoryDeviceConfig& c)
      : cfg(&c), open(c.channels * c.banks_per_channel, -1), bank_free(open.size(), 0), bus_free(c.channels, 0) {}

  Tick read(std::uint64_t addr, std::uint32_t bytes, Tick now) {
    const std::uint64_t r = addr / 8192;
    const std::uint64_t ch = r % cfg->channels;
    const std::uint64_t b = ch * cfg->banks_per_channel + (r / cfg->channels) % cfg->banks_per_channel;
    const auto row = static_cast<std::int64_t>(r / (cfg->channels * cfg->banks_per_channel));
    const double tck = cfg->timing.tck_ns;
    const Tick act = open[b] == row ? 0 : from_ns((cfg->timing.trp + cfg->timing.trcd) * tck);
    open[b] = row;
    const Tick t0 = std::max(now, bank_free[b]);
    bank_free[b] = t0 + act;
    const Tick ready = t0 + act + from_ns(cfg->timing.cl * tck);
    bus_free[ch] = std::max(ready, bus_free[ch]) + from_ns(bytes / cfg->link_bandwidth_bytes_per_ns);
    return bus_free[ch] + from_ns(cfg->extra_access_latency_ns);
  }
};

}  // namespace

bool supported(const SystemConfig& cfg) {
  return cfg.host.num_hosts == 1 && cfg.host.pipelines == 1 && cfg.topology.num_switches == 1 &&
         !cfg.page_mgmt_enabled && !cfg.buffer.enabled && !cfg.recnmp_mode &&
         (!cfg.switch_compute || cfg.core.acr_capacity == 1) && cfg.engine.discard_probability == 0.0;
}

double total_latency_ns(const SystemConfig& cfg, const Trace& trace) {
  const ModelConfig& m = trace.model;
  const auto devices = build_devices(cfg);
  const AddressMap map = build_address_map(m, devices, cfg.placement, cfg.memory.local_first_cap_bytes);
  std::vector<Dram> dram;
  dram.reserve(devices.size());
  for (const auto& d : devices) dram.emplace_back(d);

  const std::uint32_t bytes = m.embedding_dim_bytes;
  const Tick issue = from_ns(cfg.host.issue_ns);
  const Tick link = from_ns(cfg.host.switch_link_ns);
  const Tick acc = from_ns(cfg.host.accumulate_ns);
  const Tick cycle = from_ns(cfg.core.cycle_ns);
  const Tick up_xfer = from_ns(bytes / cfg.host.upstream_bandwidth_bytes_per_ns);

  Tick up_free = 0;
  auto upstream = [&](Tick t) {
    up_free = std::max(t, up_free) + up_xfer;
    return up_free + link;
  };

  Tick pipe = 0;          // when the pipeline may issue its next request
  Tick context_free = 0;  // last egress of the switch's only context
  Tick core_free = 0;
  Tick end = 0;

  // Requests run in table-threading order on the single pipeline.
  for (const auto& rq : split_requests(trace)) {
    const auto& tl = trace.batches[rq.batch].tables[rq.table];
    struct Row {
      std::uint32_t dev;
      std::uint64_t addr;
    };
    std::vector<Row> local, remote, all;
    for (std::uint32_t k = 0; k < rq.count; ++k) {
      auto [dev, addr] = map.locate(m.row_address(rq.table, tl.idx[rq.first + k]));
      all.push_back({dev, addr});
      (devices[dev].kind == DeviceKind::LocalDram ? local : remote).push_back({dev, addr});
    }

    Tick local_last = 0, remote_done = 0;
    if (!cfg.switch_compute || remote.empty()) {
      // Everything is read back to the host in candidate order.
      std::vector<Tick> arrive;
      for (std::size_t k = 0; k < all.size(); ++k) {
        const Tick t = pipe + static_cast<Tick>(k) * issue;
        if (devices[all[k].dev].kind == DeviceKind::LocalDram) {
          arrive.push_back(dram[all[k].dev].read(all[k].addr, bytes, t));
        } else {
          arrive.push_back(0);  // filled below
        }
      }
      // Remote completions pass through the upstream port in completion order.
      std::vector<std::pair<Tick, std::size_t>> done;
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (devices[all[k].dev].kind == DeviceKind::LocalDram) continue;
        const Tick t = pipe + static_cast<Tick>(k) * issue + link;
        done.emplace_back(dram[all[k].dev].read(all[k].addr, bytes, t), k);
      }
      std::sort(done.begin(), done.end());
      for (auto [t, k] : done) arrive[k] = upstream(t);
      std::sort(arrive.begin(), arrive.end());
      for (Tick a : arrive) local_last = std::max(local_last, a) + acc;
      pipe = local_last;
      end = std::max(end, local_last);
      continue;
    }

    // The only context frees at the previous egress; a pipeline that found it
    // busy is woken one cycle later.
    const Tick t = pipe >= context_free ? pipe : context_free + cycle;
    std::vector<Tick> arr;
    for (std::size_t i = 0; i < local.size(); ++i) {
      arr.push_back(dram[local[i].dev].read(local[i].addr, bytes, t + static_cast<Tick>(i) * issue));
    }
    std::sort(arr.begin(), arr.end());
    for (Tick a : arr) local_last = std::max(local_last, a) + acc;
    const Tick start = t + static_cast<Tick>(local.size()) * issue;

    std::vector<Tick> data;
    for (std::size_t j = 0; j < remote.size(); ++j) {
      const Tick ingress = start + static_cast<Tick>(j + 2) * issue + link;
      data.push_back(dram[remote[j].dev].read(remote[j].addr, bytes, ingress));
    }
    std::sort(data.begin(), data.end());
    for (Tick d : data) core_free = std::max(core_free, d) + cycle;
    context_free = core_free;
    remote_done = upstream(core_free);

    pipe = local.empty() ? start + static_cast<Tick>(1 + remote.size()) * issue : local_last;
    end = std::max({end, pipe, remote_done});
  }
  return to_ns(end);
}

}  // namespace pifs::naive
