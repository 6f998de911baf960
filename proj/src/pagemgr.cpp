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

#include "pifs/pagemgr.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace pifs {

const char* to_string(MigrationMode m) {
  return m == MigrationMode::PageBlock ? "page_block" : "cacheline";
}

MigrationMode parse_migration_mode(const std::string& s) {
  if (s == "page_block" || s == "page") return MigrationMode::PageBlock;
  if (s == "cacheline" || s == "cache_line") return MigrationMode::CacheLineGranular;
  throw ConfigError("unknown migration mode '" + s + "'");
}

void PmConfig::validate() const {
  auto in01 = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in01(cold_age_threshold)) throw ConfigError("pm.cold_age_threshold must lie in (0,1)");
  if (!in01(migrate_threshold)) throw ConfigError("pm.migrate_threshold must lie in (0,1)");
  if (epoch_length_accesses == 0) throw ConfigError("pm.epoch_length_accesses must be positive");
  if (page_block_cost_ns < 0 || cacheline_block_cost_ns < 0) throw ConfigError("migration costs must be >= 0");
}

HeatState::HeatState(std::uint32_t num_hosts, std::uint64_t num_pages)
    : hosts_(num_hosts), pages_(num_pages), total_(num_pages, 0), per_host_(num_pages * num_hosts, 0) {}

bool HeatState::record_access(std::uint32_t host, std::uint64_t page_id, const PmConfig& cfg) {
  if (page_id >= pages_) throw FaultError("page " + std::to_string(page_id) + " is not mapped");
  if (host >= hosts_) throw ConfigError("host " + std::to_string(host) + " out of range");
  if (total_[page_id]++ == 0) touched_.push_back(page_id);
  ++per_host_[host * pages_ + page_id];
  ++epoch_accesses_;
  return epoch_accesses_ % cfg.epoch_length_accesses == 0;
}

void HeatState::reset_epoch() {
  for (auto p : touched_) {
    total_[p] = 0;
    for (std::uint32_t h = 0; h < hosts_; ++h) per_host_[h * pages_ + p] = 0;
  }
  touched_.clear();
  epoch_accesses_ = 0;
  ++epochs_;
}

std::uint64_t MigrationPlan::page_copies() const {
  std::uint64_t n = 0;
  for (const auto& m : moves) n += m.swap_with ? 2 : 1;
  return n;
}

namespace {

double page_copy_ns(const MemoryDeviceConfig& dst, const PmConfig& cfg) {
  return static_cast<double>(kPageBytes) / dst.link_bandwidth_bytes_per_ns +
         (cfg.migration_mode == MigrationMode::PageBlock ? cfg.page_block_cost_ns : cfg.cacheline_block_cost_ns);
}

}  // namespace

MigrationPlan classify_epoch(const HeatState& heat, const AddressMap& map,
                             const std::vector<MemoryDeviceConfig>& devices, const PmConfig& cfg) {
  MigrationPlan plan;
  std::unordered_set<std::uint64_t> claimed;

  for (std::uint32_t h = 0; h < heat.num_hosts(); ++h) {
    std::vector<std::uint64_t> pub, priv;
    for (auto p : heat.touched()) {
      const auto& dev = devices[map.page(p).device];
      if (dev.kind == DeviceKind::CxlExpander) {
        if (heat.count(h, p) > 0) pub.push_back(p);
      } else if (dev.owner_host == h) {
        priv.push_back(p);
      }
    }
    std::sort(pub.begin(), pub.end(), [&](auto a, auto b) {
      return heat.count(h, a) > heat.count(h, b) || (heat.count(h, a) == heat.count(h, b) && a < b);
    });
    std::sort(priv.begin(), priv.end(), [&](auto a, auto b) {
      return heat.count(h, a) < heat.count(h, b) || (heat.count(h, a) == heat.count(h, b) && a < b);
    });

    std::size_t j = 0;
    std::uint32_t swaps = 0;
    for (auto p : pub) {
      if (swaps >= cfg.max_swaps_per_epoch) break;
      // Taken by a lower-numbered host this epoch: fall through to the next page.
      if (claimed.count(p)) continue;
      while (j < priv.size() && claimed.count(priv[j])) ++j;
      if (j >= priv.size()) break;
      const std::uint64_t cold = priv[j];
      const double bar = static_cast<double>(heat.count(h, cold)) * (1.0 + cfg.cold_age_threshold);
      if (!(static_cast<double>(heat.count(h, p)) > bar)) break;
      const auto& from = map.page(p);
      const auto& to = map.page(cold);
      plan.moves.push_back(PageMove{p, from.device, to.device, cold});
      plan.estimated_cost_ns += page_copy_ns(devices[to.device], cfg) + page_copy_ns(devices[from.device], cfg);
      claimed.insert(p);
      claimed.insert(cold);
      ++j;
      ++swaps;
    }
  }
  return plan;
}

std::vector<std::size_t> detect_overburdened(const std::vector<std::uint64_t>& counts, const PmConfig& cfg) {
  std::vector<std::size_t> out;
  if (counts.size() < 2) return out;
  const double sum = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (std::size_t d = 0; d < counts.size(); ++d) {
    const double avg_others = (sum - static_cast<double>(counts[d])) / static_cast<double>(counts.size() - 1);
    if (static_cast<double>(counts[d]) > avg_others * (2.0 - cfg.migrate_threshold)) out.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> device_counts(const HeatState& heat, const AddressMap& map, std::size_t num_devices) {
  std::vector<std::uint64_t> c(num_devices, 0);
  for (auto p : heat.touched()) c[map.page(p).device] += heat.total(p);
  return c;
}

std::vector<std::uint64_t> projected_counts(const HeatState& heat, const AddressMap& map, std::size_t num_devices,
                                            const MigrationPlan& plan) {
  auto c = device_counts(heat, map, num_devices);
  for (const auto& m : plan.moves) {
    c[m.from] -= heat.total(m.page);
    c[m.to] += heat.total(m.page);
    if (m.swap_with) {
      c[m.to] -= heat.total(*m.swap_with);
      c[m.from] += heat.total(*m.swap_with);
    }
  }
  return c;
}

MigrationPlan plan_spread(const HeatState& heat, const AddressMap& map,
                          const std::vector<MemoryDeviceConfig>& devices, const PmConfig& cfg) {
  MigrationPlan plan;
  std::vector<std::uint32_t> cxl;
  for (std::uint32_t i = 0; i < devices.size(); ++i) {
    if (devices[i].kind == DeviceKind::CxlExpander) cxl.push_back(i);
  }
  if (cxl.size() < 2) return plan;

  const auto all = device_counts(heat, map, devices.size());
  std::vector<std::uint64_t> counts;
  for (auto d : cxl) counts.push_back(all[d]);

  // Hot pages per CXL device, hottest first.
  std::vector<std::vector<std::uint64_t>> hot(cxl.size());
  std::vector<std::size_t> slot_of(devices.size(), SIZE_MAX);
  for (std::size_t i = 0; i < cxl.size(); ++i) slot_of[cxl[i]] = i;
  for (auto p : heat.touched()) {
    const auto s = slot_of[map.page(p).device];
    if (s != SIZE_MAX) hot[s].push_back(p);
  }
  for (auto& v : hot) {
    std::sort(v.begin(), v.end(), [&](auto a, auto b) {
      return heat.total(a) > heat.total(b) || (heat.total(a) == heat.total(b) && a < b);
    });
  }
  std::vector<std::uint64_t> free(cxl.size());
  for (std::size_t i = 0; i < cxl.size(); ++i) free[i] = map.free_frames(cxl[i]);
  std::unordered_set<std::uint64_t> moved;

  auto coldest_on = [&](std::size_t s) -> std::optional<std::uint64_t> {
    // An untouched page is the coldest possible; fall back to the least-hot touched page.
    for (std::uint64_t p = 0; p < map.num_pages(); ++p) {
      if (map.page(p).device == cxl[s] && heat.total(p) == 0 && !moved.count(p)) return p;
    }
    for (auto it = hot[s].rbegin(); it != hot[s].rend(); ++it) {
      if (!moved.count(*it)) return *it;
    }
    return std::nullopt;
  };

  for (std::uint32_t iter = 0; iter < cfg.max_spread_iterations; ++iter) {
    const auto flagged = detect_overburdened(counts, cfg);
    if (flagged.empty()) break;
    std::size_t src = flagged.front();
    for (auto f : flagged) {
      if (counts[f] > counts[src]) src = f;
    }
    std::size_t dst = src == 0 ? 1 : 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (i != src && counts[i] < counts[dst]) dst = i;
    }
    const std::uint64_t gap = counts[src] - counts[dst];

    // Hottest page whose move narrows the gap rather than flipping it.
    std::optional<std::uint64_t> pick;
    for (auto p : hot[src]) {
      if (moved.count(p)) continue;
      if (heat.total(p) < gap) {
        pick = p;
        break;
      }
    }
    if (!pick) break;
    PageMove m{*pick, cxl[src], cxl[dst], std::nullopt};
    moved.insert(*pick);
    counts[src] -= heat.total(*pick);
    counts[dst] += heat.total(*pick);
    if (free[dst] == 0) {
      auto cold = coldest_on(dst);
      if (!cold) break;
      m.swap_with = *cold;
      moved.insert(*cold);
      counts[dst] -= heat.total(*cold);
      counts[src] += heat.total(*cold);
    } else {
      --free[dst];
      ++free[src];
    }
    plan.moves.push_back(m);
    plan.estimated_cost_ns += page_copy_ns(devices[cxl[dst]], cfg);
    if (m.swap_with) plan.estimated_cost_ns += page_copy_ns(devices[cxl[src]], cfg);
  }
  return plan;
}

// ---------------------------------------------------------------------------

Tick MigrationWindow::end() const { return start + 64 * line_copy + block_cost; }

Tick MigrationWindow::line_ready(std::uint32_t line) const {
  if (mode == MigrationMode::PageBlock) return end();
  return start + static_cast<Tick>(line + 1) * line_copy + block_cost;
}

Tick MigrationWindow::stall(std::uint32_t offset, std::uint32_t len, Tick t) const {
  if (mode == MigrationMode::PageBlock) return (t >= start && t < end()) ? end() - t : 0;
  Tick worst = 0;
  const std::uint32_t first = offset / kLineBytes;
  const std::uint32_t last = (offset + std::max<std::uint32_t>(len, 1) - 1) / kLineBytes;
  for (std::uint32_t i = first; i <= last && i < 64; ++i) {
    const Tick open = start + static_cast<Tick>(i) * line_copy;
    if (t >= open && t < line_ready(i)) worst = std::max(worst, line_ready(i) - t);
  }
  return worst;
}

std::vector<MigrationWindow> execute_migration(const MigrationPlan& plan, const PmConfig& cfg, Tick now,
                                               AddressMap& map, const std::vector<MemoryDeviceConfig>& devices) {
  std::vector<MigrationWindow> out;
  Tick cursor = now;
  const Tick block = from_ns(cfg.migration_mode == MigrationMode::PageBlock ? cfg.page_block_cost_ns
                                                                            : cfg.cacheline_block_cost_ns);
  auto window = [&](std::uint64_t page, std::uint32_t dst) {
    MigrationWindow w;
    w.page = page;
    w.old_location = map.page(page);
    w.start = cursor;
    w.line_copy = transfer_ticks(kLineBytes, devices[dst].link_bandwidth_bytes_per_ns);
    w.block_cost = block;
    w.mode = cfg.migration_mode;
    cursor += 64 * w.line_copy;
    out.push_back(w);
  };

  for (const auto& m : plan.moves) {
    if (map.page(m.page).device != m.from) throw ConfigError("stale migration plan");
    if (m.swap_with) {
      window(m.page, m.to);
      window(*m.swap_with, m.from);
      map.swap(m.page, *m.swap_with);
    } else {
      if (map.free_frames(m.to) == 0) {
        throw CapacityError("migration destination " + devices[m.to].device_id + " is full");
      }
      window(m.page, m.to);
      map.move(m.page, m.to);
    }
  }
  return out;
}

}  // namespace pifs
