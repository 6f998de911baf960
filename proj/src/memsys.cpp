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

#include "pifs/memsys.hpp"

#include <algorithm>
#include <sstream>

namespace pifs {

MemoryDeviceConfig default_local_dram(const std::string& id) {
  MemoryDeviceConfig d;
  d.device_id = id;
  d.kind = DeviceKind::LocalDram;
  d.capacity_bytes = 128ULL << 30;
  d.channels = 12;
  d.link_bandwidth_bytes_per_ns = 38.4;  // DDR5-4800 channel
  d.extra_access_latency_ns = 0.0;
  return d;
}

MemoryDeviceConfig default_cxl_expander(const std::string& id) {
  MemoryDeviceConfig d;
  d.device_id = id;
  d.kind = DeviceKind::CxlExpander;
  d.capacity_bytes = 256ULL << 30;
  d.channels = 1;
  d.link_bandwidth_bytes_per_ns = 64.0;  // x16 downstream port
  d.extra_access_latency_ns = 100.0;
  return d;
}

std::string Placement::to_string() const {
  switch (kind) {
    case Kind::AllLocal: return "all_local";
    case Kind::AllCxl: return "all_cxl";
    case Kind::LocalFirst: return "local_first";
    case Kind::Interleave: {
      std::ostringstream os;
      os << "interleave:" << dram_share;
      return os.str();
    }
  }
  return "?";
}

Placement parse_placement(const std::string& text) {
  if (text == "all_local") return Placement::all_local();
  if (text == "all_cxl") return Placement::all_cxl();
  if (text == "local_first") return Placement::local_first();
  if (text.rfind("interleave", 0) == 0) {
    double s = 0.8;
    if (text.size() > 10) {
      if (text[10] != ':') throw ConfigError("bad placement '" + text + "'");
      try {
        std::size_t used = 0;
        s = std::stod(text.substr(11), &used);
        if (used != text.size() - 11) throw ConfigError("bad placement '" + text + "'");
      } catch (const std::logic_error&) {
        throw ConfigError("bad placement '" + text + "'");
      }
    }
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("interleave share must lie in [0,1]");
    return Placement::interleave(s);
  }
  throw ConfigError("unknown placement '" + text + "'");
}

// ---------------------------------------------------------------------------

AddressMap::AddressMap(std::vector<std::uint64_t> device_frames)
    : capacity_(std::move(device_frames)),
      next_(capacity_.size(), 0),
      free_(capacity_.size()),
      used_(capacity_.size(), 0) {}

const PageEntry& AddressMap::page(std::uint64_t page_id) const {
  if (page_id >= pages_.size()) throw FaultError("page " + std::to_string(page_id) + " is not mapped");
  return pages_[page_id];
}

std::uint64_t AddressMap::free_frames(std::uint32_t device) const {
  return capacity_[device] - used_[device];
}

std::uint64_t AddressMap::take_frame(std::uint32_t device) {
  if (device >= capacity_.size()) throw ConfigError("device index out of range");
  if (used_[device] >= capacity_[device]) {
    throw CapacityError("device " + std::to_string(device) + " has no free frame");
  }
  ++used_[device];
  if (!free_[device].empty()) {
    // Reuse the lowest released frame so layouts stay compact and deterministic.
    auto it = std::min_element(free_[device].begin(), free_[device].end());
    std::uint64_t f = *it;
    *it = free_[device].back();
    free_[device].pop_back();
    return f;
  }
  return next_[device]++;
}

void AddressMap::append(std::uint32_t device) {
  PageEntry e;
  e.device = device;
  e.frame = take_frame(device);
  pages_.push_back(e);
}

void AddressMap::move(std::uint64_t page_id, std::uint32_t device) {
  PageEntry& e = pages_.at(page_id);
  if (e.device == device) return;
  const std::uint64_t f = take_frame(device);
  free_[e.device].push_back(e.frame);
  --used_[e.device];
  e.device = device;
  e.frame = f;
}

void AddressMap::swap(std::uint64_t a, std::uint64_t b) {
  std::swap(pages_.at(a), pages_.at(b));
}

std::pair<std::uint32_t, std::uint64_t> AddressMap::locate(std::uint64_t addr) const {
  const std::uint64_t p = addr / kPageBytes;
  if (p >= pages_.size()) throw FaultError("address " + std::to_string(addr) + " is not mapped");
  const PageEntry& e = pages_[p];
  return {e.device, e.frame * kPageBytes + addr % kPageBytes};
}

bool AddressMap::consistent() const {
  std::vector<std::vector<std::uint64_t>> frames(capacity_.size());
  for (const auto& e : pages_) frames[e.device].push_back(e.frame);
  for (std::size_t d = 0; d < frames.size(); ++d) {
    auto& f = frames[d];
    if (f.size() != used_[d] || f.size() > capacity_[d]) return false;
    std::sort(f.begin(), f.end());
    if (std::adjacent_find(f.begin(), f.end()) != f.end()) return false;
    if (!f.empty() && f.back() >= capacity_[d]) return false;
  }
  return true;
}

AddressMap build_address_map(const ModelConfig& model, const std::vector<MemoryDeviceConfig>& devices,
                             const Placement& policy, std::uint64_t local_first_cap) {
  std::vector<std::uint32_t> local, cxl;
  std::vector<std::uint64_t> frames;
  std::uint64_t local_cap = 0, cxl_cap = 0;
  for (std::uint32_t i = 0; i < devices.size(); ++i) {
    frames.push_back(devices[i].frames());
    if (devices[i].kind == DeviceKind::LocalDram) {
      local.push_back(i);
      local_cap += devices[i].frames();
    } else {
      cxl.push_back(i);
      cxl_cap += devices[i].frames();
    }
  }
  const std::uint64_t pages = model.num_pages();
  AddressMap map(frames);

  auto need = [&](bool ok, const char* what) {
    if (!ok) {
      throw CapacityError(std::string("footprint of ") + std::to_string(model.footprint_bytes()) +
                          " bytes does not fit: " + what);
    }
  };

  std::uint64_t rr_local = 0, rr_cxl = 0;
  auto put_local = [&] { map.append(local[rr_local++ % local.size()]); };
  auto put_cxl = [&] { map.append(cxl[rr_cxl++ % cxl.size()]); };

  switch (policy.kind) {
    case Placement::Kind::AllLocal:
      need(!local.empty() && pages <= local_cap, "local DRAM too small");
      for (std::uint64_t p = 0; p < pages; ++p) put_local();
      break;
    case Placement::Kind::AllCxl:
      need(!cxl.empty() && pages <= cxl_cap, "CXL capacity too small");
      for (std::uint64_t p = 0; p < pages; ++p) put_cxl();
      break;
    case Placement::Kind::Interleave: {
      // Bresenham spread: page i goes to CXL when the running CXL quota ticks over.
      const std::uint64_t cxl_per_mille =
          static_cast<std::uint64_t>(std::llround((1.0 - policy.dram_share) * 1000.0));
      std::uint64_t want_cxl = 0;
      for (std::uint64_t p = 0; p < pages; ++p) {
        if (((p + 1) * cxl_per_mille) / 1000 > (p * cxl_per_mille) / 1000) ++want_cxl;
      }
      need(want_cxl == 0 || !cxl.empty(), "interleave needs a CXL device");
      need(want_cxl == pages || !local.empty(), "interleave needs local DRAM");
      need(want_cxl <= cxl_cap && pages - want_cxl <= local_cap, "tier capacity too small");
      for (std::uint64_t p = 0; p < pages; ++p) {
        if (((p + 1) * cxl_per_mille) / 1000 > (p * cxl_per_mille) / 1000) {
          put_cxl();
        } else {
          put_local();
        }
      }
      break;
    }
    case Placement::Kind::LocalFirst: {
      std::uint64_t cap_pages = std::min(local_cap, local_first_cap / kPageBytes);
      if (local.empty()) cap_pages = 0;
      const std::uint64_t n_local = std::min(pages, cap_pages);
      need(pages - n_local == 0 || (!cxl.empty() && pages - n_local <= cxl_cap), "CXL capacity too small");
      for (std::uint64_t p = 0; p < pages; ++p) {
        if (p < n_local) {
          put_local();
        } else {
          put_cxl();
        }
      }
      break;
    }
  }
  return map;
}

// ---------------------------------------------------------------------------

DeviceState::DeviceState(const MemoryDeviceConfig& cfg)
    : banks(static_cast<std::size_t>(cfg.channels) * cfg.banks_per_channel),
      channel_busy_until(cfg.channels, 0) {}

BankCoord bank_coord(const MemoryDeviceConfig& cfg, std::uint64_t local_addr) {
  // 8 KiB rows, consecutive rows rotate across channels then banks.
  const std::uint64_t row_id = local_addr >> 13;
  BankCoord c;
  c.channel = static_cast<std::uint32_t>(row_id % cfg.channels);
  c.bank = static_cast<std::uint32_t>((row_id / cfg.channels) % cfg.banks_per_channel);
  c.row = static_cast<std::int64_t>(row_id / (static_cast<std::uint64_t>(cfg.channels) * cfg.banks_per_channel));
  return c;
}

namespace {

struct Access {
  BankCoord at;
  bool hit;
  Tick activate;  // precharge + activate portion, zero on a hit
  Tick cas;
};

Access classify(const MemoryDeviceConfig& cfg, const DeviceState& state, std::uint64_t addr) {
  Access a;
  a.at = bank_coord(cfg, addr);
  const auto& bank = state.banks[a.at.channel * cfg.banks_per_channel + a.at.bank];
  a.hit = bank.open_row == a.at.row;
  const auto& t = cfg.timing;
  a.cas = from_ns(t.cl * t.tck_ns);
  a.activate = a.hit ? 0 : from_ns((t.trp + t.trcd) * t.tck_ns);
  return a;
}

}  // namespace

Tick service_latency(const MemoryDeviceConfig& cfg, DeviceState& state, const MemRequest& req) {
  Access a = classify(cfg, state, req.addr);
  state.banks[a.at.channel * cfg.banks_per_channel + a.at.bank].open_row = a.at.row;
  return a.activate + a.cas + transfer_ticks(req.size_bytes, cfg.link_bandwidth_bytes_per_ns) +
         from_ns(cfg.extra_access_latency_ns);
}

Tick device_submit(const MemoryDeviceConfig& cfg, DeviceState& state, const MemRequest& req, Tick now) {
  Access a = classify(cfg, state, req.addr);
  auto& bank = state.banks[a.at.channel * cfg.banks_per_channel + a.at.bank];
  const Tick start = std::max(now, bank.busy_until);
  bank.busy_until = start + a.activate;
  bank.open_row = a.at.row;
  const Tick data_ready = start + a.activate + a.cas;

  const Tick xfer = transfer_ticks(req.size_bytes, cfg.link_bandwidth_bytes_per_ns);
  Tick& bus = state.channel_busy_until[a.at.channel];
  const Tick bus_start = std::max(data_ready, bus);
  bus = bus_start + xfer;

  ++state.accesses;
  state.bytes += req.size_bytes;
  state.bus_busy_ticks += xfer;
  return bus + from_ns(cfg.extra_access_latency_ns);
}

double bandwidth_utilization(const MemoryDeviceConfig& cfg, const DeviceState& state, Tick window) {
  if (window <= 0) throw ConfigError("bandwidth window must be positive");
  const double cap = static_cast<double>(cfg.channels) * cfg.link_bandwidth_bytes_per_ns * to_ns(window);
  return std::clamp(static_cast<double>(state.bytes) / cap, 0.0, 1.0);
}

}  // namespace pifs
