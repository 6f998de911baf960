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

#include "pifs/common.hpp"
#include "pifs/workload.hpp"

namespace pifs {

enum class DeviceKind { LocalDram, CxlExpander };

struct DramTiming {
  double tck_ns = 0.625;
  std::uint32_t cl = 28;
  std::uint32_t trcd = 28;
  std::uint32_t trp = 28;
  std::uint32_t tras = 52;
  bool operator==(const DramTiming&) const = default;
};

struct MemoryDeviceConfig {
  std::string device_id;
  DeviceKind kind = DeviceKind::LocalDram;
  std::uint64_t capacity_bytes = 0;
  std::uint32_t channels = 1;
  std::uint32_t banks_per_channel = 16;
  DramTiming timing;
  double link_bandwidth_bytes_per_ns = 64.0;  // per channel
  double extra_access_latency_ns = 0.0;
  std::uint32_t switch_id = 0;  // CXL devices: switch they hang off
  std::uint32_t owner_host = 0; // local DRAM: host socket it belongs to

  std::uint64_t frames() const { return capacity_bytes / kPageBytes; }
  bool operator==(const MemoryDeviceConfig&) const = default;
};

MemoryDeviceConfig default_local_dram(const std::string& id);
MemoryDeviceConfig default_cxl_expander(const std::string& id);

struct Placement {
  enum class Kind { AllLocal, AllCxl, Interleave, LocalFirst };
  Kind kind = Kind::Interleave;
  double dram_share = 0.8;  // Interleave only

  static Placement all_local() { return {Kind::AllLocal, 1.0}; }
  static Placement all_cxl() { return {Kind::AllCxl, 0.0}; }
  static Placement interleave(double s) { return {Kind::Interleave, s}; }
  static Placement local_first() { return {Kind::LocalFirst, 1.0}; }

  std::string to_string() const;
  bool operator==(const Placement&) const = default;
};

// "all_local", "all_cxl", "local_first", "interleave:<share>"
Placement parse_placement(const std::string& text);

struct PageEntry {
  std::uint32_t device = 0;  // index into the device list
  std::uint64_t frame = 0;
};

class AddressMap {
 public:
  AddressMap() = default;
  AddressMap(std::vector<std::uint64_t> device_frames);

  std::uint64_t num_pages() const { return pages_.size(); }
  std::size_t num_devices() const { return free_.size(); }
  const PageEntry& page(std::uint64_t page_id) const;
  std::uint64_t pages_on(std::uint32_t device) const { return used_[device]; }
  std::uint64_t free_frames(std::uint32_t device) const;

  // Appends a page on `device`; throws CapacityError when it is full.
  void append(std::uint32_t device);
  // Remaps a page; old frame is released. Throws CapacityError.
  void move(std::uint64_t page_id, std::uint32_t device);
  // Exchanges the frames of two pages.
  void swap(std::uint64_t a, std::uint64_t b);

  // (device index, device-local byte address)
  std::pair<std::uint32_t, std::uint64_t> locate(std::uint64_t addr) const;

  // Checks the one-page-per-frame and capacity invariants.
  bool consistent() const;

 private:
  std::uint64_t take_frame(std::uint32_t device);

  std::vector<PageEntry> pages_;
  std::vector<std::uint64_t> capacity_;
  std::vector<std::uint64_t> next_;
  std::vector<std::vector<std::uint64_t>> free_;
  std::vector<std::uint64_t> used_;
};

// local_first_cap: bytes of local DRAM filled first under LocalFirst.
AddressMap build_address_map(const ModelConfig& model, const std::vector<MemoryDeviceConfig>& devices,
                             const Placement& policy, std::uint64_t local_first_cap = 0);

struct MemRequest {
  std::uint64_t addr = 0;  // device-local
  std::uint32_t size_bytes = 64;
  std::uint32_t requester = 0;
  Tick issue_time = 0;
};

struct DeviceState {
  struct Bank {
    std::int64_t open_row = -1;
    Tick busy_until = 0;
  };
  std::vector<Bank> banks;              // channel-major
  std::vector<Tick> channel_busy_until; // data bus
  std::uint64_t accesses = 0;
  std::uint64_t bytes = 0;
  Tick bus_busy_ticks = 0;

  explicit DeviceState(const MemoryDeviceConfig& cfg);
};

struct BankCoord {
  std::uint32_t channel;
  std::uint32_t bank;
  std::int64_t row;
};
BankCoord bank_coord(const MemoryDeviceConfig& cfg, std::uint64_t local_addr);

// Unqueued latency of one access; opens the addressed row.
Tick service_latency(const MemoryDeviceConfig& cfg, DeviceState& state, const MemRequest& req);

// FCFS per bank for activation, FCFS per channel for the data bus. Returns completion time.
Tick device_submit(const MemoryDeviceConfig& cfg, DeviceState& state, const MemRequest& req, Tick now);

double bandwidth_utilization(const MemoryDeviceConfig& cfg, const DeviceState& state, Tick window);

}  // namespace pifs
