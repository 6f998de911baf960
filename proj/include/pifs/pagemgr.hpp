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
#include <optional>
#include <string>
#include <vector>

#include "pifs/common.hpp"
#include "pifs/memsys.hpp"

namespace pifs {

enum class MigrationMode { PageBlock, CacheLineGranular };
const char* to_string(MigrationMode m);
MigrationMode parse_migration_mode(const std::string& s);

struct PmConfig {
  std::uint64_t epoch_length_accesses = 65536;
  double cold_age_threshold = 0.20;
  double migrate_threshold = 0.35;
  MigrationMode migration_mode = MigrationMode::PageBlock;
  double page_block_cost_ns = 500.0;
  double cacheline_block_cost_ns = 50.0;
  std::uint32_t max_spread_iterations = 64;
  std::uint32_t max_swaps_per_epoch = 1024;

  void validate() const;
  bool operator==(const PmConfig&) const = default;
};

// Per-epoch access counters, dense over pages.
class HeatState {
 public:
  HeatState(std::uint32_t num_hosts, std::uint64_t num_pages);

  // True when this access closes an epoch.
  bool record_access(std::uint32_t host, std::uint64_t page_id, const PmConfig& cfg);

  std::uint32_t num_hosts() const { return hosts_; }
  std::uint64_t num_pages() const { return pages_; }
  std::uint64_t total(std::uint64_t page) const { return total_[page]; }
  std::uint64_t count(std::uint32_t host, std::uint64_t page) const { return per_host_[host * pages_ + page]; }
  const std::vector<std::uint64_t>& touched() const { return touched_; }
  std::uint64_t epoch_accesses() const { return epoch_accesses_; }
  std::uint64_t epochs() const { return epochs_; }

  void reset_epoch();

 private:
  std::uint32_t hosts_;
  std::uint64_t pages_;
  std::vector<std::uint32_t> total_;
  std::vector<std::uint32_t> per_host_;
  std::vector<std::uint64_t> touched_;
  std::uint64_t epoch_accesses_ = 0;
  std::uint64_t epochs_ = 0;
};

struct PageMove {
  std::uint64_t page = 0;
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  // Set when the move is half of an exchange with a page already on `to`.
  std::optional<std::uint64_t> swap_with;
};

struct MigrationPlan {
  std::vector<PageMove> moves;
  double estimated_cost_ns = 0.0;

  bool empty() const { return moves.empty(); }
  // Number of 4 KiB copies the plan performs (an exchange copies two pages).
  std::uint64_t page_copies() const;
};

// Private-hot / public-cold exchange per host. Local DRAM pages are the owner's private hot region.
MigrationPlan classify_epoch(const HeatState& heat, const AddressMap& map,
                             const std::vector<MemoryDeviceConfig>& devices, const PmConfig& cfg);

// Indices (into counts) of devices whose count exceeds the others' average by (1 - migrate_threshold).
std::vector<std::size_t> detect_overburdened(const std::vector<std::uint64_t>& counts, const PmConfig& cfg);

// Epoch access counts per device (all devices, indexed like `devices`).
std::vector<std::uint64_t> device_counts(const HeatState& heat, const AddressMap& map, std::size_t num_devices);

MigrationPlan plan_spread(const HeatState& heat, const AddressMap& map,
                          const std::vector<MemoryDeviceConfig>& devices, const PmConfig& cfg);

// Applies the plan to a scratch count vector, as plan_spread assumes.
std::vector<std::uint64_t> projected_counts(const HeatState& heat, const AddressMap& map, std::size_t num_devices,
                                            const MigrationPlan& plan);

struct MigrationWindow {
  std::uint64_t page = 0;
  PageEntry old_location;
  Tick start = 0;
  Tick line_copy = 0;  // per 64 B line
  Tick block_cost = 0;
  MigrationMode mode = MigrationMode::PageBlock;

  Tick end() const;
  // Time at which line `line` becomes readable at the new location.
  Tick line_ready(std::uint32_t line) const;
  // Stall experienced by an access touching bytes [offset, offset+len) of the page at time t.
  Tick stall(std::uint32_t offset, std::uint32_t len, Tick t) const;
};

// Remaps pages in `map` and returns the blocking windows. Copies run back to back
// starting at `now`. Throws CapacityError if a destination is full.
std::vector<MigrationWindow> execute_migration(const MigrationPlan& plan, const PmConfig& cfg, Tick now,
                                               AddressMap& map, const std::vector<MemoryDeviceConfig>& devices);

}  // namespace pifs
