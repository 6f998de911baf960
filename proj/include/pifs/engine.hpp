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

#include "pifs/systems.hpp"
#include "pifs/workload.hpp"

namespace pifs {

enum class EventKind {
  HostIssue,
  HostRead,
  HostArrival,
  SwitchIngress,
  MemSubmit,
  MemComplete,
  DataArrival,
  Egress,
  InterSwitchDelivery,
  ResultArrival,
  MigrationStart,
  MigrationEnd,
  EpochBoundary,
};

struct Event {
  Tick time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::HostIssue;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint64_t c = 0;
};

struct RunMetrics {
  std::string system;
  double total_latency_ns = 0.0;
  std::vector<double> per_batch_latency_ns;
  std::vector<std::string> device_ids;
  std::vector<std::uint64_t> per_device_access_counts;
  std::vector<double> bandwidth_utilization;
  std::uint64_t requests = 0;
  std::uint64_t lookups = 0;
  std::uint64_t buffer_accesses = 0;
  std::uint64_t buffer_hits = 0;
  double buffer_hit_ratio = 0.0;
  double migration_stall_ns = 0.0;
  double migration_cost_fraction = 0.0;
  std::uint64_t migrated_pages = 0;
  std::uint64_t epochs = 0;
  double spread_stddev_before = 0.0;  // CXL device counts, first epoch with a spread plan
  double spread_stddev_after = 0.0;   // same counts with that plan applied
  std::uint64_t cross_link_bytes = 0;
  std::uint64_t discards = 0;
  std::uint64_t events = 0;
  double result_checksum = 0.0;
  double max_result_rel_error = 0.0;

  // Per-request SLS results in request order, only when requested.
  std::vector<std::vector<float>> results;

  bool operator==(const RunMetrics&) const = default;
};

struct RunOptions {
  bool keep_results = false;
};

RunMetrics run_simulation(const SystemConfig& system, const Trace& trace, std::uint64_t seed,
                          const RunOptions& opts = {});

// Amdahl weighting of an SLS speedup into an end-to-end one.
double end_to_end_speedup(double sls_speedup, double sls_fraction);

// SLS requests of a trace: one per (batch, table, sample), in issue order.
struct SlsRequest {
  std::uint32_t batch = 0;
  std::uint32_t table = 0;
  std::uint32_t first = 0;  // index into the table's idx list
  std::uint32_t count = 0;
};
std::vector<SlsRequest> split_requests(const Trace& trace);

}  // namespace pifs
