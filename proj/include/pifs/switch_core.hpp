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
#include <deque>
#include <list>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pifs/common.hpp"

namespace pifs {

enum class MemOpcode { StdMemRd, StdMemWr, PifsAccumFetch, PifsAcrConfig };

struct CxlInstruction {
  MemOpcode mem_opcode = MemOpcode::StdMemRd;
  std::uint64_t address = 0;  // result address for PifsAcrConfig
  std::uint32_t spid = 0;
  std::uint32_t sumtag = 0;
  std::uint8_t vectorsize = 0;  // 3-bit code, 2^code chunks of 16 B
  float weight = 1.0F;
  std::uint32_t sum_candidate_count = 0;
};

std::uint8_t encode_vectorsize(std::uint32_t bytes);  // ConfigError if not encodable
inline std::uint32_t vector_bytes(std::uint8_t code) { return kChunkBytes << code; }

enum class CoreRoute { Bypass, ProcessCore };
CoreRoute check_memopcode(const CxlInstruction& instr);

struct AcrEntry {
  std::uint32_t sumtag = 0;
  std::uint32_t remaining = 0;
  std::uint64_t result_address = 0;
  std::vector<double> accum;  // wide partial-sum register, rounded to FP32 on egress
  Tick created_at = 0;
};

struct AcrFile {
  std::uint32_t capacity = 64;
  std::unordered_map<std::uint32_t, AcrEntry> entries;

  std::uint32_t in_use() const { return static_cast<std::uint32_t>(entries.size()); }
};

enum class AcrStatus { Configured, BackPressure };
AcrStatus configure_acr(AcrFile& file, const CxlInstruction& instr, Tick now);

struct IirEntry {
  std::uint64_t address = 0;
  CxlInstruction instruction;  // the original fetch, pre-repack
};

class Iir {
 public:
  explicit Iir(std::uint32_t capacity = 512) : capacity_(capacity) {}
  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t size() const { return size_; }
  bool full() const { return size_ >= capacity_; }
  bool pending(std::uint64_t addr) const { return by_addr_.count(addr) != 0; }
  // Returns true when another entry already waits on the address (no new memory read needed).
  bool insert(const IirEntry& e);
  // All entries waiting on `addr`, in insertion order. OrphanDataError when none.
  std::vector<IirEntry> take(std::uint64_t addr);

 private:
  std::uint32_t capacity_;
  std::uint32_t size_ = 0;
  std::unordered_map<std::uint64_t, std::vector<IirEntry>> by_addr_;
};

struct RepackResult {
  bool accepted = false;   // false: back-pressure, IIR full
  bool coalesced = false;  // an earlier read of the same address is in flight
  CxlInstruction out;
};
RepackResult repack(const CxlInstruction& instr, std::uint32_t switch_spid, Iir& iir);

enum class BufferPolicy { HTR, LRU, FIFO };
const char* to_string(BufferPolicy p);
BufferPolicy parse_buffer_policy(const std::string& s);

struct BufferConfig {
  bool enabled = false;
  std::uint64_t capacity_bytes = 512 * 1024;
  BufferPolicy policy = BufferPolicy::HTR;
  std::uint32_t refresh_period = 4096;
  double hit_latency_ns = 2.0;
  double profiler_decay = 0.5;
  // Extra hit latency per doubling of capacity beyond 64 KiB (larger SRAM arrays are slower).
  double latency_penalty_ns_per_doubling = 0.0;

  bool operator==(const BufferConfig&) const = default;
};

class OnSwitchBuffer {
 public:
  OnSwitchBuffer(const BufferConfig& cfg, std::uint32_t entry_bytes);

  // Hit latency on a hit, nullopt on a miss.
  std::optional<Tick> access(std::uint64_t row_addr);

  std::uint64_t hits() const { return hits_; }
  std::uint64_t accesses() const { return accesses_; }
  double hit_ratio() const { return accesses_ ? static_cast<double>(hits_) / accesses_ : 0.0; }
  std::size_t resident_count() const;
  std::uint64_t capacity_entries() const { return slots_; }
  bool resident(std::uint64_t row_addr) const;
  Tick hit_latency() const { return hit_latency_; }

 private:
  void refresh();

  BufferConfig cfg_;
  std::uint64_t slots_;
  Tick hit_latency_;
  std::uint64_t accesses_ = 0;
  std::uint64_t hits_ = 0;
  std::unordered_map<std::uint64_t, double> profile_;
  std::unordered_set<std::uint64_t> htr_;
  std::list<std::uint64_t> order_;  // LRU: front = most recent; FIFO: front = newest
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where_;
};

struct SwapRegisterBank {
  std::uint32_t slots = 4;
  std::list<std::uint32_t> occupied;  // front = most recently parked

  bool contains(std::uint32_t tag) const;
  void erase(std::uint32_t tag);
};

struct CoreFlags {
  bool ooo_enabled = true;
  bool spill_enabled = true;
  std::uint32_t stall_cycles = 4;  // swap full and spill path disabled
};

struct StepResult {
  std::uint32_t cycles = 0;
  std::optional<std::uint32_t> new_active;
};

struct Candidate {
  std::uint32_t sumtag = 0;
  const float* data = nullptr;  // may be null for timing-only runs
  std::uint32_t length = 0;
  float weight = 1.0F;
};

StepResult accumulate_step(AcrFile& file, SwapRegisterBank& swap, std::optional<std::uint32_t> active,
                           const Candidate& incoming, const CoreFlags& flags);

struct HostWriteMessage {
  std::uint32_t sumtag = 0;
  std::uint64_t result_address = 0;
  std::uint32_t bytes = 0;
  std::vector<double> data;
};

HostWriteMessage egress_result(AcrFile& file, SwapRegisterBank& swap, std::uint32_t sumtag, Tick now);

// Process-core bundle owned by one fabric switch.
struct SwitchCore {
  std::uint32_t switch_spid = 0;
  AcrFile acr;
  Iir iir;
  SwapRegisterBank swap;
  CoreFlags flags;
  std::optional<std::uint32_t> active;

  struct Arrival {
    std::uint32_t cycles = 0;
    std::vector<std::uint32_t> completed;  // sumtags whose counter reached zero
    std::uint32_t matched = 0;
  };
  // Consumes every IIR entry waiting on addr and accumulates the row into each.
  Arrival on_data_arrival(std::uint64_t addr, const float* data, std::uint32_t length);
};

}  // namespace pifs
