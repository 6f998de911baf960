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

#include "pifs/switch_core.hpp"

#include <algorithm>
#include <cmath>

namespace pifs {

std::uint8_t encode_vectorsize(std::uint32_t bytes) {
  for (std::uint8_t code = 0; code < 8; ++code) {
    if (vector_bytes(code) == bytes) return code;
  }
  throw ConfigError("vector of " + std::to_string(bytes) + " bytes is not encodable in 3 bits");
}

CoreRoute check_memopcode(const CxlInstruction& instr) {
  switch (instr.mem_opcode) {
    case MemOpcode::StdMemRd:
    case MemOpcode::StdMemWr:
      return CoreRoute::Bypass;
    case MemOpcode::PifsAccumFetch:
    case MemOpcode::PifsAcrConfig:
      return CoreRoute::ProcessCore;
  }
  return CoreRoute::Bypass;
}

AcrStatus configure_acr(AcrFile& file, const CxlInstruction& instr, Tick now) {
  if (instr.mem_opcode != MemOpcode::PifsAcrConfig) throw ProtocolError("configure_acr needs a PifsAcrConfig");
  if (instr.sum_candidate_count == 0) throw ProtocolError("SumCandidateCount must be positive");
  if (file.entries.count(instr.sumtag)) {
    throw ProtocolError("sumtag " + std::to_string(instr.sumtag) + " is already live");
  }
  if (file.in_use() >= file.capacity) return AcrStatus::BackPressure;
  AcrEntry e;
  e.sumtag = instr.sumtag;
  e.remaining = instr.sum_candidate_count;
  e.result_address = instr.address;
  e.accum.assign(vector_bytes(instr.vectorsize) / 4, 0.0);
  e.created_at = now;
  file.entries.emplace(instr.sumtag, std::move(e));
  return AcrStatus::Configured;
}

// ---------------------------------------------------------------------------

bool Iir::insert(const IirEntry& e) {
  auto& v = by_addr_[e.address];
  const bool coalesced = !v.empty();
  v.push_back(e);
  ++size_;
  return coalesced;
}

std::vector<IirEntry> Iir::take(std::uint64_t addr) {
  auto it = by_addr_.find(addr);
  if (it == by_addr_.end()) throw OrphanDataError("no IIR entry for address " + std::to_string(addr));
  std::vector<IirEntry> out = std::move(it->second);
  by_addr_.erase(it);
  size_ -= static_cast<std::uint32_t>(out.size());
  return out;
}

RepackResult repack(const CxlInstruction& instr, std::uint32_t switch_spid, Iir& iir) {
  if (instr.mem_opcode != MemOpcode::PifsAccumFetch) throw ProtocolError("only PifsAccumFetch is repacked");
  RepackResult r;
  if (iir.full()) return r;
  r.accepted = true;
  r.coalesced = iir.insert(IirEntry{instr.address, instr});
  r.out = instr;
  r.out.mem_opcode = MemOpcode::StdMemRd;
  r.out.spid = switch_spid;
  return r;
}

// ---------------------------------------------------------------------------

const char* to_string(BufferPolicy p) {
  switch (p) {
    case BufferPolicy::HTR: return "htr";
    case BufferPolicy::LRU: return "lru";
    case BufferPolicy::FIFO: return "fifo";
  }
  return "?";
}

BufferPolicy parse_buffer_policy(const std::string& s) {
  if (s == "htr" || s == "HTR") return BufferPolicy::HTR;
  if (s == "lru" || s == "LRU") return BufferPolicy::LRU;
  if (s == "fifo" || s == "FIFO") return BufferPolicy::FIFO;
  throw ConfigError("unknown buffer policy '" + s + "'");
}

OnSwitchBuffer::OnSwitchBuffer(const BufferConfig& cfg, std::uint32_t entry_bytes)
    : cfg_(cfg), slots_(cfg.capacity_bytes / std::max<std::uint32_t>(entry_bytes, 1)) {
  if (cfg.refresh_period == 0) throw ConfigError("buffer refresh period must be positive");
  if (!(cfg.profiler_decay >= 0.0 && cfg.profiler_decay <= 1.0)) throw ConfigError("profiler decay must lie in [0,1]");
  double extra = 0.0;
  const double base = 64.0 * 1024.0;
  if (cfg.capacity_bytes > base) extra = cfg.latency_penalty_ns_per_doubling * std::log2(cfg.capacity_bytes / base);
  hit_latency_ = from_ns(cfg.hit_latency_ns + extra);
}

std::size_t OnSwitchBuffer::resident_count() const {
  return cfg_.policy == BufferPolicy::HTR ? htr_.size() : where_.size();
}

bool OnSwitchBuffer::resident(std::uint64_t row_addr) const {
  return cfg_.policy == BufferPolicy::HTR ? htr_.count(row_addr) != 0 : where_.count(row_addr) != 0;
}

std::optional<Tick> OnSwitchBuffer::access(std::uint64_t row_addr) {
  ++accesses_;
  profile_[row_addr] += 1.0;
  bool hit = false;

  switch (cfg_.policy) {
    case BufferPolicy::HTR:
      hit = htr_.count(row_addr) != 0;
      // Between refreshes a miss may only take a slot nobody holds.
      if (!hit && htr_.size() < slots_) htr_.insert(row_addr);
      if (accesses_ % cfg_.refresh_period == 0) refresh();
      break;
    case BufferPolicy::LRU: {
      auto it = where_.find(row_addr);
      if (it != where_.end()) {
        hit = true;
        order_.splice(order_.begin(), order_, it->second);
      } else if (slots_ > 0) {
        if (where_.size() >= slots_) {
          where_.erase(order_.back());
          order_.pop_back();
        }
        order_.push_front(row_addr);
        where_[row_addr] = order_.begin();
      }
      break;
    }
    case BufferPolicy::FIFO: {
      if (where_.count(row_addr)) {
        hit = true;
      } else if (slots_ > 0) {
        if (where_.size() >= slots_) {
          where_.erase(order_.back());
          order_.pop_back();
        }
        order_.push_front(row_addr);
        where_[row_addr] = order_.begin();
      }
      break;
    }
  }
  if (hit) ++hits_;
  if (hit) return hit_latency_;
  return std::nullopt;
}

void OnSwitchBuffer::refresh() {
  std::vector<std::pair<double, std::uint64_t>> ranked;
  ranked.reserve(profile_.size());
  for (const auto& [addr, n] : profile_) ranked.emplace_back(n, addr);
  auto better = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  const std::size_t k = std::min<std::size_t>(slots_, ranked.size());
  if (k < ranked.size()) std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(), better);
  htr_.clear();
  for (std::size_t i = 0; i < k; ++i) htr_.insert(ranked[i].second);

  for (auto it = profile_.begin(); it != profile_.end();) {
    it->second *= cfg_.profiler_decay;
    // Forget rows whose history has decayed to noise; keeps the profiler bounded.
    if (it->second < 1.0 / 64.0) {
      it = profile_.erase(it);
    } else {
      ++it;
    }
  }
}

// ---------------------------------------------------------------------------

bool SwapRegisterBank::contains(std::uint32_t tag) const {
  return std::find(occupied.begin(), occupied.end(), tag) != occupied.end();
}

void SwapRegisterBank::erase(std::uint32_t tag) { occupied.remove(tag); }

StepResult accumulate_step(AcrFile& file, SwapRegisterBank& swap, std::optional<std::uint32_t> active,
                           const Candidate& incoming, const CoreFlags& flags) {
  auto it = file.entries.find(incoming.sumtag);
  if (it == file.entries.end()) throw ProtocolError("no live ACR entry for sumtag " + std::to_string(incoming.sumtag));
  AcrEntry& e = it->second;
  if (e.remaining == 0) throw ProtocolError("sumtag " + std::to_string(incoming.sumtag) + " already complete");

  StepResult r;
  r.cycles = 1;
  if (active && *active != incoming.sumtag && file.entries.count(*active)) {
    // The resident partial has to leave the accumulation register.
    const std::uint32_t slots = flags.ooo_enabled ? swap.slots : 0;
    if (swap.contains(incoming.sumtag)) swap.erase(incoming.sumtag);
    if (swap.occupied.size() < slots) {
      swap.occupied.push_front(*active);
    } else if (flags.spill_enabled) {
      r.cycles += 2;
      if (slots > 0) {
        swap.occupied.pop_back();
        swap.occupied.push_front(*active);
      }
    } else {
      r.cycles += flags.stall_cycles;
    }
  }

  if (incoming.data) {
    const std::uint32_t n = std::min<std::uint32_t>(incoming.length, static_cast<std::uint32_t>(e.accum.size()));
    const double w = incoming.weight;
    for (std::uint32_t i = 0; i < n; ++i) e.accum[i] += w * static_cast<double>(incoming.data[i]);
  }
  --e.remaining;
  r.new_active = incoming.sumtag;
  return r;
}

HostWriteMessage egress_result(AcrFile& file, SwapRegisterBank& swap, std::uint32_t sumtag, Tick) {
  auto it = file.entries.find(sumtag);
  if (it == file.entries.end()) throw ProtocolError("egress of unknown sumtag " + std::to_string(sumtag));
  if (it->second.remaining != 0) {
    throw ProtocolError("egress of sumtag " + std::to_string(sumtag) + " with " +
                        std::to_string(it->second.remaining) + " candidates outstanding");
  }
  HostWriteMessage m;
  m.sumtag = sumtag;
  m.result_address = it->second.result_address;
  m.bytes = static_cast<std::uint32_t>(it->second.accum.size() * 4);
  m.data = std::move(it->second.accum);
  file.entries.erase(it);
  swap.erase(sumtag);
  return m;
}

SwitchCore::Arrival SwitchCore::on_data_arrival(std::uint64_t addr, const float* data, std::uint32_t length) {
  Arrival a;
  for (const IirEntry& e : iir.take(addr)) {
    Candidate c{e.instruction.sumtag, data, length, e.instruction.weight};
    StepResult s = accumulate_step(acr, swap, active, c, flags);
    a.cycles += s.cycles;
    active = s.new_active;
    ++a.matched;
    if (acr.entries.at(c.sumtag).remaining == 0) {
      a.completed.push_back(c.sumtag);
      if (active == c.sumtag) active.reset();
    }
  }
  return a;
}

}  // namespace pifs
