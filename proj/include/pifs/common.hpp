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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pifs {

// Simulated time in picoseconds. DRAM timings are multiples of tCK = 0.625 ns,
// so a picosecond grid keeps every latency exact.
using Tick = std::int64_t;

inline constexpr Tick kTicksPerNs = 1000;
inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr std::uint32_t kChunkBytes = 16;
inline constexpr std::uint32_t kLineBytes = 64;

inline Tick from_ns(double ns) { return static_cast<Tick>(std::llround(ns * kTicksPerNs)); }
inline double to_ns(Tick t) { return static_cast<double>(t) / kTicksPerNs; }

// Time to move `bytes` over a port of `bytes_per_ns`.
inline Tick transfer_ticks(std::uint64_t bytes, double bytes_per_ns) {
  return from_ns(static_cast<double>(bytes) / bytes_per_ns);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define PIFS_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    const char* kind() const noexcept override { return #Name; }       \
  }

PIFS_DEFINE_ERROR(NotFound);
PIFS_DEFINE_ERROR(ConfigError);
PIFS_DEFINE_ERROR(CapacityError);
PIFS_DEFINE_ERROR(FaultError);
PIFS_DEFINE_ERROR(ProtocolError);
PIFS_DEFINE_ERROR(OrphanDataError);
PIFS_DEFINE_ERROR(IoError);
PIFS_DEFINE_ERROR(UsageError);

#undef PIFS_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  const char* kind() const noexcept override { return "ParseError"; }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  RangeError(std::uint64_t batch, std::uint32_t table, std::uint64_t index)
      : Error("row index " + std::to_string(index) + " out of range (batch " +
              std::to_string(batch) + ", table " + std::to_string(table) + ")"),
        batch_(batch), table_(table), index_(index) {}
  const char* kind() const noexcept override { return "RangeError"; }
  std::uint64_t batch() const { return batch_; }
  std::uint32_t table() const { return table_; }
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t batch_;
  std::uint32_t table_;
  std::uint64_t index_;
};

// splitmix64 finalizer; used for hashing and deterministic embedding values.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace pifs
