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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pifs/common.hpp"

namespace pifs {

struct ModelConfig {
  std::string name;
  std::uint32_t num_tables = 8;
  std::uint64_t embeddings_per_table = 0;
  std::uint32_t embedding_dim_bytes = 0;  // FP32 dim * 4
  std::uint32_t pooling_factor = 8;       // lookups per table per sample
  std::uint32_t batch_size = 1024;

  // Throws ConfigError when an invariant is broken.
  void validate() const;

  std::uint32_t floats_per_row() const { return embedding_dim_bytes / 4; }
  std::uint64_t table_bytes() const { return embeddings_per_table * embedding_dim_bytes; }
  std::uint64_t pages_per_table() const { return (table_bytes() + kPageBytes - 1) / kPageBytes; }
  std::uint64_t num_pages() const { return pages_per_table() * num_tables; }
  std::uint64_t footprint_bytes() const { return num_pages() * kPageBytes; }

  // Flat physical layout: tables are page aligned and laid out back to back.
  std::uint64_t row_address(std::uint32_t table, std::uint64_t row) const {
    return table * pages_per_table() * kPageBytes + row * embedding_dim_bytes;
  }

  bool operator==(const ModelConfig&) const = default;
};

// RMC1..RMC4 with embedding counts and dims from the model table.
ModelConfig load_model_preset(const std::string& name);

struct TableLookups {
  std::vector<std::uint64_t> idx;
  std::optional<std::vector<float>> weights;

  float weight(std::size_t i) const { return weights ? (*weights)[i] : 1.0F; }
  bool operator==(const TableLookups&) const = default;
};

struct LookupBatch {
  std::uint64_t batch_id = 0;
  std::vector<TableLookups> tables;  // indexed by table

  bool operator==(const LookupBatch&) const = default;
};

struct Distribution {
  enum class Kind { Zipfian, Normal, Uniform, Random };
  Kind kind = Kind::Zipfian;
  double zipf_s = 1.0;
  double normal_mu = 0.5;       // centre, as a fraction of the table
  double normal_sigma = 0.125;  // spread, as a fraction of the table

  static Distribution zipfian(double s) { return {Kind::Zipfian, s, 0.5, 0.125}; }
  static Distribution normal(double mu, double sigma) { return {Kind::Normal, 1.0, mu, sigma}; }
  static Distribution uniform() { return {Kind::Uniform, 1.0, 0.5, 0.125}; }
  static Distribution random() { return {Kind::Random, 1.0, 0.5, 0.125}; }

  void validate() const;
  std::string to_string() const;
  bool operator==(const Distribution&) const = default;
};

// Accepts "zipf:<s>", "normal:<mu>:<sigma>", "uniform", "random".
Distribution parse_distribution(const std::string& text);

struct TraceOrigin {
  bool synthetic = false;
  Distribution dist;
  std::uint64_t seed = 0;
  bool operator==(const TraceOrigin&) const = default;
};

struct Trace {
  ModelConfig model;
  std::vector<LookupBatch> batches;
  TraceOrigin origin;

  std::uint64_t total_lookups() const;
  bool operator==(const Trace&) const = default;
};

struct TraceStats {
  std::uint64_t total_lookups = 0;
  std::uint64_t unique_rows = 0;
  std::uint64_t footprint_bytes = 0;
  std::vector<std::uint64_t> per_table_access_histogram;
  double top_k_row_share = 0.0;  // share of accesses landing on the top 1% of touched rows
};

// Canonical line-delimited trace format: one JSON header line, one JSON line per batch.
Trace parse_trace(std::istream& in, const ModelConfig& model);
void emit_trace(const Trace& trace, std::ostream& out);

Trace synthesize_trace(const ModelConfig& model, const Distribution& dist, std::uint64_t num_batches,
                       std::uint64_t seed, bool weighted = false);

TraceStats trace_stats(const Trace& trace);

// Zipf rank -> row index. Ranks are scattered over the table by an affine
// bijection so the hottest rows do not share a page.
std::uint64_t zipf_rank_to_row(std::uint64_t rank, std::uint64_t rows, std::uint32_t table);

// Deterministic synthetic embedding content in [-1, 1).
float embedding_value(std::uint32_t table, std::uint64_t row, std::uint32_t element);

// Direct SLS reference: sum_i w_i * row_i, accumulated in double then rounded.
std::vector<float> reference_sls(const ModelConfig& model, std::uint32_t table,
                                 const std::vector<std::uint64_t>& rows, const std::vector<float>& weights);

}  // namespace pifs
