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

#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "pifs/memsys.hpp"
#include "pifs/systems.hpp"
#include "pifs/workload.hpp"

using namespace pifs;

namespace {

ModelConfig small_model(const char* name = "RMC1", std::uint32_t tables = 2, std::uint32_t batch = 4) {
  ModelConfig m = load_model_preset(name);
  m.num_tables = tables;
  m.batch_size = batch;
  return m;
}

}  // namespace

TEST_CASE("model presets keep the table geometry") {
  const auto m1 = load_model_preset("RMC1");
  CHECK(m1.embeddings_per_table == 16384);
  CHECK(m1.embedding_dim_bytes == 256);
  CHECK(m1.pages_per_table() == 16384 * 256 / 4096);
  const auto m4 = load_model_preset("RMC4");
  CHECK(m4.embedding_dim_bytes == 512);
  CHECK(m4.row_address(1, 3) == m4.pages_per_table() * 4096 + 3 * 512);
  CHECK_THROWS_AS(load_model_preset("RMC9"), NotFound);
}

TEST_CASE("model validation rejects rows the vectorsize code cannot express") {
  ModelConfig m = small_model();
  m.embedding_dim_bytes = 48;  // three chunks
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.embedding_dim_bytes = 4096;  // 256 chunks
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.embedding_dim_bytes = 2048;
  CHECK_NOTHROW(m.validate());
  m.num_tables = 0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("distribution specs parse and round trip") {
  CHECK(parse_distribution("zipf:1.2") == Distribution::zipfian(1.2));
  CHECK(parse_distribution("normal:0.3:0.1") == Distribution::normal(0.3, 0.1));
  CHECK(parse_distribution("uniform").kind == Distribution::Kind::Uniform);
  CHECK(parse_distribution("random").kind == Distribution::Kind::Random);
  CHECK(parse_distribution(parse_distribution("zipf:0.9").to_string()) == Distribution::zipfian(0.9));
  CHECK_THROWS_AS(parse_distribution("zipf:-1"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("zipf:abc"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("pareto"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("normal:0.5:0"), ConfigError);
}

TEST_CASE("synthesis is a pure function of its inputs") {
  const auto m = small_model();
  const auto a = synthesize_trace(m, Distribution::zipfian(1.0), 3, 42);
  const auto b = synthesize_trace(m, Distribution::zipfian(1.0), 3, 42);
  const auto c = synthesize_trace(m, Distribution::zipfian(1.0), 3, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.total_lookups() == 3ULL * 2 * 4 * 8);
  for (const auto& batch : a.batches) {
    for (const auto& tl : batch.tables) {
      CHECK(tl.idx.size() == 4 * 8);
      for (auto r : tl.idx) CHECK(r < m.embeddings_per_table);
    }
  }
}

TEST_CASE("zipf rank mapping is a bijection on the table") {
  for (std::uint64_t rows : {1ULL, 2ULL, 7ULL, 64ULL, 1000ULL, 16384ULL}) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < rows; ++r) seen.insert(zipf_rank_to_row(r, rows, 3));
    CHECK(seen.size() == rows);
    CHECK(*seen.rbegin() < rows);
  }
}

TEST_CASE("zipf draws follow the rank-frequency law") {
  // Oracle: P(rank 0) / P(rank 1) = 2^s for the bounded Zipf law.
  ModelConfig m = small_model("RMC1", 1, 1024);
  m.pooling_factor = 64;
  const double s = 1.0;
  const auto t = synthesize_trace(m, Distribution::zipfian(s), 4, 9);
  std::map<std::uint64_t, double> freq;
  for (const auto& b : t.batches) {
    for (auto r : b.tables[0].idx) freq[r] += 1.0;
  }
  const double n = static_cast<double>(t.total_lookups());
  double h = 0.0;
  for (std::uint64_t r = 1; r <= m.embeddings_per_table; ++r) h += std::pow(static_cast<double>(r), -s);
  const double p0 = 1.0 / h;
  const double got0 = freq[zipf_rank_to_row(0, m.embeddings_per_table, 0)] / n;
  const double got1 = freq[zipf_rank_to_row(1, m.embeddings_per_table, 0)] / n;
  CHECK(got0 == doctest::Approx(p0).epsilon(0.05));
  CHECK(got1 == doctest::Approx(p0 / 2.0).epsilon(0.08));
}

TEST_CASE("normal draws centre on mu") {
  ModelConfig m = small_model("RMC2", 1, 512);
  const auto t = synthesize_trace(m, Distribution::normal(0.25, 0.05), 4, 3);
  double sum = 0.0;
  for (const auto& b : t.batches) {
    for (auto r : b.tables[0].idx) sum += static_cast<double>(r);
  }
  const double mean = sum / static_cast<double>(t.total_lookups()) / static_cast<double>(m.embeddings_per_table - 1);
  CHECK(mean == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("uniform striping balances devices within one per batch") {
  ModelConfig m = small_model("RMC1", 1, 1);
  SystemConfig sys = preset_system("beacon_s");  // all CXL, 4 devices, round robin pages
  const auto devs = build_devices(sys);
  const auto map = build_address_map(m, devs, sys.placement);
  const auto t = synthesize_trace(m, Distribution::uniform(), 3, 1);
  for (const auto& b : t.batches) {
    std::map<std::uint32_t, int> per_dev;
    for (auto r : b.tables[0].idx) per_dev[map.locate(m.row_address(0, r)).first]++;
    int lo = 1 << 30, hi = 0;
    for (std::uint32_t d = 1; d < devs.size(); ++d) {
      lo = std::min(lo, per_dev[d]);
      hi = std::max(hi, per_dev[d]);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("weighted traces carry one weight per lookup") {
  const auto t = synthesize_trace(small_model(), Distribution::random(), 2, 5, true);
  for (const auto& b : t.batches) {
    for (const auto& tl : b.tables) {
      REQUIRE(tl.weights.has_value());
      CHECK(tl.weights->size() == tl.idx.size());
      for (float w : *tl.weights) CHECK((w >= 0.5F && w < 1.5F));
    }
  }
}

TEST_CASE("trace text format round trips") {
  const auto m = small_model();
  for (bool weighted : {false, true}) {
    const auto t = synthesize_trace(m, Distribution::zipfian(1.1), 3, 8, weighted);
    std::stringstream ss;
    emit_trace(t, ss);
    const auto back = parse_trace(ss, m);
    CHECK(back.batches == t.batches);
  }
}

TEST_CASE("trace parser reports the failing line") {
  const auto m = small_model();
  const std::string header =
      R"({"format_version":1,"model":{"name":"RMC1","num_tables":2,"embeddings_per_table":16384,"embedding_dim_bytes":256}})";
  {
    std::stringstream ss(header + "\n" + R"({"batch_id":0,"tables":[{"t":0,"idx":[1,2]}]})" + "\n{oops\n");
    try {
      parse_trace(ss, m);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  {
    std::stringstream ss(header + "\n" + R"({"batch_id":0,"tables":[{"t":1,"idx":[16384]}]})" + "\n");
    try {
      parse_trace(ss, m);
      FAIL("expected a range error");
    } catch (const RangeError& e) {
      CHECK(e.table() == 1);
      CHECK(e.index() == 16384);
    }
  }
  {
    std::stringstream ss(R"({"format_version":1,"model":{"name":"x","num_tables":3,"embeddings_per_table":16384,"embedding_dim_bytes":256}})");
    CHECK_THROWS_AS(parse_trace(ss, m), ConfigError);
  }
  {
    std::stringstream ss("");
    CHECK_THROWS_AS(parse_trace(ss, m), ParseError);
  }
}

TEST_CASE("trace statistics agree with a direct count") {
  Trace t;
  t.model = small_model("RMC1", 2, 1);
  LookupBatch b;
  b.tables.resize(2);
  b.tables[0].idx = {5, 5, 5, 7};
  b.tables[1].idx = {5, 9};
  t.batches.push_back(b);
  const auto s = trace_stats(t);
  CHECK(s.total_lookups == 6);
  CHECK(s.unique_rows == 4);  // (0,5) (0,7) (1,5) (1,9)
  CHECK(s.footprint_bytes == 4 * 256);
  CHECK(s.per_table_access_histogram == std::vector<std::uint64_t>{4, 2});
  CHECK(s.top_k_row_share == doctest::Approx(3.0 / 6.0));
}

TEST_CASE("reference SLS is the weighted row sum") {
  const auto m = small_model();
  const std::vector<std::uint64_t> rows = {3, 11, 3};
  const std::vector<float> w = {0.5F, 2.0F, 1.0F};
  const auto got = reference_sls(m, 1, rows, w);
  REQUIRE(got.size() == 64);
  for (std::uint32_t e = 0; e < 64; ++e) {
    const double want = 1.5 * embedding_value(1, 3, e) + 2.0 * embedding_value(1, 11, e);
    CHECK(static_cast<double>(got[e]) == doctest::Approx(want).epsilon(1e-6));
  }
  for (std::uint32_t e = 0; e < 64; ++e) {
    const float v = embedding_value(0, 17, e);
    CHECK((v >= -1.0F && v < 1.0F));
  }
}
