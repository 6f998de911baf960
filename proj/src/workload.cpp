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

#include "pifs/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace pifs {

using nlohmann::json;

void ModelConfig::validate() const {
  if (num_tables == 0 || embeddings_per_table == 0 || pooling_factor == 0 || batch_size == 0) {
    throw ConfigError("model '" + name + "': all counts must be positive");
  }
  if (embedding_dim_bytes == 0 || embedding_dim_bytes % kChunkBytes != 0) {
    throw ConfigError("model '" + name + "': embedding_dim_bytes must be a positive multiple of 16");
  }
  // vectorsize is a 3-bit binary code: 2^code chunks of 16 B, 16 B .. 2 KiB.
  const std::uint32_t chunks = embedding_dim_bytes / kChunkBytes;
  if ((chunks & (chunks - 1)) != 0 || chunks > 128) {
    throw ConfigError("model '" + name + "': row size must be 16 B * 2^k with k <= 7");
  }
}

ModelConfig load_model_preset(const std::string& name) {
  ModelConfig m;
  m.name = name;
  if (name == "RMC1") {
    m.embeddings_per_table = 16384;
    m.embedding_dim_bytes = 64 * 4;
  } else if (name == "RMC2") {
    m.embeddings_per_table = 131072;
    m.embedding_dim_bytes = 64 * 4;
  } else if (name == "RMC3") {
    m.embeddings_per_table = 1048576;
    m.embedding_dim_bytes = 64 * 4;
  } else if (name == "RMC4") {
    m.embeddings_per_table = 1048576;
    m.embedding_dim_bytes = 128 * 4;
  } else {
    throw NotFound("unknown model preset '" + name + "'");
  }
  return m;
}

void Distribution::validate() const {
  switch (kind) {
    case Kind::Zipfian:
      if (!(zipf_s > 0.0) || !std::isfinite(zipf_s)) throw ConfigError("zipfian exponent must be > 0");
      break;
    case Kind::Normal:
      if (!(normal_sigma > 0.0) || !std::isfinite(normal_mu) || !std::isfinite(normal_sigma)) {
        throw ConfigError("normal distribution needs finite mu and sigma > 0");
      }
      if (normal_mu < 0.0 || normal_mu > 1.0) throw ConfigError("normal mu is a table fraction in [0,1]");
      break;
    case Kind::Uniform:
    case Kind::Random:
      break;
  }
}

std::string Distribution::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Zipfian: os << "zipf:" << zipf_s; break;
    case Kind::Normal: os << "normal:" << normal_mu << ":" << normal_sigma; break;
    case Kind::Uniform: os << "uniform"; break;
    case Kind::Random: os << "random"; break;
  }
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad number '" + s + "'");
  return v;
}

}  // namespace

Distribution parse_distribution(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.empty()) throw ConfigError("empty distribution spec");
  Distribution d;
  const std::string& k = parts[0];
  if (k == "zipf" || k == "zipfian") {
    d = Distribution::zipfian(parts.size() > 1 ? parse_number(parts[1]) : 1.0);
    if (parts.size() > 2) throw ConfigError("zipf takes one parameter");
  } else if (k == "normal") {
    d = Distribution::normal(parts.size() > 1 ? parse_number(parts[1]) : 0.5,
                             parts.size() > 2 ? parse_number(parts[2]) : 0.125);
    if (parts.size() > 3) throw ConfigError("normal takes two parameters");
  } else if (k == "uniform" && parts.size() == 1) {
    d = Distribution::uniform();
  } else if (k == "random" && parts.size() == 1) {
    d = Distribution::random();
  } else {
    throw ConfigError("unknown distribution '" + text + "'");
  }
  d.validate();
  return d;
}

std::uint64_t Trace::total_lookups() const {
  std::uint64_t n = 0;
  for (const auto& b : batches)
    for (const auto& t : b.tables) n += t.idx.size();
  return n;
}

// ---------------------------------------------------------------------------
// Canonical format

namespace {

json model_header(const ModelConfig& m) {
  return json{{"name", m.name},
              {"num_tables", m.num_tables},
              {"embeddings_per_table", m.embeddings_per_table},
              {"embedding_dim_bytes", m.embedding_dim_bytes}};
}

}  // namespace

void emit_trace(const Trace& trace, std::ostream& out) {
  json header{{"format_version", 1}, {"model", model_header(trace.model)}};
  out << header.dump() << '\n';
  for (const auto& b : trace.batches) {
    json tables = json::array();
    for (std::size_t t = 0; t < b.tables.size(); ++t) {
      const auto& tl = b.tables[t];
      json rec{{"t", t}, {"idx", tl.idx}};
      if (tl.weights) {
        json w = json::array();
        for (float x : *tl.weights) w.push_back(static_cast<double>(x));
        rec["w"] = std::move(w);
      }
      tables.push_back(std::move(rec));
    }
    out << json{{"batch_id", b.batch_id}, {"tables", std::move(tables)}}.dump() << '\n';
  }
  if (!out) throw IoError("failed writing trace stream");
}

Trace parse_trace(std::istream& in, const ModelConfig& model) {
  model.validate();
  Trace trace;
  trace.model = model;
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(1, "missing header");
  try {
    json h = json::parse(line);
    if (!h.is_object() || h.value("format_version", 0) != 1) throw ParseError(lineno, "unsupported header");
    const json& m = h.at("model");
    if (m.at("num_tables").get<std::uint32_t>() != model.num_tables ||
        m.at("embeddings_per_table").get<std::uint64_t>() != model.embeddings_per_table ||
        m.at("embedding_dim_bytes").get<std::uint32_t>() != model.embedding_dim_bytes) {
      throw ConfigError("trace header does not match model '" + model.name + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(lineno, std::string("bad header: ") + e.what());
  }

  while (next_line()) {
    LookupBatch batch;
    try {
      json b = json::parse(line);
      batch.batch_id = b.at("batch_id").get<std::uint64_t>();
      if (batch.batch_id != trace.batches.size()) {
        throw ParseError(lineno, "batch ids must count up from 0");
      }
      batch.tables.resize(model.num_tables);
      for (const json& rec : b.at("tables")) {
        const auto t = rec.at("t").get<std::uint32_t>();
        if (t >= model.num_tables) throw ParseError(lineno, "table index out of range");
        TableLookups& tl = batch.tables[t];
        if (!tl.idx.empty()) throw ParseError(lineno, "duplicate table record");
        tl.idx = rec.at("idx").get<std::vector<std::uint64_t>>();
        if (rec.contains("w")) {
          tl.weights = rec.at("w").get<std::vector<float>>();
          if (tl.weights->size() != tl.idx.size()) throw ParseError(lineno, "weights/indices length mismatch");
        }
        for (auto i : tl.idx) {
          if (i >= model.embeddings_per_table) throw RangeError(batch.batch_id, t, i);
        }
      }
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    trace.batches.push_back(std::move(batch));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::uint64_t r = 0; r < n; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -s);
      cdf_[r] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::uint64_t rank(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint64_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::uint64_t zipf_rank_to_row(std::uint64_t rank, std::uint64_t rows, std::uint32_t table) {
  if (rows <= 1) return 0;
  std::uint64_t a = (0x9E3779B1ULL % rows) | 1ULL;
  while (std::gcd(a, rows) != 1) a += 2;
  const std::uint64_t b = mix64(0xC0FFEEULL + table) % rows;
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * rank + b) % rows);
}

Trace synthesize_trace(const ModelConfig& model, const Distribution& dist, std::uint64_t num_batches,
                       std::uint64_t seed, bool weighted) {
  model.validate();
  dist.validate();
  if (num_batches == 0) throw ConfigError("num_batches must be > 0");

  Trace trace;
  trace.model = model;
  trace.origin = TraceOrigin{true, dist, seed};
  std::mt19937_64 rng(mix64(seed) ^ 0x5EEDULL);

  const std::uint64_t rows = model.embeddings_per_table;
  const std::uint64_t per_table = static_cast<std::uint64_t>(model.batch_size) * model.pooling_factor;
  const std::uint64_t ppt = model.pages_per_table();
  const std::uint64_t rows_per_page = std::max<std::uint64_t>(1, kPageBytes / model.embedding_dim_bytes);

  std::optional<ZipfSampler> zipf;
  if (dist.kind == Distribution::Kind::Zipfian) zipf.emplace(rows, dist.zipf_s);

  // Uniform stripes a single cursor across the global page sequence so that
  // consecutive lookups land on consecutive pages.
  std::uint64_t stripe = 0;

  for (std::uint64_t b = 0; b < num_batches; ++b) {
    LookupBatch batch;
    batch.batch_id = b;
    batch.tables.resize(model.num_tables);
    for (std::uint32_t t = 0; t < model.num_tables; ++t) {
      auto& tl = batch.tables[t];
      tl.idx.reserve(per_table);
      for (std::uint64_t k = 0; k < per_table; ++k) {
        std::uint64_t row = 0;
        switch (dist.kind) {
          case Distribution::Kind::Zipfian:
            row = zipf_rank_to_row(zipf->rank(u01(rng)), rows, t);
            break;
          case Distribution::Kind::Normal: {
            const double centre = dist.normal_mu * static_cast<double>(rows - 1);
            const double spread = dist.normal_sigma * static_cast<double>(rows);
            for (;;) {
              // Box-Muller on our own uniforms keeps the stream portable.
              const double u1 = 1.0 - u01(rng);
              const double u2 = u01(rng);
              const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
              const double x = std::round(centre + spread * z);
              if (x >= 0.0 && x <= static_cast<double>(rows - 1)) {
                row = static_cast<std::uint64_t>(x);
                break;
              }
            }
            break;
          }
          case Distribution::Kind::Uniform: {
            const std::uint64_t page = stripe % ppt;
            const std::uint64_t slot = (stripe / ppt) % rows_per_page;
            row = page * rows_per_page + slot;
            if (row >= rows) row = page * rows_per_page;
            if (row >= rows) row = rows - 1;
            ++stripe;
            break;
          }
          case Distribution::Kind::Random:
            row = uniform_below(rng, rows);
            break;
        }
        tl.idx.push_back(row);
      }
      if (weighted) {
        std::vector<float> w(tl.idx.size());
        for (auto& x : w) x = static_cast<float>(0.5 + u01(rng));
        tl.weights = std::move(w);
      }
    }
    trace.batches.push_back(std::move(batch));
  }
  return trace;
}

TraceStats trace_stats(const Trace& trace) {
  TraceStats s;
  s.per_table_access_histogram.assign(trace.model.num_tables, 0);
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& b : trace.batches) {
    for (std::size_t t = 0; t < b.tables.size(); ++t) {
      for (auto row : b.tables[t].idx) {
        ++counts[(static_cast<std::uint64_t>(t) << 40) | row];
        ++s.per_table_access_histogram[t];
        ++s.total_lookups;
      }
    }
  }
  s.unique_rows = counts.size();
  s.footprint_bytes = s.unique_rows * trace.model.embedding_dim_bytes;
  if (s.total_lookups == 0) return s;

  std::vector<std::uint64_t> c;
  c.reserve(counts.size());
  for (const auto& [_, n] : counts) c.push_back(n);
  const std::size_t k = std::max<std::size_t>(1, (c.size() + 99) / 100);
  std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k), c.end(), std::greater<>());
  const std::uint64_t top = std::accumulate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k), std::uint64_t{0});
  s.top_k_row_share = static_cast<double>(top) / static_cast<double>(s.total_lookups);
  return s;
}

float embedding_value(std::uint32_t table, std::uint64_t row, std::uint32_t element) {
  const std::uint64_t h = mix64((static_cast<std::uint64_t>(table) << 52) ^ (row << 12) ^ element);
  // 24 random bits -> [-1, 1), exactly representable in FP32.
  return static_cast<float>(static_cast<double>(h >> 40) * 0x1.0p-23 - 1.0);
}

std::vector<float> reference_sls(const ModelConfig& model, std::uint32_t table,
                                 const std::vector<std::uint64_t>& rows, const std::vector<float>& weights) {
  const std::uint32_t n = model.floats_per_row();
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    for (std::uint32_t e = 0; e < n; ++e) acc[e] += w * embedding_value(table, rows[i], e);
  }
  return {acc.begin(), acc.end()};
}

}  // namespace pifs
