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

#include "pifs/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

#include <json.hpp>

namespace pifs {

using nlohmann::json;

BillOfMaterials parse_bom(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad BOM: ") + e.what());
  }
  BillOfMaterials bom;
  if (!j.contains("items") || !j["items"].is_array()) throw ConfigError("BOM needs an 'items' array");
  for (const auto& it : j["items"]) {
    BomItem b;
    try {
      b.name = it.at("name").get<std::string>();
      b.unit_price_usd = it.at("unit_price_usd").get<double>();
      b.unit_power_w = it.value("unit_power_w", 0.0);
      b.quantity = it.at("quantity").get<double>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad BOM item: ") + e.what());
    }
    if (b.unit_price_usd < 0 || b.quantity < 0 || b.unit_power_w < 0) {
      throw ConfigError("BOM item '" + b.name + "' has a negative field");
    }
    bom.items.push_back(b);
  }
  return bom;
}

BillOfMaterials load_bom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read BOM " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bom(ss.str());
}

TcoResult compute_tco(const BillOfMaterials& bom, std::uint32_t years, double price_per_kwh_usd,
                      double throughput) {
  if (years == 0) throw ConfigError("TCO horizon must be at least one year");
  TcoResult r;
  for (const auto& it : bom.items) {
    r.capex_usd += it.unit_price_usd * it.quantity;
    r.power_w += it.unit_power_w * it.quantity;
  }
  const double hours = static_cast<double>(years) * 8760.0;
  r.opex_usd = r.power_w * hours * price_per_kwh_usd / 1000.0;
  r.total_usd = r.capex_usd + r.opex_usd;
  r.ppw = r.power_w > 0.0 ? throughput / r.power_w : 0.0;
  return r;
}

std::vector<double> minmax_normalize(const std::vector<double>& series) {
  if (series.empty()) throw ConfigError("cannot normalize an empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double min = *lo, span = *hi - *lo;
  std::vector<double> out(series.size(), 0.0);
  if (span <= 0.0) return out;
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - min) / span;
  return out;
}

double access_freq_stddev(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) throw ConfigError("stddev needs at least one device");
  double mean = 0.0;
  for (auto c : counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(counts.size());
  double acc = 0.0;
  for (auto c : counts) acc += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  return std::sqrt(acc / static_cast<double>(counts.size()));
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "text") return ReportFormat::Text;
  throw UsageError("unknown report format '" + text + "' (csv|text)");
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

template <class T>
std::string joined(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    if constexpr (std::is_floating_point_v<T>) {
      s += num(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

json metrics_to_json(const RunMetrics& m) {
  return json{{"system", m.system},
              {"total_latency_ns", m.total_latency_ns},
              {"per_batch_latency_ns", m.per_batch_latency_ns},
              {"device_ids", m.device_ids},
              {"per_device_access_counts", m.per_device_access_counts},
              {"bandwidth_utilization", m.bandwidth_utilization},
              {"requests", m.requests},
              {"lookups", m.lookups},
              {"buffer_accesses", m.buffer_accesses},
              {"buffer_hits", m.buffer_hits},
              {"buffer_hit_ratio", m.buffer_hit_ratio},
              {"migration_stall_ns", m.migration_stall_ns},
              {"migration_cost_fraction", m.migration_cost_fraction},
              {"migrated_pages", m.migrated_pages},
              {"epochs", m.epochs},
              {"spread_stddev_before", m.spread_stddev_before},
              {"spread_stddev_after", m.spread_stddev_after},
              {"cross_link_bytes", m.cross_link_bytes},
              {"discards", m.discards},
              {"events", m.events},
              {"result_checksum", m.result_checksum},
              {"max_result_rel_error", m.max_result_rel_error},
              {"results", m.results}};
}

RunMetrics metrics_from_json(const json& j) {
  RunMetrics m;
  j.at("system").get_to(m.system);
  j.at("total_latency_ns").get_to(m.total_latency_ns);
  j.at("per_batch_latency_ns").get_to(m.per_batch_latency_ns);
  j.at("device_ids").get_to(m.device_ids);
  j.at("per_device_access_counts").get_to(m.per_device_access_counts);
  j.at("bandwidth_utilization").get_to(m.bandwidth_utilization);
  j.at("requests").get_to(m.requests);
  j.at("lookups").get_to(m.lookups);
  j.at("buffer_accesses").get_to(m.buffer_accesses);
  j.at("buffer_hits").get_to(m.buffer_hits);
  j.at("buffer_hit_ratio").get_to(m.buffer_hit_ratio);
  j.at("migration_stall_ns").get_to(m.migration_stall_ns);
  j.at("migration_cost_fraction").get_to(m.migration_cost_fraction);
  j.at("migrated_pages").get_to(m.migrated_pages);
  j.at("epochs").get_to(m.epochs);
  j.at("spread_stddev_before").get_to(m.spread_stddev_before);
  j.at("spread_stddev_after").get_to(m.spread_stddev_after);
  j.at("cross_link_bytes").get_to(m.cross_link_bytes);
  j.at("discards").get_to(m.discards);
  j.at("events").get_to(m.events);
  j.at("result_checksum").get_to(m.result_checksum);
  j.at("max_result_rel_error").get_to(m.max_result_rel_error);
  j.at("results").get_to(m.results);
  return m;
}

}  // namespace

void write_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out) {
  if (rows.empty()) throw ConfigError("report needs at least one run");
  if (format == ReportFormat::Text) {
    for (const auto& r : rows) {
      json j{{"group", r.group}, {"label", r.label}, {"metrics", metrics_to_json(r.metrics)}};
      out << j.dump() << '\n';
    }
    return;
  }

  // Min-max normalized latency within each group.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) groups[rows[i].group].push_back(i);
  std::vector<double> norm(rows.size(), 0.0);
  for (const auto& [g, idx] : groups) {
    std::vector<double> lat;
    for (auto i : idx) lat.push_back(rows[i].metrics.total_latency_ns);
    const auto n = minmax_normalize(lat);
    for (std::size_t k = 0; k < idx.size(); ++k) norm[idx[k]] = n[k];
  }

  out << "group,label,system,total_latency_ns,normalized_latency,requests,lookups,buffer_hit_ratio,"
         "migration_stall_ns,migration_cost_fraction,migrated_pages,epochs,spread_stddev_before,"
         "spread_stddev_after,cross_link_bytes,discards,result_checksum,max_result_rel_error,"
         "device_ids,device_access_counts,bandwidth_utilization\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& m = r.metrics;
    out << csv_field(r.group) << ',' << csv_field(r.label) << ',' << csv_field(m.system) << ','
        << num(m.total_latency_ns) << ',' << num(norm[i]) << ',' << m.requests << ',' << m.lookups << ','
        << num(m.buffer_hit_ratio) << ',' << num(m.migration_stall_ns) << ',' << num(m.migration_cost_fraction)
        << ',' << m.migrated_pages << ',' << m.epochs << ',' << num(m.spread_stddev_before) << ','
        << num(m.spread_stddev_after) << ',' << m.cross_link_bytes << ',' << m.discards << ','
        << num(m.result_checksum) << ',' << num(m.max_result_rel_error) << ',';
    std::string ids;
    for (std::size_t d = 0; d < m.device_ids.size(); ++d) ids += (d ? ";" : "") + m.device_ids[d];
    out << csv_field(ids) << ',' << joined(m.per_device_access_counts) << ',' << joined(m.bandwidth_utilization)
        << '\n';
  }
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report " + path);
  write_report(rows, format, out);
  out.flush();
  if (!out) throw IoError("write failed for report " + path);
}

std::vector<ReportRow> parse_text_report(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ReportRow r;
      j.at("group").get_to(r.group);
      j.at("label").get_to(r.label);
      r.metrics = metrics_from_json(j.at("metrics"));
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return rows;
}

std::vector<ReportRow> load_text_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report " + path);
  return parse_text_report(in);
}

}  // namespace pifs
