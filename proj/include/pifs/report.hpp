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
#include <string>
#include <vector>

#include "pifs/engine.hpp"

namespace pifs {

struct BomItem {
  std::string name;
  double unit_price_usd = 0.0;
  double unit_power_w = 0.0;
  double quantity = 0.0;
  bool operator==(const BomItem&) const = default;
};

struct BillOfMaterials {
  std::vector<BomItem> items;
};

// Reads {"items":[{"name":..,"unit_price_usd":..,"unit_power_w":..,"quantity":..}]}.
BillOfMaterials load_bom(const std::string& path);
BillOfMaterials parse_bom(const std::string& json_text);

struct TcoResult {
  double capex_usd = 0.0;
  double opex_usd = 0.0;
  double total_usd = 0.0;
  double power_w = 0.0;
  double ppw = 0.0;  // throughput per watt
};

TcoResult compute_tco(const BillOfMaterials& bom, std::uint32_t years, double price_per_kwh_usd,
                      double throughput);

// (x - min) / (max - min); a flat series maps to zeros.
std::vector<double> minmax_normalize(const std::vector<double>& series);

// Population standard deviation.
double access_freq_stddev(const std::vector<std::uint64_t>& counts);

enum class ReportFormat { Csv, Text };
ReportFormat parse_report_format(const std::string& text);

// One simulation in a report. `group` selects the normalization set,
// `label` names the sweep point.
struct ReportRow {
  std::string group;
  std::string label;
  RunMetrics metrics;
  bool operator==(const ReportRow&) const = default;
};

void write_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out);
// Throws IoError naming the path when it cannot be written.
void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path);

// Text format only: one JSON record per line.
std::vector<ReportRow> parse_text_report(std::istream& in);
std::vector<ReportRow> load_text_report(const std::string& path);

}  // namespace pifs
