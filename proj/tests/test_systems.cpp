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

#include <set>

#include "pifs/systems.hpp"

using namespace pifs;

TEST_CASE("every preset round trips through the JSON form") {
  std::set<std::string> seen;
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const SystemConfig c = preset_system(name);
    CHECK(c.name == name);
    CHECK(from_json(to_json(c), SystemConfig{}) == c);
    CHECK(validate_config(c, load_model_preset("RMC4")).empty());
    seen.insert(to_json(c).dump());
  }
  CHECK(seen.size() == preset_names().size());
  CHECK_THROWS_AS(preset_system("tpu"), NotFound);
}

TEST_CASE("presets carry their distinguishing switches") {
  CHECK_FALSE(preset_system("pond").switch_compute);
  CHECK(preset_system("pond_pm").page_mgmt_enabled);
  CHECK(preset_system("beacon_s").placement == Placement::all_cxl());
  CHECK(preset_system("beacon_s").switch_compute);
  CHECK_FALSE(preset_system("beacon_s").ooo_enabled);
  CHECK(preset_system("recnmp").recnmp_mode);
  CHECK(preset_system("local_dram").placement == Placement::all_local());
  const auto p = preset_system("pifs_rec");
  CHECK((p.switch_compute && p.ooo_enabled && p.page_mgmt_enabled && p.buffer.enabled));
  CHECK(preset_system("pifs_pc_ooo").ooo_enabled);
  CHECK_FALSE(preset_system("pifs_pc_only").ooo_enabled);
}

TEST_CASE("devices: one DRAM per host then the expanders") {
  SystemConfig c = preset_system("pifs_rec");
  c.host.num_hosts = 3;
  c.topology.num_switches = 2;
  c.memory.cxl_devices = 5;
  const auto d = build_devices(c);
  REQUIRE(d.size() == 8);
  for (std::uint32_t h = 0; h < 3; ++h) {
    CHECK(d[h].kind == DeviceKind::LocalDram);
    CHECK(d[h].owner_host == h);
  }
  for (std::uint32_t i = 3; i < 8; ++i) {
    CHECK(d[i].kind == DeviceKind::CxlExpander);
    CHECK(d[i].switch_id == (i - 3) % 2);
  }
  const auto t = build_topology(c, d);
  CHECK_NOTHROW(t.validate(d.size(), 3));

  SystemConfig r = preset_system("recnmp");
  const auto rd = build_devices(r);
  CHECK(rd[0].channels == 24);
  CHECK(rd[0].link_bandwidth_bytes_per_ns == doctest::Approx(38.4));
}

TEST_CASE("overrides edit existing fields only") {
  auto tree = to_json(preset_system("pifs_rec"));
  apply_override(tree, "buffer.capacity_kb", "1024");
  apply_override(tree, "buffer.policy", "lru");
  apply_override(tree, "placement", "interleave:0.5");
  apply_override(tree, "topology.cnv", "[true,false]");
  apply_override(tree, "ooo_enabled", "false");
  const auto c = from_json(tree, SystemConfig{});
  CHECK(c.buffer.capacity_bytes == 1024 * 1024);
  CHECK(c.buffer.policy == BufferPolicy::LRU);
  CHECK(c.placement == Placement::interleave(0.5));
  CHECK(c.topology.cnv == std::vector<bool>{true, false});
  CHECK_FALSE(c.ooo_enabled);
  CHECK_THROWS_AS(apply_override(tree, "buffer.size", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(tree, "buffer", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(tree, "", "1"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected") {
  nlohmann::json j = {{"buffer", {{"capcity_kb", 12}}}};
  CHECK_THROWS_AS(from_json(j, SystemConfig{}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"host", {{"threading", "sample"}}}}, SystemConfig{}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::array(), SystemConfig{}), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json{{"placement", "diagonal"}}, SystemConfig{}), ConfigError);
}

TEST_CASE("cross-module validation reports every violation") {
  const auto m = load_model_preset("RMC4");
  SystemConfig c = preset_system("recnmp");
  c.switch_compute = true;
  c.pm.migrate_threshold = 1.0;
  const auto errs = validate_config(c, m);
  CHECK(errs.size() == 2);

  SystemConfig b = preset_system("beacon_s");
  b.placement = Placement::interleave(0.5);
  CHECK(validate_config(b, m).size() == 1);

  // 8 GiB of tables do not fit in 4 GiB of DRAM.
  SystemConfig l = preset_system("local_dram");
  l.memory.local.capacity_bytes = 4ULL << 30;
  ModelConfig big = m;
  big.num_tables = 16;
  const auto cap = validate_config(l, big);
  REQUIRE(cap.size() == 1);
  CHECK(cap[0].find("does not fit") != std::string::npos);

  SystemConfig z = preset_system("pifs_rec");
  z.core.acr_capacity = 0;
  z.host.pipelines = 0;
  CHECK(validate_config(z, m).size() == 2);
}
