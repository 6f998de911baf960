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

#include "pifs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <unordered_map>

namespace pifs {

std::vector<SlsRequest> split_requests(const Trace& trace) {
  std::vector<SlsRequest> out;
  const std::uint32_t pf = std::max<std::uint32_t>(1, trace.model.pooling_factor);
  for (const auto& b : trace.batches) {
    for (std::uint32_t t = 0; t < b.tables.size(); ++t) {
      const auto n = static_cast<std::uint32_t>(b.tables[t].idx.size());
      for (std::uint32_t first = 0; first < n; first += pf) {
        out.push_back(SlsRequest{static_cast<std::uint32_t>(b.batch_id), t, first, std::min(pf, n - first)});
      }
    }
  }
  return out;
}

double end_to_end_speedup(double sls_speedup, double sls_fraction) {
  if (!(sls_speedup > 0.0)) throw ConfigError("SLS speedup must be positive");
  if (!(sls_fraction >= 0.0 && sls_fraction <= 1.0)) throw ConfigError("SLS fraction must lie in [0,1]");
  return 1.0 / ((1.0 - sls_fraction) + sls_fraction / sls_speedup);
}

namespace {

double pop_stddev(const std::vector<std::uint64_t>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (auto x : v) mean += static_cast<double>(x);
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (auto x : v) acc += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

enum class Ingress : std::uint32_t { Config = 0, Fetch = 1, HostRead = 2 };
enum class Purpose : std::uint32_t { HostRead = 0, SwitchFetch = 1 };

struct Fetch {
  std::uint32_t req = 0;
  std::uint32_t pos = 0;     // candidate position within the request
  std::uint32_t group = 0;   // accumulating group (switch mode)
  std::uint32_t device = 0;
  std::uint64_t local_addr = 0;
  std::uint64_t row_addr = 0;
  Tick stall = 0;
  bool ndp = false;
};

struct Group {
  std::uint32_t req = 0;
  std::uint32_t sw = 0;      // switch that accumulates it
  std::uint32_t origin = 0;  // host's switch, which merges partials
  std::vector<std::uint32_t> fetches;
};

struct ReqState {
  SlsRequest r;
  std::uint32_t host = 0;
  std::uint32_t pipe = 0;
  std::uint32_t sw = 0;
  bool prepared = false;
  std::vector<std::uint32_t> local;   // fetch ids
  std::vector<std::uint32_t> remote;  // fetch ids
  std::uint32_t local_pending = 0;
  std::uint32_t ndp_rows = 0;
  Tick local_last = 0;
  Tick ndp_last = 0;
  bool local_done = false;
  bool remote_done = true;
  Tick local_done_at = 0;
  Tick remote_done_at = 0;
  Tick started = 0;
  std::vector<double> host_acc;
  std::vector<double> switch_result;
  ForwardRecord fwd;
  std::vector<std::uint32_t> groups;
};

struct SwitchState {
  SwitchCore core;
  std::optional<OnSwitchBuffer> buffer;
  Tick core_free = 0;
  Tick port_free = 0;
  std::uint32_t contexts = 0;
  std::deque<std::pair<std::uint32_t, std::uint32_t>> waiters;  // (host, pipe)
  std::deque<std::uint32_t> pending_configs;                    // group ids
  std::deque<std::uint32_t> iir_wait;                           // fetch ids
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> held;  // group -> fetches
};

struct Pipeline {
  std::vector<std::uint32_t> queue;
  std::size_t next = 0;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return x.time > y.time || (x.time == y.time && x.seq > y.seq);
  }
};

class Sim {
 public:
  Sim(const SystemConfig& cfg, const Trace& trace, std::uint64_t seed, const RunOptions& opts);
  RunMetrics run();

 private:
  void push(Tick t, EventKind k, std::uint32_t a = 0, std::uint32_t b = 0, std::uint64_t c = 0) {
    if (t < now_) throw ProtocolError("event scheduled in the past");
    q_.push(Event{t, seq_++, k, a, b, c});
  }

  // handlers
  void host_issue(std::uint32_t host, std::uint32_t pipe);
  void host_read(std::uint32_t f);
  void host_arrival(std::uint32_t f);
  void switch_ingress(std::uint32_t sw, Ingress kind, std::uint64_t id);
  void mem_submit(std::uint32_t f, Purpose p);
  void mem_complete(std::uint32_t f, Purpose p);
  void data_arrival(std::uint32_t sw, std::uint32_t f, bool direct);
  void egress(std::uint32_t sw, std::uint32_t group);
  void partial_delivery(std::uint32_t group, std::uint32_t reported);
  void result_arrival(std::uint32_t req);
  void epoch_boundary();

  // helpers
  void prepare(ReqState& rs);
  std::uint32_t make_fetch(ReqState& rs, std::uint32_t req, std::uint32_t pos);
  void start_switch_request(std::uint32_t req, Tick t);
  void send_group(std::uint32_t g, Tick t_at_origin);
  void admit_config(std::uint32_t sw, std::uint32_t g);
  void accept_fetch(std::uint32_t sw, std::uint32_t f, bool use_buffer = true);
  void free_acr_slot(std::uint32_t sw);
  void local_part_done(std::uint32_t req, Tick t);
  void maybe_finish(std::uint32_t req);
  void pipeline_next(std::uint32_t host, std::uint32_t pipe, Tick t);
  Tick link_transfer(std::uint32_t from, std::uint32_t to, std::uint32_t bytes, Tick t);
  Tick upstream(std::uint32_t host, std::uint32_t bytes, Tick t);
  const std::vector<float>& row_data(std::uint64_t row_addr);
  void add_row(std::vector<double>& acc, std::uint32_t f, double weight);
  float weight_of(const Fetch& f) const;
  std::uint32_t row_bytes() const { return model_.embedding_dim_bytes; }
  bool is_local(std::uint32_t dev) const { return devices_[dev].kind == DeviceKind::LocalDram; }

  const SystemConfig cfg_;
  const Trace& trace_;
  ModelConfig model_;
  RunOptions opts_;
  std::vector<MemoryDeviceConfig> devices_;
  std::vector<DeviceState> dev_state_;
  Topology topo_;
  AddressMap map_;
  std::optional<HeatState> heat_;
  std::unordered_map<std::uint64_t, MigrationWindow> windows_;
  Tick mig_cursor_ = 0;
  std::mt19937_64 rng_;

  std::vector<SlsRequest> reqs_;
  std::vector<ReqState> rs_;
  std::vector<Fetch> fetches_;
  std::vector<Group> groups_;
  std::vector<SwitchState> sw_;
  std::vector<std::vector<Pipeline>> pipes_;
  std::vector<Tick> up_free_;
  std::vector<Tick> link_free_;
  std::vector<std::optional<OnSwitchBuffer>> dimm_cache_;
  std::unordered_map<std::uint32_t, std::vector<double>> partials_;  // group -> partial in flight

  std::priority_queue<Event, std::vector<Event>, Later> q_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
  bool epoch_pending_ = false;

  std::vector<float> scratch_;
  std::uint64_t scratch_addr_ = UINT64_MAX;

  RunMetrics m_;
  Tick stall_ticks_ = 0;
  std::vector<Tick> batch_first_, batch_last_;
  bool spread_recorded_ = false;
  std::uint64_t finished_ = 0;
};

Sim::Sim(const SystemConfig& cfg, const Trace& trace, std::uint64_t seed, const RunOptions& opts)
    : cfg_(cfg), trace_(trace), model_(trace.model), opts_(opts), rng_(mix64(seed)) {
  auto errs = validate_config(cfg, model_);
  if (!errs.empty()) {
    std::string msg = "invalid configuration '" + cfg.name + "':";
    for (const auto& e : errs) msg += " " + e + ";";
    // Capacity problems keep their own type so callers can tell them apart.
    for (const auto& e : errs) {
      if (e.find("does not fit") != std::string::npos) throw CapacityError(msg);
    }
    throw ConfigError(msg);
  }
  devices_ = build_devices(cfg);
  for (const auto& d : devices_) dev_state_.emplace_back(d);
  topo_ = build_topology(cfg, devices_);
  map_ = build_address_map(model_, devices_, cfg.placement, cfg.memory.local_first_cap_bytes);
  if (cfg.page_mgmt_enabled) heat_.emplace(cfg.host.num_hosts, model_.num_pages());

  const std::uint32_t nsw = cfg.topology.num_switches;
  sw_.resize(nsw);
  for (std::uint32_t s = 0; s < nsw; ++s) {
    auto& st = sw_[s];
    st.core.switch_spid = 1000 + s;
    st.core.acr.capacity = cfg.core.acr_capacity;
    st.core.iir = Iir(cfg.core.iir_capacity);
    st.core.swap.slots = cfg.core.swap_slots;
    st.core.flags.ooo_enabled = cfg.ooo_enabled;
    st.core.flags.spill_enabled = cfg.core.spill_enabled;
    if (cfg.buffer.enabled && !cfg.recnmp_mode) st.buffer.emplace(cfg.buffer, row_bytes());
  }
  dimm_cache_.resize(cfg.host.num_hosts);
  if (cfg.recnmp_mode && cfg.buffer.enabled) {
    for (auto& c : dimm_cache_) c.emplace(cfg.buffer, row_bytes());
  }
  up_free_.assign(cfg.host.num_hosts, 0);
  link_free_.assign(static_cast<std::size_t>(nsw) * nsw, 0);

  reqs_ = split_requests(trace);
  rs_.resize(reqs_.size());
  pipes_.assign(cfg.host.num_hosts, std::vector<Pipeline>(cfg.host.pipelines));
  for (std::uint32_t i = 0; i < reqs_.size(); ++i) {
    const auto& r = reqs_[i];
    auto& s = rs_[i];
    s.r = r;
    s.host = r.batch % cfg.host.num_hosts;
    const std::uint32_t lane = cfg.host.threading == Threading::Table ? r.table : r.batch / cfg.host.num_hosts;
    s.pipe = lane % cfg.host.pipelines;
    s.sw = topo_.switch_of_host(s.host);
    pipes_[s.host][s.pipe].queue.push_back(i);
  }
  std::uint32_t nb = 0;
  for (const auto& r : reqs_) nb = std::max(nb, r.batch + 1);
  batch_first_.assign(nb, INT64_MAX);
  batch_last_.assign(nb, 0);
  if (opts.keep_results) m_.results.resize(reqs_.size());
}

// ---------------------------------------------------------------------------
// helpers

const std::vector<float>& Sim::row_data(std::uint64_t row_addr) {
  if (row_addr == scratch_addr_) return scratch_;
  const std::uint64_t table_span = model_.pages_per_table() * kPageBytes;
  const auto table = static_cast<std::uint32_t>(row_addr / table_span);
  const std::uint64_t row = (row_addr % table_span) / model_.embedding_dim_bytes;
  scratch_.resize(model_.floats_per_row());
  for (std::uint32_t e = 0; e < scratch_.size(); ++e) scratch_[e] = embedding_value(table, row, e);
  scratch_addr_ = row_addr;
  return scratch_;
}

float Sim::weight_of(const Fetch& f) const {
  const auto& r = rs_[f.req].r;
  return trace_.batches[r.batch].tables[r.table].weight(r.first + f.pos);
}

void Sim::add_row(std::vector<double>& acc, std::uint32_t f, double weight) {
  if (!cfg_.engine.functional) return;
  const auto& d = row_data(fetches_[f].row_addr);
  if (acc.empty()) acc.assign(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) acc[i] += weight * static_cast<double>(d[i]);
}

Tick Sim::link_transfer(std::uint32_t from, std::uint32_t to, std::uint32_t bytes, Tick t) {
  Tick& slot = link_free_[static_cast<std::size_t>(from) * sw_.size() + to];
  const Tick start = std::max(t, slot);
  slot = start + transfer_ticks(bytes, topo_.inter_switch_bandwidth_bytes_per_ns);
  m_.cross_link_bytes += bytes;
  return slot + route_hop(from, to, topo_);
}

Tick Sim::upstream(std::uint32_t host, std::uint32_t bytes, Tick t) {
  Tick& slot = up_free_[host];
  const Tick start = std::max(t, slot);
  slot = start + transfer_ticks(bytes, cfg_.host.upstream_bandwidth_bytes_per_ns);
  return slot + from_ns(cfg_.host.switch_link_ns);
}

std::uint32_t Sim::make_fetch(ReqState& rs, std::uint32_t req, std::uint32_t pos) {
  const auto& tl = trace_.batches[rs.r.batch].tables[rs.r.table];
  const std::uint64_t row = tl.idx[rs.r.first + pos];
  Fetch f;
  f.req = req;
  f.pos = pos;
  f.row_addr = model_.row_address(rs.r.table, row);
  const std::uint64_t page = f.row_addr / kPageBytes;
  const auto off = static_cast<std::uint32_t>(f.row_addr % kPageBytes);

  if (heat_ && heat_->record_access(rs.host, page, cfg_.pm) && !epoch_pending_) {
    epoch_pending_ = true;
    push(now_, EventKind::EpochBoundary);
  }
  auto [dev, local] = map_.locate(f.row_addr);
  if (!windows_.empty()) {
    auto it = windows_.find(page);
    if (it != windows_.end()) {
      const MigrationWindow& w = it->second;
      f.stall = w.stall(off, row_bytes(), now_);
      const std::uint32_t last = (off + row_bytes() - 1) / kLineBytes;
      if (now_ + f.stall < w.line_ready(last)) {
        dev = w.old_location.device;
        local = w.old_location.frame * kPageBytes + off;
      }
    }
  }
  f.device = dev;
  f.local_addr = local;
  f.ndp = cfg_.recnmp_mode && is_local(dev);
  fetches_.push_back(f);
  return static_cast<std::uint32_t>(fetches_.size() - 1);
}

void Sim::prepare(ReqState& rs) {
  const auto req = static_cast<std::uint32_t>(&rs - rs_.data());
  for (std::uint32_t pos = 0; pos < rs.r.count; ++pos) {
    const std::uint32_t f = make_fetch(rs, req, pos);
    if (is_local(fetches_[f].device)) {
      rs.local.push_back(f);
      if (fetches_[f].ndp) ++rs.ndp_rows;
    } else {
      rs.remote.push_back(f);
    }
  }
  rs.prepared = true;
}

void Sim::pipeline_next(std::uint32_t host, std::uint32_t pipe, Tick t) {
  push(t, EventKind::HostIssue, host, pipe);
}

// ---------------------------------------------------------------------------
// host side

void Sim::host_issue(std::uint32_t host, std::uint32_t pipe) {
  Pipeline& p = pipes_[host][pipe];
  if (p.next >= p.queue.size()) return;
  const std::uint32_t req = p.queue[p.next];
  ReqState& rs = rs_[req];
  if (!rs.prepared) {
    prepare(rs);
    rs.started = now_;
    batch_first_[rs.r.batch] = std::min(batch_first_[rs.r.batch], now_);
  }
  const Tick issue = from_ns(cfg_.host.issue_ns);

  if (cfg_.switch_compute && !rs.remote.empty()) {
    start_switch_request(req, now_);
    return;
  }
  ++p.next;
  // Host accumulation: every candidate travels to the host.
  std::vector<std::uint32_t> order = rs.local;
  order.insert(order.end(), rs.remote.begin(), rs.remote.end());
  std::sort(order.begin(), order.end());
  rs.local_pending = static_cast<std::uint32_t>(order.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    const Fetch& f = fetches_[order[i]];
    const Tick t = now_ + static_cast<Tick>(i) * issue;
    push(is_local(f.device) ? t + f.stall : t, EventKind::HostRead, 0, 0, order[i]);
  }
}

void Sim::host_read(std::uint32_t fid) {
  Fetch& f = fetches_[fid];
  const ReqState& rs = rs_[f.req];
  if (!is_local(f.device)) {
    push(now_ + from_ns(cfg_.host.switch_link_ns), EventKind::SwitchIngress, rs.sw,
         static_cast<std::uint32_t>(Ingress::HostRead), fid);
    return;
  }
  stall_ticks_ += f.stall;
  if (f.ndp && dimm_cache_[rs.host]) {
    if (auto hit = dimm_cache_[rs.host]->access(f.row_addr)) {
      push(now_ + *hit, EventKind::HostArrival, 0, 0, fid);
      return;
    }
  }
  MemRequest mr{f.local_addr, row_bytes(), rs.host, now_};
  const Tick done = device_submit(devices_[f.device], dev_state_[f.device], mr, now_);
  push(done, EventKind::HostArrival, 0, 0, fid);
}

void Sim::host_arrival(std::uint32_t fid) {
  const Fetch& f = fetches_[fid];
  ReqState& rs = rs_[f.req];
  add_row(rs.host_acc, fid, weight_of(f));
  if (f.ndp) {
    rs.ndp_last = std::max(rs.ndp_last, now_);
  } else {
    // The host sums rows as they land.
    rs.local_last = std::max(rs.local_last, now_) + from_ns(cfg_.host.accumulate_ns);
  }
  if (--rs.local_pending > 0) return;

  Tick done = rs.local_last;
  if (rs.ndp_rows > 0) {
    // Rank-side sum finishes with the last row, then one vector crosses the channel.
    done = std::max(done, rs.ndp_last + from_ns(cfg_.core.cycle_ns) +
                              transfer_ticks(row_bytes(), cfg_.memory.local.link_bandwidth_bytes_per_ns) +
                              from_ns(cfg_.host.accumulate_ns));
  }
  local_part_done(f.req, done);
}

void Sim::local_part_done(std::uint32_t req, Tick t) {
  ReqState& rs = rs_[req];
  rs.local_done = true;
  rs.local_done_at = t;
  pipeline_next(rs.host, rs.pipe, t);
  maybe_finish(req);
}

void Sim::maybe_finish(std::uint32_t req) {
  ReqState& rs = rs_[req];
  if (!rs.local_done || !rs.remote_done) return;
  const Tick done = std::max(rs.local_done_at, rs.remote_done_at);
  batch_last_[rs.r.batch] = std::max(batch_last_[rs.r.batch], done);
  ++finished_;

  if (cfg_.engine.functional) {
    std::vector<double> res(model_.floats_per_row(), 0.0);
    for (std::size_t i = 0; i < rs.host_acc.size(); ++i) res[i] += rs.host_acc[i];
    for (std::size_t i = 0; i < rs.switch_result.size(); ++i) res[i] += rs.switch_result[i];
    const auto& tl = trace_.batches[rs.r.batch].tables[rs.r.table];
    std::vector<std::uint64_t> rows(tl.idx.begin() + rs.r.first, tl.idx.begin() + rs.r.first + rs.r.count);
    std::vector<float> w;
    if (tl.weights) w.assign(tl.weights->begin() + rs.r.first, tl.weights->begin() + rs.r.first + rs.r.count);
    const auto ref = reference_sls(model_, rs.r.table, rows, w);
    double err = 0.0, scale = 0.0;
    std::vector<float> out(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
      out[i] = static_cast<float>(res[i]);
      err = std::max(err, std::fabs(static_cast<double>(out[i]) - static_cast<double>(ref[i])));
      scale = std::max(scale, std::fabs(static_cast<double>(ref[i])));
      m_.result_checksum += static_cast<double>(out[i]);
    }
    if (scale > 0.0) m_.max_result_rel_error = std::max(m_.max_result_rel_error, err / scale);
    if (opts_.keep_results) m_.results[req] = std::move(out);
  }
  rs.host_acc.clear();
  rs.host_acc.shrink_to_fit();
  rs.switch_result.clear();
  rs.switch_result.shrink_to_fit();
}

// ---------------------------------------------------------------------------
// switch side

void Sim::start_switch_request(std::uint32_t req, Tick t) {
  ReqState& rs = rs_[req];
  SwitchState& home = sw_[rs.sw];
  if (home.contexts >= cfg_.core.acr_capacity) {
    // Back-pressure: the pipeline sleeps until a result leaves this switch.
    home.waiters.emplace_back(rs.host, rs.pipe);
    return;
  }
  ++home.contexts;
  ++pipes_[rs.host][rs.pipe].next;

  // Group remote candidates by the switch that will accumulate them.
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_switch;
  for (auto fid : rs.remote) {
    const std::uint32_t dsw = devices_[fetches_[fid].device].switch_id;
    const std::uint32_t x = (dsw == rs.sw || topo_.switches[dsw].cnv) ? dsw : rs.sw;
    by_switch[x].push_back(fid);
  }
  rs.remote_done = false;
  rs.fwd = ForwardRecord{};
  rs.fwd.total_count = static_cast<std::uint32_t>(rs.remote.size());

  // Local loads go first: they gate the pipeline, the switch work does not.
  const Tick issue = from_ns(cfg_.host.issue_ns);
  const Tick link = from_ns(cfg_.host.switch_link_ns);
  rs.local_pending = static_cast<std::uint32_t>(rs.local.size());
  for (std::uint32_t i = 0; i < rs.local.size(); ++i) {
    const Fetch& f = fetches_[rs.local[i]];
    push(t + static_cast<Tick>(i) * issue + f.stall, EventKind::HostRead, 0, 0, rs.local[i]);
  }
  const Tick remote_start = t + static_cast<Tick>(rs.local.size()) * issue;
  const Tick at_home = remote_start + issue + link;
  for (auto& [x, list] : by_switch) {
    const auto g = static_cast<std::uint32_t>(groups_.size());
    groups_.push_back(Group{req, x, rs.sw, list});
    rs.groups.push_back(g);
    rs.fwd.sub_counts[x] = static_cast<std::uint32_t>(list.size());
    for (auto fid : list) fetches_[fid].group = g;
    rs.fwd.sumtag = g;
    push(at_home + route_hop(rs.sw, x, topo_), EventKind::SwitchIngress, x,
         static_cast<std::uint32_t>(Ingress::Config), g);
  }
  for (std::uint32_t j = 0; j < rs.remote.size(); ++j) {
    const std::uint32_t fid = rs.remote[j];
    const std::uint32_t x = groups_[fetches_[fid].group].sw;
    push(remote_start + static_cast<Tick>(j + 2) * issue + link + route_hop(rs.sw, x, topo_),
         EventKind::SwitchIngress, x, static_cast<std::uint32_t>(Ingress::Fetch), fid);
  }
  if (rs.local.empty()) local_part_done(req, remote_start + static_cast<Tick>(1 + rs.remote.size()) * issue);
}

void Sim::send_group(std::uint32_t g, Tick t) {
  const Group& grp = groups_[g];
  const Tick hop = route_hop(grp.origin, grp.sw, topo_);
  const Tick cycle = from_ns(cfg_.core.cycle_ns);
  push(t + hop, EventKind::SwitchIngress, grp.sw, static_cast<std::uint32_t>(Ingress::Config), g);
  for (std::uint32_t k = 0; k < grp.fetches.size(); ++k) {
    push(t + hop + static_cast<Tick>(k + 1) * cycle, EventKind::SwitchIngress, grp.sw,
         static_cast<std::uint32_t>(Ingress::Fetch), grp.fetches[k]);
  }
}

void Sim::switch_ingress(std::uint32_t sw, Ingress kind, std::uint64_t id) {
  SwitchState& st = sw_[sw];
  const auto fid = static_cast<std::uint32_t>(id);
  switch (kind) {
    case Ingress::HostRead: {
      Fetch& f = fetches_[fid];
      if (st.buffer) {
        if (auto hit = st.buffer->access(f.row_addr)) {
          const Tick start = std::max(now_, st.port_free);
          st.port_free = start + *hit;
          push(upstream(rs_[f.req].host, row_bytes(), st.port_free), EventKind::HostArrival, 0, 0, fid);
          return;
        }
      }
      const std::uint32_t dsw = devices_[f.device].switch_id;
      stall_ticks_ += f.stall;
      push(now_ + route_hop(sw, dsw, topo_) + f.stall, EventKind::MemSubmit, 0,
           static_cast<std::uint32_t>(Purpose::HostRead), fid);
      return;
    }
    case Ingress::Config: {
      if (check_memopcode(CxlInstruction{MemOpcode::PifsAcrConfig}) != CoreRoute::ProcessCore) return;
      if (st.core.acr.in_use() >= st.core.acr.capacity) {
        st.pending_configs.push_back(fid);
      } else {
        admit_config(sw, fid);
      }
      return;
    }
    case Ingress::Fetch: {
      const std::uint32_t g = fetches_[fid].group;
      if (!st.core.acr.entries.count(g)) {
        st.held[g].push_back(fid);
      } else {
        accept_fetch(sw, fid);
      }
      return;
    }
  }
}

void Sim::admit_config(std::uint32_t sw, std::uint32_t g) {
  SwitchState& st = sw_[sw];
  const Group& grp = groups_[g];
  CxlInstruction ci;
  ci.mem_opcode = MemOpcode::PifsAcrConfig;
  ci.address = static_cast<std::uint64_t>(grp.req) * row_bytes();
  ci.spid = rs_[grp.req].host;
  ci.sumtag = g;
  ci.vectorsize = encode_vectorsize(row_bytes());
  ci.sum_candidate_count = static_cast<std::uint32_t>(grp.fetches.size());
  if (configure_acr(st.core.acr, ci, now_) != AcrStatus::Configured) throw ProtocolError("ACR admission failed");
  auto it = st.held.find(g);
  if (it != st.held.end()) {
    auto held = std::move(it->second);
    st.held.erase(it);
    for (auto fid : held) accept_fetch(sw, fid);
  }
}

void Sim::accept_fetch(std::uint32_t sw, std::uint32_t fid, bool use_buffer) {
  SwitchState& st = sw_[sw];
  Fetch& f = fetches_[fid];
  if (use_buffer && st.buffer) {
    if (auto hit = st.buffer->access(f.row_addr)) {
      const Tick start = std::max(now_, st.port_free);
      st.port_free = start + *hit;
      push(st.port_free, EventKind::DataArrival, sw, 1, fid);
      return;
    }
  }
  if (st.core.iir.full()) {
    st.iir_wait.push_back(fid);
    return;
  }
  CxlInstruction ci;
  ci.mem_opcode = MemOpcode::PifsAccumFetch;
  ci.address = f.row_addr;
  ci.spid = rs_[f.req].host;
  ci.sumtag = f.group;
  ci.vectorsize = encode_vectorsize(row_bytes());
  ci.weight = weight_of(f);
  const RepackResult r = repack(ci, st.core.switch_spid, st.core.iir);
  if (!r.accepted) throw ProtocolError("IIR rejected a fetch it had room for");
  if (r.coalesced) return;
  const std::uint32_t dsw = devices_[f.device].switch_id;
  stall_ticks_ += f.stall;
  push(now_ + route_hop(sw, dsw, topo_) + f.stall, EventKind::MemSubmit, 0,
       static_cast<std::uint32_t>(Purpose::SwitchFetch), fid);
}

void Sim::mem_submit(std::uint32_t fid, Purpose p) {
  const Fetch& f = fetches_[fid];
  MemRequest mr{f.local_addr, row_bytes(), rs_[f.req].host, now_};
  const Tick done = device_submit(devices_[f.device], dev_state_[f.device], mr, now_);
  push(done, EventKind::MemComplete, 0, static_cast<std::uint32_t>(p), fid);
}

void Sim::mem_complete(std::uint32_t fid, Purpose p) {
  const Fetch& f = fetches_[fid];
  const std::uint32_t dsw = devices_[f.device].switch_id;
  const std::uint32_t target = p == Purpose::HostRead ? rs_[f.req].sw : groups_[f.group].sw;
  if (dsw != target) {
    push(link_transfer(dsw, target, row_bytes(), now_), EventKind::InterSwitchDelivery, static_cast<std::uint32_t>(p),
         0, fid);
    return;
  }
  if (p == Purpose::HostRead) {
    push(upstream(rs_[f.req].host, row_bytes(), now_), EventKind::HostArrival, 0, 0, fid);
  } else {
    data_arrival(target, fid, false);
  }
}

void Sim::data_arrival(std::uint32_t sw, std::uint32_t fid, bool direct) {
  SwitchState& st = sw_[sw];
  const Fetch& f = fetches_[fid];
  const float* data = nullptr;
  std::uint32_t len = 0;
  if (cfg_.engine.functional) {
    const auto& d = row_data(f.row_addr);
    data = d.data();
    len = static_cast<std::uint32_t>(d.size());
  }
  SwitchCore::Arrival a;
  if (direct) {
    const StepResult s = accumulate_step(st.core.acr, st.core.swap, st.core.active,
                                         Candidate{f.group, data, len, weight_of(f)}, st.core.flags);
    a.cycles = s.cycles;
    st.core.active = s.new_active;
    if (st.core.acr.entries.at(f.group).remaining == 0) {
      a.completed.push_back(f.group);
      st.core.active.reset();
    }
  } else {
    a = st.core.on_data_arrival(f.row_addr, data, len);
  }
  const Tick start = std::max(now_, st.core_free);
  st.core_free = start + static_cast<Tick>(a.cycles) * from_ns(cfg_.core.cycle_ns);
  for (auto g : a.completed) push(st.core_free, EventKind::Egress, sw, 0, g);

  if (!direct) {
    while (!st.iir_wait.empty() && !st.core.iir.full()) {
      const std::uint32_t next = st.iir_wait.front();
      st.iir_wait.pop_front();
      // The buffer already saw this fetch on first arrival.
      accept_fetch(sw, next, false);
    }
  }
}

void Sim::free_acr_slot(std::uint32_t sw) {
  SwitchState& st = sw_[sw];
  while (!st.pending_configs.empty() && st.core.acr.in_use() < st.core.acr.capacity) {
    const std::uint32_t g = st.pending_configs.front();
    st.pending_configs.pop_front();
    admit_config(sw, g);
  }
}

void Sim::egress(std::uint32_t sw, std::uint32_t g) {
  SwitchState& st = sw_[sw];
  HostWriteMessage msg = egress_result(st.core.acr, st.core.swap, g, now_);
  free_acr_slot(sw);
  const Group& grp = groups_[g];
  const auto count = static_cast<std::uint32_t>(grp.fetches.size());
  partials_[g] = std::move(msg.data);
  if (sw == grp.origin) {
    partial_delivery(g, count);
  } else {
    push(link_transfer(sw, grp.origin, msg.bytes, now_), EventKind::InterSwitchDelivery, 2, count, g);
  }
}

void Sim::partial_delivery(std::uint32_t g, std::uint32_t reported) {
  const Group& grp = groups_[g];
  ReqState& rs = rs_[grp.req];
  auto it = partials_.find(g);
  std::vector<double> partial = std::move(it->second);
  partials_.erase(it);
  if (grp.sw != grp.origin) {
    if (cfg_.engine.discard_probability > 0.0 &&
        static_cast<double>(rng_() >> 11) * 0x1.0p-53 < cfg_.engine.discard_probability) {
      ++reported;  // injected corruption of the partial's candidate count
    }
  }
  MergeResult r = merge_partials(rs.fwd, grp.sw, partial, reported);
  if (r.status == MergeStatus::Discard) {
    ++m_.discards;
    const auto g2 = static_cast<std::uint32_t>(groups_.size());
    Group copy = grp;
    copy.fetches.clear();
    for (auto fid : grp.fetches) {
      Fetch f = fetches_[fid];
      f.group = g2;
      f.stall = 0;
      fetches_.push_back(f);
      copy.fetches.push_back(static_cast<std::uint32_t>(fetches_.size() - 1));
    }
    groups_.push_back(std::move(copy));
    send_group(g2, now_);
    return;
  }
  if (r.status == MergeStatus::Waiting) return;

  rs.switch_result = std::move(r.sum);
  SwitchState& home = sw_[rs.sw];
  --home.contexts;
  if (!home.waiters.empty()) {
    auto [h, p] = home.waiters.front();
    home.waiters.pop_front();
    pipeline_next(h, p, now_ + from_ns(cfg_.core.cycle_ns));
  }
  push(upstream(rs.host, row_bytes(), now_), EventKind::ResultArrival, 0, 0, grp.req);
}

void Sim::result_arrival(std::uint32_t req) {
  ReqState& rs = rs_[req];
  rs.remote_done = true;
  rs.remote_done_at = now_;
  maybe_finish(req);
}

// ---------------------------------------------------------------------------
// page management

void Sim::epoch_boundary() {
  epoch_pending_ = false;
  HeatState& heat = *heat_;
  std::vector<std::uint64_t> cxl_counts;
  const auto counts = device_counts(heat, map_, devices_.size());
  for (std::uint32_t d = 0; d < devices_.size(); ++d) {
    if (!is_local(d)) cxl_counts.push_back(counts[d]);
  }
  if (!spread_recorded_) {
    m_.spread_stddev_before = pop_stddev(cxl_counts);
    spread_recorded_ = true;
  }
  m_.spread_stddev_after = pop_stddev(cxl_counts);

  Tick cursor = std::max(now_, mig_cursor_);
  auto apply = [&](const MigrationPlan& plan) {
    if (plan.empty()) return;
    for (const auto& w : execute_migration(plan, cfg_.pm, cursor, map_, devices_)) {
      windows_[w.page] = w;
      cursor = std::max(cursor, w.start + 64 * w.line_copy);
      ++m_.migrated_pages;
    }
  };
  apply(classify_epoch(heat, map_, devices_, cfg_.pm));
  apply(plan_spread(heat, map_, devices_, cfg_.pm));
  mig_cursor_ = cursor;
  heat.reset_epoch();
  ++m_.epochs;
}

// ---------------------------------------------------------------------------

RunMetrics Sim::run() {
  for (std::uint32_t h = 0; h < pipes_.size(); ++h) {
    for (std::uint32_t p = 0; p < pipes_[h].size(); ++p) {
      if (!pipes_[h][p].queue.empty()) push(0, EventKind::HostIssue, h, p);
    }
  }
  while (!q_.empty()) {
    const Event e = q_.top();
    q_.pop();
    now_ = e.time;
    ++m_.events;
    switch (e.kind) {
      case EventKind::HostIssue: host_issue(e.a, e.b); break;
      case EventKind::HostRead: host_read(static_cast<std::uint32_t>(e.c)); break;
      case EventKind::HostArrival: host_arrival(static_cast<std::uint32_t>(e.c)); break;
      case EventKind::SwitchIngress: switch_ingress(e.a, static_cast<Ingress>(e.b), e.c); break;
      case EventKind::MemSubmit: mem_submit(static_cast<std::uint32_t>(e.c), static_cast<Purpose>(e.b)); break;
      case EventKind::MemComplete: mem_complete(static_cast<std::uint32_t>(e.c), static_cast<Purpose>(e.b)); break;
      case EventKind::DataArrival: data_arrival(e.a, static_cast<std::uint32_t>(e.c), e.b != 0); break;
      case EventKind::Egress: egress(e.a, static_cast<std::uint32_t>(e.c)); break;
      case EventKind::InterSwitchDelivery: {
        const auto id = static_cast<std::uint32_t>(e.c);
        if (e.a == 2) {
          partial_delivery(id, e.b);
        } else if (static_cast<Purpose>(e.a) == Purpose::HostRead) {
          push(upstream(rs_[fetches_[id].req].host, row_bytes(), now_), EventKind::HostArrival, 0, 0, id);
        } else {
          data_arrival(groups_[fetches_[id].group].sw, id, false);
        }
        break;
      }
      case EventKind::ResultArrival: result_arrival(static_cast<std::uint32_t>(e.c)); break;
      case EventKind::EpochBoundary: epoch_boundary(); break;
      case EventKind::MigrationStart:
      case EventKind::MigrationEnd:
        break;
    }
  }
  if (finished_ != reqs_.size()) {
    throw ProtocolError("simulation stalled with " + std::to_string(reqs_.size() - finished_) +
                        " requests unfinished");
  }
  for (const auto& st : sw_) {
    if (st.core.acr.in_use() != 0 || st.core.iir.size() != 0) throw ProtocolError("switch state left dirty");
  }

  m_.system = cfg_.name;
  Tick end = 0;
  for (std::size_t b = 0; b < batch_last_.size(); ++b) {
    end = std::max(end, batch_last_[b]);
    const Tick first = batch_first_[b] == INT64_MAX ? 0 : batch_first_[b];
    m_.per_batch_latency_ns.push_back(to_ns(batch_last_[b] - first));
  }
  m_.total_latency_ns = to_ns(end);
  m_.requests = reqs_.size();
  m_.lookups = trace_.total_lookups();
  for (std::size_t d = 0; d < devices_.size(); ++d) {
    m_.device_ids.push_back(devices_[d].device_id);
    m_.per_device_access_counts.push_back(dev_state_[d].accesses);
    m_.bandwidth_utilization.push_back(end > 0 ? bandwidth_utilization(devices_[d], dev_state_[d], end) : 0.0);
  }
  auto count_buffer = [&](const std::optional<OnSwitchBuffer>& b) {
    if (!b) return;
    m_.buffer_accesses += b->accesses();
    m_.buffer_hits += b->hits();
  };
  for (const auto& st : sw_) count_buffer(st.buffer);
  for (const auto& c : dimm_cache_) count_buffer(c);
  m_.buffer_hit_ratio =
      m_.buffer_accesses ? static_cast<double>(m_.buffer_hits) / static_cast<double>(m_.buffer_accesses) : 0.0;
  m_.migration_stall_ns = to_ns(stall_ticks_);
  m_.migration_cost_fraction = end > 0 ? std::clamp(m_.migration_stall_ns / m_.total_latency_ns, 0.0, 1.0) : 0.0;
  return std::move(m_);
}

}  // namespace

RunMetrics run_simulation(const SystemConfig& system, const Trace& trace, std::uint64_t seed, const RunOptions& opts) {
  Sim sim(system, trace, seed, opts);
  return sim.run();
}

}  // namespace pifs
