// Copyright 2026 The dlsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bench/elasticity.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bench/runner.h"
#include "cluster/devcluster.h"

namespace dlsm {

namespace {

using Clock = std::chrono::steady_clock;

class Scenario {
 public:
  Scenario(const ElasticityOptions& o, DevCluster* cluster, LoadDriver* driver)
      : o_(o), cluster_(cluster), driver_(driver) {}

  SecondSample Tick() {
    next_ += std::chrono::seconds(1);
    std::this_thread::sleep_until(next_);
    SecondSample s = driver_->SampleSecond();
    seconds_.push_back(s);
    return s;
  }

  void ResetClock() { next_ = Clock::now(); }

  Result<ElasticityPhase> RunPhase(int ltcs, double unloaded_p99) {
    ElasticityPhase p;
    p.ltcs = ltcs;
    p.clients = o_.clients_per_ltc * ltcs;
    driver_->SetActiveThreads(p.clients);
    ResetClock();
    int streak = 0;
    int elapsed = 0;
    while (elapsed < o_.max_phase_s - o_.measure_s) {
      SecondSample s = Tick();
      ++elapsed;
      streak = s.latency.p99_us > o_.saturation_factor * unloaded_p99
                   ? streak + 1
                   : 0;
      if (streak >= o_.sustain_s) {
        p.saturated = true;
        break;
      }
    }
    double ops = 0, p99 = 0;
    for (int i = 0; i < o_.measure_s; ++i) {
      SecondSample s = Tick();
      if (i == 0) p.first_second = s.second;
      p.last_second = s.second;
      ops += static_cast<double>(s.ops);
      p99 += s.latency.p99_us;
    }
    p.throughput = ops / o_.measure_s;
    p.p99_us = p99 / o_.measure_s;
    return p;
  }

  // Pauses clients, settles the LSM state and runs `change` between two
  // placement snapshots.
  template <typename F>
  Status Change(ElasticityResult* r, F change) {
    driver_->Pause();
    auto timeout = std::chrono::seconds(60);
    DLSM_RETURN_IF_ERROR(cluster_->QuiesceAll(timeout));
    DLSM_ASSIGN_OR_RETURN(auto before, cluster_->Placements());
    DLSM_RETURN_IF_ERROR(change());
    DLSM_RETURN_IF_ERROR(cluster_->QuiesceAll(timeout));
    DLSM_ASSIGN_OR_RETURN(auto after, cluster_->Placements());
    ++r->membership_changes;
    r->tables_checked += before.size();
    if (before != after) {
      r->placements_unchanged = false;
      if (r->placement_diff.empty()) {
        r->placement_diff = "change " + std::to_string(r->membership_changes) +
                            ": " + std::to_string(before.size()) +
                            " tables before, " + std::to_string(after.size()) +
                            " after";
      }
    }
    driver_->Resume();
    return Status::OK();
  }

  std::vector<SecondSample>& seconds() { return seconds_; }

 private:
  const ElasticityOptions& o_;
  DevCluster* cluster_;
  LoadDriver* driver_;
  Clock::time_point next_;
  std::vector<SecondSample> seconds_;
};

}  // namespace

Result<ElasticityResult> RunElasticity(const ElasticityOptions& o) {
  if (o.start_ltcs < 1 || o.max_ltcs < o.start_ltcs || o.stocs < 1 ||
      o.clients_per_ltc < 1 || o.measure_s < 1 || o.sustain_s < 1) {
    return Status(Code::kConfigError, "elasticity: invalid options");
  }
  ClusterConfig config = MakeConfig(o.stocs, o.start_ltcs, 0, o.transport,
                                    o.transport == "tcp" ? 17000 : 0);
  config.n_ranges = o.n_ranges;
  config.seed = o.seed;
  config.ltc.cpu_cost_us = o.cpu_cost_us;
  config.ltc.memtable_bytes = 1u << 20;
  config.ltc.max_output_bytes = 2u << 20;
  DLSM_RETURN_IF_ERROR(config.Validate());
  DLSM_ASSIGN_OR_RETURN(auto cluster, DevCluster::Start(config));

  WorkloadSpec spec;
  spec.read_fraction = 1.0 - o.write_fraction;
  spec.key_count = o.key_count;
  spec.value_size_bytes = o.value_size_bytes;
  spec.client_threads = o.clients_per_ltc * o.max_ltcs;
  spec.duration_s = 1;
  spec.seed = o.seed;
  DevCluster* c = cluster.get();
  std::shared_ptr<Client> probe_client = c->NewClient("bench-probe");
  LoadDriver driver(
      spec,
      [c](int t) { return c->NewClient("bench-client-" + std::to_string(t)); },
      ProbeViaClient(probe_client));
  driver.SetActiveThreads(0);
  DLSM_RETURN_IF_ERROR(driver.Start());

  ElasticityResult r;
  Scenario sc(o, c, &driver);

  driver.SetActiveThreads(1);
  sc.ResetClock();
  std::vector<double> p99s;
  for (int i = 0; i < o.unloaded_s; ++i) p99s.push_back(sc.Tick().latency.p99_us);
  std::sort(p99s.begin(), p99s.end());
  r.unloaded_p99_us = p99s.empty() ? 0 : p99s[p99s.size() / 2];

  std::vector<std::string> added;
  for (int k = o.start_ltcs;; ++k) {
    DLSM_ASSIGN_OR_RETURN(ElasticityPhase p, sc.RunPhase(k, r.unloaded_p99_us));
    r.phases.push_back(p);
    if (k == o.max_ltcs) break;
    DLSM_RETURN_IF_ERROR(sc.Change(&r, [&]() -> Status {
      DLSM_ASSIGN_OR_RETURN(std::string name, c->AddLtc());
      added.push_back(name);
      return Status::OK();
    }));
  }
  for (int k = o.max_ltcs - 1; k >= o.start_ltcs; --k) {
    driver.SetActiveThreads(o.clients_per_ltc * k);
    DLSM_RETURN_IF_ERROR(sc.Change(&r, [&]() -> Status {
      std::string name = added.back();
      added.pop_back();
      return c->RemoveLtc(name);
    }));
    DLSM_ASSIGN_OR_RETURN(ElasticityPhase p, sc.RunPhase(k, r.unloaded_p99_us));
    r.phases.push_back(p);
  }
  r.metrics = driver.Finish();
  r.metrics.seconds = std::move(sc.seconds());
  cluster->Shutdown();
  return r;
}

std::string ElasticitySummary(const ElasticityResult& r) {
  std::string out = "unloaded p99 (us): " +
                    std::to_string(static_cast<int64_t>(r.unloaded_p99_us)) +
                    "\n";
  char buf[256];
  for (const auto& p : r.phases) {
    std::snprintf(buf, sizeof(buf),
                  "ltcs=%d clients=%d saturated=%s throughput=%.1f p99_us=%.0f "
                  "seconds=%u-%u\n",
                  p.ltcs, p.clients, p.saturated ? "yes" : "no", p.throughput,
                  p.p99_us, p.first_second, p.last_second);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "membership changes=%d tables checked=%zu placements %s\n",
                r.membership_changes, r.tables_checked,
                r.placements_unchanged ? "unchanged" : "CHANGED");
  out += buf;
  if (!r.placement_diff.empty()) out += r.placement_diff + "\n";
  return out;
}

Status EmitElasticityReport(const ElasticityResult& r, const std::string& dir) {
  DLSM_RETURN_IF_ERROR(EmitReport(r.metrics, dir, "dlsm elasticity"));
  std::string csv = "phase,ltcs,clients,saturated,throughput,p99_us,"
                    "first_second,last_second\n";
  char buf[256];
  for (size_t i = 0; i < r.phases.size(); ++i) {
    const auto& p = r.phases[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%.1f,%.0f,%u,%u\n", i + 1,
                  p.ltcs, p.clients, p.saturated ? 1 : 0, p.throughput,
                  p.p99_us, p.first_second, p.last_second);
    csv += buf;
  }
  std::ofstream out(std::filesystem::path(dir) / "phases.csv",
                    std::ios::binary | std::ios::trunc);
  out << csv;
  out.close();
  if (!out) return IoError("cannot write phases.csv");
  return Status::OK();
}

}  // namespace dlsm
