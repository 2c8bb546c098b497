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

// Acceptance checks A1-A8. Prints one PASS/FAIL line per criterion, with
// the measured numbers, and writes benchmark reports under --out.
// Exit status is 0 only when every selected criterion passes.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bench/elasticity.h"
#include "bench/runner.h"
#include "cluster/config.h"
#include "cluster/devcluster.h"
#include "golden_fixtures.h"
#include "lsm/sstable.h"
#include "stoc/stoc.h"
#include "transport/sim_network.h"
#include "worker/job.h"
#include "worker/worker.h"

namespace dlsm {
namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

struct Options {
  std::string out = "acceptance-out";
  uint64_t seed = 1;
  std::string golden_dir = DLSM_GOLDEN_DIR;
};

// A1: seeded mixed workloads against a 2 LTC / 3 StoC / 1 worker
// devcluster, each operation checked against a per-thread sorted-map
// oracle. Odd runs compact on the worker and force flushes while running.
Verdict OracleCorrectness(const Options& opt) {
  auto start = Clock::now();
  uint64_t mismatches = 0, errors = 0, ops = 0, flushes = 0, compactions = 0;
  std::string example;
  for (int run = 0; run < 10; ++run) {
    ClusterConfig c = MakeConfig(3, 2, 1);
    c.seed = opt.seed + run;
    c.n_ranges = 16;
    c.ltc.memtable_bytes = 32 << 10;
    c.ltc.block_size_bytes = 1024;
    c.ltc.l0_trigger = 2;
    c.ltc.level1_target_bytes = 128 << 10;
    c.ltc.max_output_bytes = 64 << 10;
    c.ltc.local_compaction = run % 2 == 0;
    auto dc = DevCluster::Start(c);
    if (!dc.ok()) return {false, dc.status().ToString()};
    DevCluster& cluster = **dc;

    std::atomic<bool> done{false};
    std::thread flusher;
    if (run % 2 == 1) {
      flusher = std::thread([&] {
        while (!done.load()) {
          for (const auto& name : cluster.LiveLtcs()) {
            if (Ltc* l = cluster.ltc(name)) (void)l->FlushAll();
          }
          std::this_thread::sleep_for(milliseconds(100));
        }
      });
    }

    WorkloadSpec s;
    s.read_fraction = 0.4;
    s.scan_fraction = 0.05;
    s.delete_fraction = 0.1;
    s.key_count = 5000;
    s.value_size_bytes = 64;
    s.ops = 100000;
    s.duration_s = 0;
    s.client_threads = 4;
    s.seed = opt.seed * 1000 + run;
    s.verify = true;
    auto m = RunWorkload(s, [&](int t) {
      return cluster.NewClient("a1-" + std::to_string(t));
    });
    done = true;
    if (flusher.joinable()) flusher.join();
    if (!m.ok()) return {false, m.status().ToString()};
    for (const auto& name : cluster.LiveLtcs()) {
      LtcStats st = cluster.ltc(name)->Stats();
      flushes += st.flushes;
      compactions += st.compactions_applied;
    }
    ops += m->ops;
    errors += m->errors;
    mismatches += m->mismatches;
    if (example.empty() && !m->mismatch_examples.empty()) {
      example = m->mismatch_examples.front();
    }
    cluster.Shutdown();
  }
  double secs = Seconds(start);
  bool pass = mismatches == 0 && errors == 0 && ops == 1000000 &&
              flushes > 0 && compactions > 0 && secs < 120;
  std::string d = Fmt("10 runs, %" PRIu64 " ops, %" PRIu64
                      " mismatches, %" PRIu64 " errors, %" PRIu64
                      " flushes, %" PRIu64 " compactions, %.1f s (limit 120 s)",
                      ops, mismatches, errors, flushes, compactions, secs);
  if (!example.empty()) d += "; first mismatch: " + example;
  return {pass, d};
}

// A2: random compaction jobs computed in-process and on a remote worker
// reached over the transport; every output table must match byte for byte.
Verdict RemoteCompactionEquivalence(const Options& opt) {
  auto start = Clock::now();
  auto net = SimNetwork::Create(SimOptions{.seed = opt.seed});
  std::vector<std::unique_ptr<StocServer>> stocs;
  std::vector<std::string> names;
  for (int i = 0; i < 3; ++i) {
    std::string name = "stoc-" + std::to_string(i);
    auto s = StocServer::Open(StocOptions{}, net->Endpoint(name));
    if (!s.ok()) return {false, s.status().ToString()};
    if (Status st = (*s)->Start(name); !st.ok()) return {false, st.ToString()};
    stocs.push_back(std::move(s).value());
    names.push_back(name);
  }
  WorkerOptions wo;
  wo.max_concurrent = 2;
  WorkerServer worker(wo, net->Endpoint("worker-0"));
  if (Status st = worker.Start("worker-0"); !st.ok()) {
    return {false, st.ToString()};
  }
  StocClient client(net->Endpoint("ltc"), milliseconds(10000),
                    std::make_shared<StocStatsBoard>());

  std::mt19937_64 rng(opt.seed);
  uint64_t tables = 0, identical_jobs = 0;
  std::string first_failure;
  for (uint64_t j = 0; j < 200; ++j) {
    CompactionJob job;
    job.job_id = (j + 1) << 16;
    job.range_id = static_cast<uint32_t>(rng() % 64);
    job.epoch = 1 + rng() % 5;
    job.target_level = 1 + static_cast<int>(rng() % 3);
    job.purge_tombstones = rng() % 2 == 0;
    job.sst.block_size_bytes = 256u << (rng() % 5);
    job.sst.bloom_bits_per_key = 5 + static_cast<int>(rng() % 10);
    job.max_output_bytes = (8u << 10) << (rng() % 4);
    job.output_stocs = names;
    job.d = 1 + static_cast<int>(rng() % 2);

    int n_inputs = 1 + static_cast<int>(rng() % 6);
    int key_space = 50 + static_cast<int>(rng() % 2000);
    SeqNo seq = 1;
    std::uniform_int_distribution<int> key(0, key_space - 1);
    std::uniform_int_distribution<size_t> len(0, 200);
    double tombstones = (rng() % 4) * 0.1;
    bool ok = true;
    for (int i = 0; i < n_inputs && ok; ++i) {
      size_t n = 1 + rng() % 1500;
      std::map<std::string, Entry> run;
      for (size_t k = 0; k < n; ++k) {
        Entry e;
        e.key = Fmt("key%08d", key(rng));
        e.seq = seq++;
        if (std::bernoulli_distribution(tombstones)(rng)) {
          e.type = ValueType::kTombstone;
        } else {
          e.value.assign(len(rng), static_cast<char>('a' + rng() % 26));
        }
        run[e.key] = std::move(e);
      }
      std::vector<Entry> entries;
      for (auto& [k, e] : run) entries.push_back(std::move(e));
      auto sst = EncodeSst(entries, job.sst);
      if (!sst.ok()) return {false, sst.status().ToString()};
      ObjectId id{job.range_id, (uint64_t{1} << 40) + j * 16 + i};
      std::string where = names[rng() % names.size()];
      if (auto put = client.PutObject(where, id, sst->bytes); !put.ok()) {
        return {false, put.status().ToString()};
      }
      job.inputs.push_back(JobInput{id, where, sst->bytes.size()});
    }

    auto local = CompactJobInputs(job, client);
    if (!local.ok()) return {false, local.status().ToString()};
    std::string req;
    EncodeJob(&req, job);
    auto body = CallBody(*client.transport(), "worker-0", Opcode::kCompact,
                         job.epoch, req, milliseconds(30000));
    if (!body.ok()) return {false, body.status().ToString()};
    CompactionResult remote;
    if (Status st = DecodeResult(*body, &remote); !st.ok()) {
      return {false, st.ToString()};
    }
    bool same = remote.outputs.size() == local->tables.size();
    for (size_t i = 0; same && i < remote.outputs.size(); ++i) {
      auto bytes = client.GetObject(remote.outputs[i].stoc,
                                    remote.outputs[i].id, 0, UINT64_MAX);
      same = bytes.ok() && *bytes == local->tables[i].bytes &&
             remote.outputs[i].summary == local->tables[i].summary;
    }
    tables += local->tables.size();
    if (same) {
      ++identical_jobs;
    } else if (first_failure.empty()) {
      first_failure = Fmt("job %" PRIu64, j);
    }
  }
  worker.Stop();
  for (auto& s : stocs) s->Stop();
  double secs = Seconds(start);
  std::string d = Fmt("%" PRIu64 "/200 jobs byte-identical (%" PRIu64
                      " output tables), %.1f s (limit 60 s)",
                      identical_jobs, tables, secs);
  if (!first_failure.empty()) d += "; first difference: " + first_failure;
  return {identical_jobs == 200 && secs < 60, d};
}

// A3 and A4 share one elasticity scenario.
struct ElasticityVerdicts {
  Verdict shape;
  Verdict placements;
};

ElasticityVerdicts Elasticity(const Options& opt) {
  auto start = Clock::now();
  ElasticityOptions o;
  o.max_ltcs = 3;
  o.stocs = 4;
  o.seed = opt.seed;
  auto r = RunElasticity(o);
  double secs = Seconds(start);
  if (!r.ok()) {
    Verdict v{false, r.status().ToString()};
    return {v, v};
  }
  (void)EmitElasticityReport(*r, opt.out + "/elasticity");

  // Rising phases come first, one per LTC count, then the falling ones.
  std::map<int, double> rising;
  std::vector<double> falling_one;
  bool descending = false;
  int prev = 0;
  for (const auto& p : r->phases) {
    if (p.ltcs < prev) descending = true;
    prev = p.ltcs;
    if (!descending) {
      rising[p.ltcs] = p.throughput;
    } else if (p.ltcs == 1) {
      falling_one.push_back(p.throughput);
    }
  }
  ElasticityVerdicts v;
  double t1 = rising.count(1) ? rising[1] : 0;
  double t2 = rising.count(2) ? rising[2] : 0;
  double t3 = rising.count(3) ? rising[3] : 0;
  double back = falling_one.empty() ? 0 : falling_one.back();
  bool shape = t1 > 0 && t2 >= 0.8 * 2 * t1 && t3 >= 0.8 * 3 * t1 &&
               t1 < t2 && t2 < t3 && std::abs(back - t1) <= 0.1 * t1 &&
               secs < 300;
  v.shape = {shape,
             Fmt("throughput 1/2/3 LTCs %.0f/%.0f/%.0f ops/s (need >= %.0f "
                 "and >= %.0f), back at 1 LTC %.0f ops/s (%.1f%% from "
                 "baseline, limit 10%%), %.1f s (limit 300 s)",
                 t1, t2, t3, 1.6 * t1, 2.4 * t1, back,
                 t1 > 0 ? 100.0 * std::abs(back - t1) / t1 : 0.0, secs)};
  bool placements = r->placements_unchanged && r->tables_checked > 0 &&
                    r->membership_changes == 4;
  std::string d = Fmt("%d membership changes, %" PRIu64
                      " table placements compared, %s",
                      r->membership_changes,
                      static_cast<uint64_t>(r->tables_checked),
                      r->placements_unchanged ? "all unchanged" : "changed");
  if (!r->placement_diff.empty()) d += ": " + r->placement_diff;
  v.placements = {placements, d};
  return v;
}

// A5: write-heavy load with compaction only on workers. Backlog is the
// number of outstanding compaction jobs over all LTCs, sampled each second.
struct OffloadRun {
  double backlog = 0;
  uint32_t put_p99_us = 0;
  double throughput = 0;
  uint64_t remote_jobs = 0;
};

Result<OffloadRun> RunOffload(const Options& opt, int workers,
                              int duration_s) {
  ClusterConfig c = MakeConfig(4, 2, workers);
  c.seed = opt.seed;
  c.n_ranges = 16;
  c.ltc.local_compaction = false;
  c.ltc.memtable_bytes = 64 << 10;
  c.ltc.block_size_bytes = 4096;
  c.ltc.l0_trigger = 2;
  c.ltc.level1_target_bytes = 1 << 20;
  c.ltc.max_output_bytes = 256 << 10;
  c.ltc.report_interval_ms = 200;
  // Offered load is fixed by the emulated LTC compute, so both runs see
  // the same write rate.
  c.ltc.cpu_cost_us = 200;
  c.ltc.cpu_cores = 1;
  c.worker.max_concurrent = 1;
  c.worker.job_fixed_cost_us = 100000;
  c.worker.job_cost_us_per_kib = 20;
  DLSM_ASSIGN_OR_RETURN(auto dc, DevCluster::Start(c));
  WorkloadSpec s;
  s.read_fraction = 0.1;
  s.key_count = 1000000;
  s.value_size_bytes = 200;
  s.duration_s = duration_s;
  s.ops = 0;
  s.client_threads = 4;
  s.seed = opt.seed;
  GaugeProbe probe = [&] {
    ClusterGauges g;
    g.backlog = dc->Backlog();
    g.ltcs = static_cast<uint32_t>(dc->LiveLtcs().size());
    return g;
  };
  auto m = RunWorkload(s, [&](int t) {
    return dc->NewClient("a5-" + std::to_string(t));
  }, probe);
  OffloadRun out;
  for (const auto& name : dc->LiveLtcs()) {
    out.remote_jobs += dc->ltc(name)->Stats().remote_jobs;
  }
  dc->Shutdown();
  DLSM_RETURN_IF_ERROR(m.status());
  (void)EmitReport(*m, opt.out + "/offload-" + std::to_string(workers) +
                           "-workers");
  size_t window = std::min<size_t>(30, m->seconds.size());
  double sum = 0;
  for (size_t i = m->seconds.size() - window; i < m->seconds.size(); ++i) {
    sum += m->seconds[i].backlog;
  }
  out.backlog = window > 0 ? sum / window : 0;
  out.put_p99_us = m->put_latency.p99_us;
  out.throughput = m->Throughput();
  return out;
}

Verdict CompactionOffload(const Options& opt, int duration_s) {
  auto start = Clock::now();
  auto one = RunOffload(opt, 1, duration_s);
  if (!one.ok()) return {false, one.status().ToString()};
  auto four = RunOffload(opt, 4, duration_s);
  if (!four.ok()) return {false, four.status().ToString()};
  double secs = Seconds(start);
  double ratio = four->backlog > 0 ? one->backlog / four->backlog
                                   : (one->backlog > 0 ? INFINITY : 0);
  double p99_change =
      one->put_p99_us > 0
          ? std::abs(static_cast<double>(four->put_p99_us) - one->put_p99_us) /
                one->put_p99_us
          : 0;
  bool pass = ratio >= 2.0 && p99_change <= 0.2 && secs < 300;
  return {pass,
          Fmt("backlog over final 30 s: 1 worker %.2f, 4 workers %.2f "
              "(reduction %.2fx, need >= 2x); put p99 %u us vs %u us "
              "(change %.1f%%, limit 20%%); throughput %.0f vs %.0f ops/s; "
              "%.1f s (limit 300 s)",
              one->backlog, four->backlog, ratio, one->put_p99_us,
              four->put_p99_us, 100 * p99_change, one->throughput,
              four->throughput, secs)};
}

// A6: crash schedules on the disk tier. One client thread issues puts and
// deletes while a chaos thread kills and restarts random components. A key
// may end in any state written by an operation that failed after its last
// acknowledged one; anything else is a loss or a resurrection.
struct CrashOutcome {
  uint64_t acked = 0;
  uint64_t failed = 0;
  uint64_t checked = 0;
  uint64_t lost = 0;
  uint64_t resurrected = 0;
  uint64_t read_errors = 0;
  uint64_t kills = 0;
  std::string example;
};

Status RunCrashSchedule(uint64_t seed, const std::string& dir,
                        CrashOutcome* out) {
  ClusterConfig c = MakeConfig(3, 2, 1);
  c.seed = seed;
  c.tier = "disk";
  c.data_dir = dir;
  c.r = 1;
  c.n_ranges = 4;
  c.ltc.memtable_bytes = 8 << 10;
  c.ltc.block_size_bytes = 1024;
  c.ltc.l0_trigger = 2;
  c.ltc.level1_target_bytes = 64 << 10;
  c.ltc.max_output_bytes = 32 << 10;
  c.ltc.local_compaction = seed % 2 == 0;
  c.heartbeat_ms = 50;
  c.missed_heartbeats = 3;
  c.rpc_timeout_ms = 1000;
  DLSM_ASSIGN_OR_RETURN(auto dc, DevCluster::Start(c));

  std::mt19937_64 rng(Mix64(seed));
  std::atomic<bool> chaos_done{false};
  std::atomic<uint64_t> kills{0};
  Status chaos_status;
  std::thread chaos([&] {
    std::mt19937_64 crng(Mix64(seed ^ 0xC4A05));
    int events = 1 + static_cast<int>(crng() % 3);
    for (int e = 0; e < events; ++e) {
      std::this_thread::sleep_for(milliseconds(crng() % 300));
      int kind = static_cast<int>(crng() % 3);
      Status s;
      std::function<Status()> restart;
      if (kind == 0) {
        std::string name = c.ltcs[crng() % c.ltcs.size()];
        s = dc->KillLtc(name);
        restart = [&, name] { return dc->RestartLtc(name); };
      } else if (kind == 1) {
        size_t i = crng() % c.stocs.size();
        s = dc->KillStoc(i);
        restart = [&, i] { return dc->RestartStoc(i); };
      } else {
        s = dc->KillWorker(0);
        restart = [&] { return dc->RestartWorker(0); };
      }
      if (!s.ok()) {
        chaos_status = s;
        break;
      }
      ++kills;
      std::this_thread::sleep_for(milliseconds(20 + crng() % 300));
      if (Status r = restart(); !r.ok()) {
        chaos_status = r;
        break;
      }
    }
    chaos_done = true;
  });

  ClientOptions co;
  co.rpc_timeout = milliseconds(1000);
  co.retry_deadline = milliseconds(15000);
  auto client = dc->NewClient("a6-client", co);
  // Possible final states per key; nullopt is "absent".
  std::map<std::string, std::set<std::optional<std::string>>> possible;
  const int kKeys = 300;
  uint64_t i = 0;
  while (!chaos_done.load() || i < 300) {
    std::string key = Fmt("k%05d", static_cast<int>(rng() % kKeys));
    bool del = rng() % 10 < 3;
    std::optional<std::string> outcome;
    if (!del) outcome = Fmt("s%" PRIu64 "-op%" PRIu64, seed, i);
    Status s = del ? client->Delete(key).status()
                   : client->Put(key, *outcome).status();
    auto& states = possible[key];
    if (states.empty()) states.insert(std::nullopt);
    if (s.ok()) {
      states = {outcome};
      ++out->acked;
    } else {
      states.insert(outcome);
      ++out->failed;
    }
    ++i;
  }
  chaos.join();
  out->kills += kills.load();
  DLSM_RETURN_IF_ERROR(chaos_status);

  for (const auto& [key, states] : possible) {
    auto got = client->Get(key);
    ++out->checked;
    if (!got.ok()) {
      ++out->read_errors;
      if (out->example.empty()) {
        out->example = key + ": " + got.status().ToString();
      }
      continue;
    }
    if (states.count(*got) > 0) continue;
    if (got->has_value()) {
      bool only_absent = states.size() == 1 && !states.begin()->has_value();
      if (only_absent) {
        ++out->resurrected;
      } else {
        ++out->lost;
      }
    } else {
      ++out->lost;
    }
    if (out->example.empty()) {
      out->example = Fmt("seed %" PRIu64 " key %s read %s", seed, key.c_str(),
                         got->has_value() ? (*got)->c_str() : "<absent>");
    }
  }
  dc->Shutdown();
  return Status::OK();
}

Verdict Durability(const Options& opt) {
  auto start = Clock::now();
  auto root = std::filesystem::temp_directory_path() /
              Fmt("dlsm-acceptance-a6-%d", static_cast<int>(getpid()));
  CrashOutcome total;
  for (uint64_t s = 0; s < 50; ++s) {
    auto dir = root / std::to_string(s);
    std::filesystem::create_directories(dir);
    Status st = RunCrashSchedule(opt.seed * 100 + s, dir.string(), &total);
    std::filesystem::remove_all(dir);
    if (!st.ok()) {
      std::filesystem::remove_all(root);
      return {false, Fmt("schedule %" PRIu64 ": ", s) + st.ToString()};
    }
  }
  std::filesystem::remove_all(root);
  double secs = Seconds(start);
  bool pass = total.lost == 0 && total.resurrected == 0 &&
              total.read_errors == 0 && secs < 180;
  std::string d =
      Fmt("50 schedules, %" PRIu64 " kills, %" PRIu64 " acked and %" PRIu64
          " failed writes, %" PRIu64 " keys checked: %" PRIu64
          " lost, %" PRIu64 " resurrected, %" PRIu64
          " unreadable, %.1f s (limit 180 s)",
          total.kills, total.acked, total.failed, total.checked, total.lost,
          total.resurrected, total.read_errors, secs);
  if (!total.example.empty()) d += "; e.g. " + total.example;
  return {pass, d};
}

// A7: share of flushes that land on the one slow StoC among eight.
Result<double> SlowStocShare(const Options& opt, int d, int flushes) {
  auto net = SimNetwork::Create(SimOptions{.seed = opt.seed});
  std::vector<std::unique_ptr<StocServer>> stocs;
  std::vector<std::string> names;
  for (int i = 0; i < 8; ++i) {
    std::string name = "stoc-" + std::to_string(i);
    StocOptions so;
    so.seed = Mix64(opt.seed + i);
    if (i == 7) so.inject_latency_us = 10000;
    DLSM_ASSIGN_OR_RETURN(auto s, StocServer::Open(so, net->Endpoint(name)));
    DLSM_RETURN_IF_ERROR(s->Start(name));
    stocs.push_back(std::move(s));
    names.push_back(name);
  }
  LtcOptions lo;
  lo.name = "ltc-0";
  lo.stocs = names;
  lo.d = d;
  lo.seed = Mix64(opt.seed ^ 0xA7);
  Ltc ltc(lo, net->Endpoint("ltc-0"));
  DLSM_RETURN_IF_ERROR(ltc.Start("ltc-0"));
  RangeDescriptor desc;
  desc.range_id = 0;
  desc.epoch = 1;
  DLSM_RETURN_IF_ERROR(ltc.Adopt(desc, {"stoc-0"}, std::nullopt));
  for (int i = 0; i < flushes; ++i) {
    DLSM_RETURN_IF_ERROR(ltc.Put(Fmt("key%06d", i), "value").status());
    DLSM_RETURN_IF_ERROR(ltc.FlushAll());
  }
  LtcStats st = ltc.Stats();
  ltc.Stop();
  for (auto& s : stocs) s->Stop();
  uint64_t total = 0;
  for (const auto& [stoc, n] : st.flushes_per_stoc) total += n;
  if (total != static_cast<uint64_t>(flushes)) {
    return InternalError(Fmt("expected %d flushes, saw %" PRIu64, flushes,
                             total));
  }
  auto slow = st.flushes_per_stoc.find("stoc-7");
  uint64_t n = slow == st.flushes_per_stoc.end() ? 0 : slow->second;
  return static_cast<double>(n) / total;
}

Verdict PowerOfD(const Options& opt) {
  auto two = SlowStocShare(opt, 2, 1000);
  if (!two.ok()) return {false, two.status().ToString()};
  auto one = SlowStocShare(opt, 1, 1000);
  if (!one.ok()) return {false, one.status().ToString()};
  bool pass = *two < 0.05 && std::abs(*one - 0.125) <= 0.02;
  return {pass, Fmt("slow StoC received %.1f%% of 1000 flushes with d=2 "
                    "(limit 5%%), %.1f%% with d=1 (expected 12.5%% +/- 2%%)",
                    100 * *two, 100 * *one)};
}

// A8: decoding the checked-in golden files yields the fixtures, and
// encoding the fixtures yields the files.
Verdict FormatStability(const Options& opt) {
  auto read = [&](const char* name) {
    return golden::ReadFile(opt.golden_dir + "/" + name);
  };
  std::vector<std::string> failures;
  auto check = [&](const char* name, bool ok) {
    if (!ok) failures.push_back(name);
  };

  std::string sst = read("sst_v1.bin");
  auto decoded = DecodeSst(sst);
  auto encoded = EncodeSst(golden::TableEntries(), golden::TableOptions());
  check("sst_v1.bin", decoded.ok() && encoded.ok() &&
                          decoded->entries == golden::TableEntries() &&
                          encoded->bytes == sst);

  std::string put = read("frame_put.bin");
  auto put_frame = DecodeFrame(put);
  check("frame_put.bin", put_frame.ok() &&
                             *put_frame == golden::PutRequest() &&
                             *EncodeFrame(*put_frame) == put);

  std::string err = read("frame_not_owner.bin");
  auto err_frame = DecodeFrame(err);
  check("frame_not_owner.bin",
        err_frame.ok() && *err_frame == golden::NotOwnerResponse() &&
            ParseResponse(*err_frame).status().Is(Code::kNotOwner) &&
            *EncodeFrame(*err_frame) == err);

  std::string manifest = read("manifest_v1.bin");
  auto m = RangeManifest::Decode(manifest);
  check("manifest_v1.bin", m.ok() && *m == golden::Manifest() &&
                               m->Encode() == manifest);

  std::string view = read("view_v1.bin");
  auto v = ClusterView::Decode(view);
  check("view_v1.bin", v.ok() && *v == golden::View() && v->Encode() == view);

  if (failures.empty()) {
    return {true, "5 golden files (SSTable, request frame, error frame, "
                  "manifest, view) decode to their fixtures and re-encode "
                  "identically"};
  }
  std::string d = "mismatched:";
  for (const auto& f : failures) d += " " + f;
  return {false, d};
}

void Print(const char* id, const char* title, const Verdict& v) {
  std::printf("%s %s %s: %s\n", id, v.pass ? "PASS" : "FAIL", title,
              v.detail.c_str());
  std::fflush(stdout);
}

}  // namespace
}  // namespace dlsm

int main(int argc, char** argv) {
  dlsm::Options opt;
  std::string only;
  int offload_seconds = 45;
  CLI::App app{"dlsm acceptance checks"};
  app.add_option("--only", only, "Comma-separated criteria, e.g. A1,A7");
  app.add_option("--out", opt.out, "Directory for benchmark reports");
  app.add_option("--seed", opt.seed, "Base seed");
  app.add_option("--golden-dir", opt.golden_dir, "Golden file directory");
  app.add_option("--offload-seconds", offload_seconds,
                 "Duration of each compaction offload run (>= 30)")
      ->check(CLI::Range(30, 240));
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> selected;
  for (const char* id : {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"}) {
    if (only.empty() || only.find(id) != std::string::npos) {
      selected.insert(id);
    }
  }
  std::filesystem::create_directories(opt.out);
  bool all = true;
  auto record = [&](const char* id, const char* title,
                    const dlsm::Verdict& v) {
    dlsm::Print(id, title, v);
    all = all && v.pass;
  };
  if (selected.count("A1")) {
    record("A1", "oracle correctness", dlsm::OracleCorrectness(opt));
  }
  if (selected.count("A2")) {
    record("A2", "remote compaction equivalence",
           dlsm::RemoteCompactionEquivalence(opt));
  }
  if (selected.count("A3") || selected.count("A4")) {
    auto v = dlsm::Elasticity(opt);
    if (selected.count("A3")) record("A3", "elasticity shape", v.shape);
    if (selected.count("A4")) {
      record("A4", "elasticity moves no data", v.placements);
    }
  }
  if (selected.count("A5")) {
    record("A5", "compaction offload benefit",
           dlsm::CompactionOffload(opt, offload_seconds));
  }
  if (selected.count("A6")) record("A6", "durability", dlsm::Durability(opt));
  if (selected.count("A7")) {
    record("A7", "power-of-d placement", dlsm::PowerOfD(opt));
  }
  if (selected.count("A8")) {
    record("A8", "format and protocol stability",
           dlsm::FormatStability(opt));
  }
  return all ? 0 : 1;
}
