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

#include "bench/runner.h"

#include <set>

#include <nlohmann/json.hpp>

#include "lsm/types.h"

namespace dlsm {

using Clock = std::chrono::steady_clock;

GaugeProbe ProbeViaClient(std::shared_ptr<Client> client) {
  return [client]() {
    ClusterGauges g;
    (void)client->Refresh();
    auto view = client->view();
    if (view == nullptr) return g;
    for (const auto& ltc : view->ltcs) {
      if (!ltc.healthy) continue;
      ++g.ltcs;
      auto stats = client->LtcStats(ltc.address);
      if (!stats.ok()) continue;
      auto j = nlohmann::json::parse(*stats, nullptr, false);
      if (j.is_discarded()) continue;
      g.backlog += j.value("backlog", uint64_t{0});
      g.cpu[ltc.address] = {j.value("cpu_busy_us", uint64_t{0}),
                            j.value("cpu_cores", 1)};
    }
    return g;
  };
}

LoadDriver::LoadDriver(WorkloadSpec spec, ClientFactory factory,
                       GaugeProbe probe)
    : spec_(std::move(spec)),
      factory_(std::move(factory)),
      probe_(std::move(probe)),
      zipf_(MakeSampler(spec_)),
      active_(spec_.client_threads) {}

LoadDriver::~LoadDriver() { (void)Finish(); }

Status LoadDriver::Start() {
  DLSM_RETURN_IF_ERROR(spec_.Validate());
  auto probe_client = factory_(-1);
  Status s = probe_client->Refresh();
  if (!s.ok()) return UnavailableError("cluster unavailable: " + s.ToString());
  if (probe_) cpu_start_ = cpu_last_ = probe_().cpu;
  started_ = last_sample_ = Clock::now();
  for (int t = 0; t < spec_.client_threads; ++t) {
    states_.push_back(std::make_unique<ThreadState>());
  }
  for (int t = 0; t < spec_.client_threads; ++t) {
    threads_.emplace_back([this, t] { ThreadMain(t); });
  }
  return Status::OK();
}

void LoadDriver::SetActiveThreads(int n) {
  std::lock_guard<std::mutex> l(gate_mu_);
  active_ = n;
  gate_cv_.notify_all();
}

void LoadDriver::Pause() {
  std::unique_lock<std::mutex> l(gate_mu_);
  paused_ = true;
  gate_cv_.wait(l, [&] { return inflight_ == 0; });
}

void LoadDriver::Resume() {
  std::lock_guard<std::mutex> l(gate_mu_);
  paused_ = false;
  gate_cv_.notify_all();
}

bool LoadDriver::Done() const {
  for (const auto& s : states_) {
    std::lock_guard<std::mutex> l(s->mu);
    if (!s->done) return false;
  }
  return true;
}

void LoadDriver::ThreadMain(int t) {
  ThreadState& st = *states_[t];
  auto client = factory_(t);
  OpGenerator gen(spec_, t, zipf_);
  uint64_t threads = static_cast<uint64_t>(spec_.client_threads);
  uint64_t budget = spec_.ops == 0
                        ? UINT64_MAX
                        : spec_.ops / threads +
                              (static_cast<uint64_t>(t) < spec_.ops % threads);
  // Verify mode: this thread's keys only.
  std::map<std::string, std::string> oracle;
  std::set<std::string> uncertain, touched;

  auto mismatch = [&](uint64_t i, const std::string& what) {
    std::lock_guard<std::mutex> l(st.mu);
    ++st.mismatches;
    if (st.mismatch_examples.size() < 10) {
      st.mismatch_examples.push_back("thread " + std::to_string(t) + " op " +
                                     std::to_string(i) + ": " + what);
    }
  };

  for (uint64_t i = 0; i < budget; ++i) {
    Op op = gen.Next();
    std::string key = ItemKey(op.item);
    {
      std::unique_lock<std::mutex> l(gate_mu_);
      gate_cv_.wait(l, [&] {
        return stopping_ || (!paused_ && t < active_);
      });
      if (stopping_) break;
      ++inflight_;
    }
    auto t0 = Clock::now();
    bool failed = false;
    bool hit = false;
    switch (op.type) {
      case OpType::kRead: {
        auto r = client->Get(key);
        failed = !r.ok();
        if (failed) break;
        hit = r->has_value();
        if (spec_.verify && uncertain.count(key) == 0) {
          auto it = oracle.find(key);
          if (hit != (it != oracle.end()) || (hit && **r != it->second)) {
            mismatch(i, "get " + EscapeBytes(key) + " expected " +
                            (it == oracle.end() ? "none" : EscapeBytes(it->second)) +
                            " got " + (hit ? EscapeBytes(**r) : "none"));
          }
        }
        break;
      }
      case OpType::kWrite: {
        auto r = client->Put(key, op.value);
        failed = !r.ok();
        if (!spec_.verify) break;
        touched.insert(key);
        if (failed) {
          uncertain.insert(key);
        } else {
          oracle[key] = op.value;
          uncertain.erase(key);
        }
        break;
      }
      case OpType::kDelete: {
        auto r = client->Delete(key);
        failed = !r.ok();
        if (!spec_.verify) break;
        touched.insert(key);
        if (failed) {
          uncertain.insert(key);
        } else {
          oracle.erase(key);
          uncertain.erase(key);
        }
        break;
      }
      case OpType::kScan: {
        auto r = client->Scan(key, "", spec_.scan_length);
        failed = !r.ok();
        if (failed || !spec_.verify) break;
        bool truncated = spec_.scan_length != 0 && r->size() == spec_.scan_length;
        std::map<std::string, std::string> got;
        for (const auto& [k, v] : *r) {
          if (touched.count(k) != 0 && uncertain.count(k) == 0) got[k] = v;
        }
        std::map<std::string, std::string> want;
        for (auto it = oracle.lower_bound(key); it != oracle.end(); ++it) {
          if (truncated && it->first > r->back().first) break;
          if (uncertain.count(it->first) == 0) want.insert(*it);
        }
        if (got != want) {
          mismatch(i, "scan from " + EscapeBytes(key) + " returned " +
                          std::to_string(got.size()) + " own rows, expected " +
                          std::to_string(want.size()));
        }
        break;
      }
    }
    auto us = static_cast<uint32_t>(std::min<int64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0)
            .count(),
        UINT32_MAX));
    {
      std::lock_guard<std::mutex> l(st.mu);
      st.window.push_back(us);
      st.all.push_back(us);
      switch (op.type) {
        case OpType::kRead:
          ++st.reads;
          st.found += hit;
          st.gets.push_back(us);
          break;
        case OpType::kWrite:
          ++st.writes;
          st.puts.push_back(us);
          break;
        case OpType::kScan:
          ++st.scans;
          break;
        case OpType::kDelete:
          ++st.deletes;
          break;
      }
      if (failed) {
        ++st.errors;
        ++st.window_errors;
      }
    }
    {
      std::lock_guard<std::mutex> l(gate_mu_);
      if (--inflight_ == 0) gate_cv_.notify_all();
    }
  }
  std::lock_guard<std::mutex> l(st.mu);
  st.done = true;
}

namespace {

double Utilization(const std::map<std::string, std::pair<uint64_t, int>>& now,
                   const std::map<std::string, std::pair<uint64_t, int>>& then,
                   double seconds, std::map<std::string, double>* per_ltc) {
  if (seconds <= 0 || now.empty()) return 0;
  double sum = 0;
  for (const auto& [ltc, cpu] : now) {
    auto it = then.find(ltc);
    uint64_t before = it == then.end() ? 0 : it->second.first;
    double u = static_cast<double>(cpu.first - std::min(before, cpu.first)) /
               (seconds * 1e6 * std::max(cpu.second, 1));
    if (per_ltc != nullptr) (*per_ltc)[ltc] = u;
    sum += u;
  }
  return sum / now.size();
}

}  // namespace

SecondSample LoadDriver::SampleSecond() {
  SecondSample s;
  s.second = ++second_;
  std::vector<uint32_t> window;
  for (auto& st : states_) {
    std::lock_guard<std::mutex> l(st->mu);
    window.insert(window.end(), st->window.begin(), st->window.end());
    st->window.clear();
    s.errors += st->window_errors;
    st->window_errors = 0;
  }
  auto now = Clock::now();
  double dt = std::chrono::duration<double>(now - last_sample_).count();
  last_sample_ = now;
  s.ops = dt > 0 ? static_cast<uint64_t>(std::llround(window.size() / dt))
                 : window.size();
  s.latency = ComputePercentiles(window);
  if (probe_) {
    ClusterGauges g = probe_();
    s.backlog = g.backlog;
    s.ltcs = g.ltcs;
    s.utilization = Utilization(g.cpu, cpu_last_, dt, nullptr);
    cpu_last_ = g.cpu;
  }
  return s;
}

RunMetrics LoadDriver::Finish() {
  RunMetrics m;
  if (finished_) return m;
  finished_ = true;
  {
    std::lock_guard<std::mutex> l(gate_mu_);
    stopping_ = true;
    gate_cv_.notify_all();
  }
  for (auto& t : threads_) t.join();
  m.duration_s = std::chrono::duration<double>(Clock::now() - started_).count();
  std::vector<uint32_t> all, puts, gets;
  for (auto& st : states_) {
    all.insert(all.end(), st->all.begin(), st->all.end());
    puts.insert(puts.end(), st->puts.begin(), st->puts.end());
    gets.insert(gets.end(), st->gets.begin(), st->gets.end());
    m.reads += st->reads;
    m.writes += st->writes;
    m.scans += st->scans;
    m.deletes += st->deletes;
    m.found += st->found;
    m.errors += st->errors;
    m.mismatches += st->mismatches;
    for (auto& e : st->mismatch_examples) m.mismatch_examples.push_back(e);
  }
  m.ops = all.size();
  m.latency = ComputePercentiles(all);
  m.put_latency = ComputePercentiles(puts);
  m.get_latency = ComputePercentiles(gets);
  if (probe_) {
    (void)Utilization(probe_().cpu, cpu_start_, m.duration_s,
                      &m.ltc_utilization);
  }
  return m;
}

Result<RunMetrics> RunWorkload(const WorkloadSpec& spec,
                               const ClientFactory& factory,
                               const GaugeProbe& probe) {
  LoadDriver driver(spec, factory, probe);
  DLSM_RETURN_IF_ERROR(driver.Start());
  std::vector<SecondSample> seconds;
  auto start = Clock::now();
  auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(spec.duration_s));
  auto next = start + std::chrono::seconds(1);
  for (;;) {
    bool finished = spec.ops > 0 ? driver.Done() : Clock::now() >= deadline;
    if (finished) break;
    if (Clock::now() >= next) {
      seconds.push_back(driver.SampleSecond());
      next += std::chrono::seconds(1);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  seconds.push_back(driver.SampleSecond());
  RunMetrics m = driver.Finish();
  m.seconds = std::move(seconds);
  return m;
}

}  // namespace dlsm
