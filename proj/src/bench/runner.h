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

#ifndef DLSM_BENCH_RUNNER_H_
#define DLSM_BENCH_RUNNER_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "bench/metrics.h"
#include "bench/workload.h"
#include "client/client.h"

namespace dlsm {

using ClientFactory = std::function<std::unique_ptr<Client>(int thread)>;

// Cluster-side gauges, read once per sampled second.
struct ClusterGauges {
  uint64_t backlog = 0;
  uint32_t ltcs = 0;
  // LTC -> (emulated CPU busy microseconds, cores).
  std::map<std::string, std::pair<uint64_t, int>> cpu;
};
using GaugeProbe = std::function<ClusterGauges()>;

// Reads the view and every healthy LTC's stats through `client`.
GaugeProbe ProbeViaClient(std::shared_ptr<Client> client);

// Closed-loop client threads, each with its own client. The number of
// active threads can change while running; Pause() drains in-flight ops.
class LoadDriver {
 public:
  LoadDriver(WorkloadSpec spec, ClientFactory factory, GaugeProbe probe = {});
  ~LoadDriver();

  Status Start();
  void SetActiveThreads(int n);
  // Returns once no operation is in flight; threads then wait for Resume.
  void Pause();
  void Resume();

  // Drains everything recorded since the previous sample.
  SecondSample SampleSecond();
  // True once every thread has used its share of spec.ops.
  bool Done() const;
  // Stops the threads and aggregates the whole run.
  RunMetrics Finish();

 private:
  struct ThreadState {
    std::mutex mu;
    std::vector<uint32_t> window;  // latencies since the last sample
    uint64_t window_errors = 0;
    std::vector<uint32_t> all, puts, gets;
    uint64_t reads = 0, writes = 0, scans = 0, deletes = 0, found = 0;
    uint64_t errors = 0, mismatches = 0;
    std::vector<std::string> mismatch_examples;
    bool done = false;
  };

  void ThreadMain(int t);

  WorkloadSpec spec_;
  ClientFactory factory_;
  GaugeProbe probe_;
  std::shared_ptr<const ZipfianGenerator> zipf_;
  std::vector<std::unique_ptr<ThreadState>> states_;
  std::vector<std::thread> threads_;

  std::mutex gate_mu_;
  std::condition_variable gate_cv_;
  int active_ = 0;
  bool paused_ = false;
  bool stopping_ = false;
  int inflight_ = 0;

  uint32_t second_ = 0;
  std::chrono::steady_clock::time_point started_, last_sample_;
  std::map<std::string, std::pair<uint64_t, int>> cpu_start_, cpu_last_;
  bool finished_ = false;
};

// Runs spec to completion and samples once per second.
Result<RunMetrics> RunWorkload(const WorkloadSpec& spec,
                               const ClientFactory& factory,
                               const GaugeProbe& probe = {});

}  // namespace dlsm

#endif  // DLSM_BENCH_RUNNER_H_
