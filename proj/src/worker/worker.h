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

#ifndef DLSM_WORKER_WORKER_H_
#define DLSM_WORKER_WORKER_H_

#include <atomic>
#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "worker/job.h"

namespace dlsm {

struct WorkerOptions {
  int max_concurrent = 0;  // 0 = hardware concurrency
  size_t queue_capacity = 64;
  // Extra execution time per job, emulating compaction CPU.
  uint64_t job_fixed_cost_us = 0;
  uint64_t job_cost_us_per_kib = 0;
  uint64_t seed = 1;
  std::chrono::milliseconds stoc_timeout{10000};
};

struct WorkerStats {
  uint64_t queued = 0;
  uint64_t running = 0;
  uint64_t completed = 0;
  uint64_t failed = 0;
  uint64_t rejected = 0;
};

// Stateless compaction executor. Jobs arrive as COMPACT requests, wait in a
// bounded queue (full queue: Busy) and run on up to max_concurrent
// threads; the reply carries the CompactionResult.
class WorkerServer {
 public:
  WorkerServer(WorkerOptions options, std::shared_ptr<Transport> transport);
  ~WorkerServer();

  Status Start(const std::string& address, std::string* bound = nullptr);
  // Stops serving. Queued jobs fail with Unavailable; running jobs are
  // cancelled before their next output write.
  void Stop();

  // Runs a job through the queue as if it had arrived over the wire.
  Result<CompactionResult> Submit(const CompactionJob& job);

  WorkerStats Stats() const;
  const std::string& address() const { return address_; }

 private:
  struct Task {
    CompactionJob job;
    std::promise<Result<CompactionResult>> done;
  };

  void Loop(int index);
  Result<std::string> HandleCompact(const Frame& f);

  WorkerOptions options_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<StocClient> client_;
  Dispatcher dispatcher_;
  std::string address_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<Task>> queue_;
  std::vector<std::thread> threads_;
  std::atomic<bool> stopping_{false};
  WorkerStats stats_;
};

}  // namespace dlsm

#endif  // DLSM_WORKER_WORKER_H_
