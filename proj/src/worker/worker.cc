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

#include "worker/worker.h"

#include "common/coding.h"

namespace dlsm {

WorkerServer::WorkerServer(WorkerOptions options,
                           std::shared_ptr<Transport> transport)
    : options_(options), transport_(std::move(transport)) {
  if (options_.max_concurrent <= 0) {
    options_.max_concurrent =
        std::max(1u, std::thread::hardware_concurrency());
  }
  client_ = std::make_shared<StocClient>(transport_, options_.stoc_timeout,
                                         std::make_shared<StocStatsBoard>());
  dispatcher_.Register(Opcode::kCompact,
                       [this](const Frame& f) { return HandleCompact(f); });
  dispatcher_.Register(Opcode::kWorkerStats, [this](const Frame&) -> Result<std::string> {
    WorkerStats s = Stats();
    std::string out;
    PutFixed64(&out, s.queued);
    PutFixed64(&out, s.running);
    PutFixed64(&out, s.completed);
    PutFixed64(&out, s.failed);
    PutFixed64(&out, s.rejected);
    return out;
  });
  dispatcher_.Register(Opcode::kPing, [](const Frame&) -> Result<std::string> {
    return std::string();
  });
  for (int i = 0; i < options_.max_concurrent; ++i) {
    threads_.emplace_back([this, i] { Loop(i); });
  }
}

WorkerServer::~WorkerServer() {
  Stop();
  for (auto& t : threads_) t.join();
}

Status WorkerServer::Start(const std::string& address, std::string* bound) {
  std::string actual;
  DLSM_RETURN_IF_ERROR(transport_->Listen(
      address, [this](const Frame& f) { return dispatcher_.Handle(f); },
      &actual));
  address_ = actual;
  if (bound != nullptr) *bound = actual;
  return Status::OK();
}

void WorkerServer::Stop() {
  std::deque<std::shared_ptr<Task>> dropped;
  {
    std::lock_guard<std::mutex> l(mu_);
    if (stopping_) return;
    stopping_ = true;
    dropped.swap(queue_);
    stats_.queued = 0;
  }
  cv_.notify_all();
  for (auto& t : dropped) {
    t->done.set_value(UnavailableError("worker stopped"));
  }
  if (!address_.empty()) transport_->Unlisten(address_);
}

Result<CompactionResult> WorkerServer::Submit(const CompactionJob& job) {
  auto task = std::make_shared<Task>();
  task->job = job;
  auto future = task->done.get_future();
  {
    std::lock_guard<std::mutex> l(mu_);
    if (stopping_) return UnavailableError("worker stopped");
    if (queue_.size() >= options_.queue_capacity) {
      ++stats_.rejected;
      return Status(Code::kBusy, "worker queue full");
    }
    queue_.push_back(task);
    ++stats_.queued;
  }
  cv_.notify_one();
  return future.get();
}

Result<std::string> WorkerServer::HandleCompact(const Frame& f) {
  CompactionJob job;
  DLSM_RETURN_IF_ERROR(DecodeJob(f.payload, &job));
  DLSM_ASSIGN_OR_RETURN(CompactionResult r, Submit(job));
  std::string out;
  EncodeResult(&out, r);
  return out;
}

void WorkerServer::Loop(int index) {
  std::mt19937_64 rng(options_.seed * 1000003 + static_cast<uint64_t>(index));
  for (;;) {
    std::shared_ptr<Task> task;
    {
      std::unique_lock<std::mutex> l(mu_);
      cv_.wait(l, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      task = queue_.front();
      queue_.pop_front();
      --stats_.queued;
      ++stats_.running;
    }
    auto start = std::chrono::steady_clock::now();
    Result<CompactionResult> r = ExecuteJob(task->job, *client_, rng, &stopping_);
    if (r.ok() && (options_.job_fixed_cost_us || options_.job_cost_us_per_kib)) {
      uint64_t cost = options_.job_fixed_cost_us +
                      options_.job_cost_us_per_kib * (r->bytes_read / 1024);
      std::this_thread::sleep_until(start + std::chrono::microseconds(cost));
      r->duration_us = static_cast<uint64_t>(
          std::chrono::duration_cast<std::chrono::microseconds>(
              std::chrono::steady_clock::now() - start)
              .count());
    }
    {
      std::lock_guard<std::mutex> l(mu_);
      --stats_.running;
      if (r.ok()) {
        ++stats_.completed;
      } else {
        ++stats_.failed;
      }
    }
    task->done.set_value(std::move(r));
  }
}

WorkerStats WorkerServer::Stats() const {
  std::lock_guard<std::mutex> l(mu_);
  return stats_;
}

}  // namespace dlsm
