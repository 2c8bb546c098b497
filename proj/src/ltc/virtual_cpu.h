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

#ifndef DLSM_LTC_VIRTUAL_CPU_H_
#define DLSM_LTC_VIRTUAL_CPU_H_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>
#include <vector>

namespace dlsm {

// Emulated compute budget: `cores` servers, each op occupies one for
// `cost`. Callers block until their slot has elapsed, so throughput
// saturates at cores / cost regardless of the host's real core count.
class VirtualCpu {
 public:
  VirtualCpu(std::chrono::microseconds cost, int cores)
      : cost_(cost), free_at_(std::max(cores, 1)) {}

  void Charge() {
    if (cost_.count() <= 0) return;
    busy_us_.fetch_add(static_cast<uint64_t>(cost_.count()),
                       std::memory_order_relaxed);
    auto now = std::chrono::steady_clock::now();
    std::chrono::steady_clock::time_point done;
    {
      std::lock_guard<std::mutex> l(mu_);
      auto it = std::min_element(free_at_.begin(), free_at_.end());
      auto start = std::max(now, *it);
      done = start + cost_;
      *it = done;
    }
    std::this_thread::sleep_until(done);
  }

  // Total emulated compute charged so far.
  uint64_t busy_us() const { return busy_us_.load(std::memory_order_relaxed); }
  int cores() const { return static_cast<int>(free_at_.size()); }

 private:
  std::chrono::microseconds cost_;
  std::atomic<uint64_t> busy_us_{0};
  std::mutex mu_;
  std::vector<std::chrono::steady_clock::time_point> free_at_;
};

}  // namespace dlsm

#endif  // DLSM_LTC_VIRTUAL_CPU_H_
