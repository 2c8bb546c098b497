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

#ifndef DLSM_BENCH_WORKLOAD_H_
#define DLSM_BENCH_WORKLOAD_H_

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "bench/zipfian.h"
#include "common/status.h"

namespace dlsm {

enum class Distribution { kUniform, kZipfian };

// YCSB-style workload. Operations not covered by the read, scan and delete
// fractions are writes. See docs/formats.md for the JSON form.
struct WorkloadSpec {
  double read_fraction = 0.5;
  double scan_fraction = 0.0;
  double delete_fraction = 0.0;
  uint64_t key_count = 100000;
  uint32_t value_size_bytes = 100;
  Distribution distribution = Distribution::kUniform;
  double theta = 0.99;
  double duration_s = 10;
  uint64_t ops = 0;           // total across threads; 0 = run for duration
  int client_threads = 4;
  uint32_t scan_length = 10;
  uint64_t seed = 1;
  bool verify = false;        // check every read against an op-log oracle

  Status Validate() const;
  std::string ToJson() const;
  static Result<WorkloadSpec> FromJson(std::string_view json);

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

enum class OpType { kRead, kWrite, kScan, kDelete };

struct Op {
  OpType type = OpType::kRead;
  uint64_t item = 0;
  std::string value;  // writes only

  friend bool operator==(const Op&, const Op&) = default;
};

// Deterministic op stream for one client thread: the sequence depends
// only on (spec, thread). In verify mode thread t only touches items
// congruent to t modulo client_threads, so per-thread oracles are exact.
class OpGenerator {
 public:
  OpGenerator(const WorkloadSpec& spec, int thread,
              std::shared_ptr<const ZipfianGenerator> zipf = nullptr);

  Op Next();

 private:
  uint64_t NextItem();

  WorkloadSpec spec_;
  int thread_;
  std::shared_ptr<const ZipfianGenerator> zipf_;
  std::mt19937_64 rng_;
};

// Shared sampler for a spec; null for the uniform distribution.
std::shared_ptr<const ZipfianGenerator> MakeSampler(const WorkloadSpec& spec);

}  // namespace dlsm

#endif  // DLSM_BENCH_WORKLOAD_H_
