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

#ifndef DLSM_WORKER_JOB_H_
#define DLSM_WORKER_JOB_H_

#include <atomic>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lsm/compaction.h"
#include "lsm/version.h"
#include "stoc/stoc.h"

namespace dlsm {

struct JobInput {
  ObjectId id;
  std::string stoc;
  uint64_t size = 0;

  friend bool operator==(const JobInput&, const JobInput&) = default;
};

// Self-contained compaction request: everything a worker needs, nothing it
// has to remember afterwards.
struct CompactionJob {
  uint64_t job_id = 0;
  uint32_t range_id = 0;
  uint64_t epoch = 0;
  std::vector<JobInput> inputs;
  int target_level = 1;
  bool purge_tombstones = false;
  uint64_t max_output_bytes = 4u << 20;
  SstOptions sst;
  // Output placement: power-of-d over `output_stocs`, or the single StoC
  // named by `pinned_stoc` when it is set.
  std::vector<std::string> output_stocs;
  int d = 2;
  std::string pinned_stoc;

  friend bool operator==(const CompactionJob&, const CompactionJob&) = default;
};

struct JobOutput {
  ObjectId id;
  std::string stoc;
  SstSummary summary;

  friend bool operator==(const JobOutput&, const JobOutput&) = default;
};

struct CompactionResult {
  uint64_t job_id = 0;
  uint32_t range_id = 0;
  uint64_t epoch = 0;
  std::vector<JobOutput> outputs;
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
  uint64_t entries_dropped = 0;
  uint64_t duration_us = 0;
};

void EncodeJob(std::string* out, const CompactionJob& job);
Status DecodeJob(std::string_view in, CompactionJob* job);
void EncodeResult(std::string* out, const CompactionResult& r);
Status DecodeResult(std::string_view in, CompactionResult* r);

// Object id of output `index` of a job. Ids depend only on the job, so a
// retried job writes the same objects.
ObjectId OutputObjectId(const CompactionJob& job, uint32_t index);

// Fetches the inputs, compacts them and stores the outputs. Fails whole
// with FetchFailed or WriteFailed; inputs are never touched, so a failed
// job may be retried anywhere.
// `cancel`, when set, is polled between output writes; a cancelled job
// fails with Unavailable and may leave some outputs behind.
Result<CompactionResult> ExecuteJob(const CompactionJob& job,
                                    StocClient& client, std::mt19937_64& rng,
                                    const std::atomic<bool>* cancel = nullptr);

// The encoded output tables a job produces, without any I/O beyond reading
// inputs. Exposed for equivalence checks.
Result<CompactOutput> CompactJobInputs(const CompactionJob& job,
                                       StocClient& client,
                                       uint64_t* bytes_read = nullptr);

}  // namespace dlsm

#endif  // DLSM_WORKER_JOB_H_
