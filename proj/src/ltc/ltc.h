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

#ifndef DLSM_LTC_LTC_H_
#define DLSM_LTC_LTC_H_

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "lsm/lookup.h"
#include "lsm/memtable.h"
#include "ltc/manifest.h"
#include "ltc/virtual_cpu.h"
#include "stoc/stoc.h"
#include "worker/job.h"

namespace dlsm {

struct LtcOptions {
  std::string name;
  std::vector<std::string> stocs;    // flush and compaction output targets
  std::vector<std::string> workers;  // remote compaction workers
  std::string coordinator;           // load reports go here when set
  int d = 2;
  size_t memtable_bytes = 4u << 20;
  size_t max_immutables = 4;         // writes stall beyond this
  size_t handoff_flush_bytes = 1u << 20;
  SstOptions sst;
  LevelPolicy policy;
  uint64_t max_output_bytes = 4u << 20;
  bool local_compaction = true;      // run jobs in-process without workers
  int max_inflight_jobs = 32;
  uint64_t cpu_cost_us = 0;          // emulated compute per client op
  int cpu_cores = 1;
  uint64_t seed = 1;
  std::chrono::milliseconds rpc_timeout{5000};
  std::chrono::milliseconds job_timeout{120000};
  std::chrono::milliseconds report_interval{1000};
};

struct PutAck {
  SeqNo seq = 0;
  bool durable = false;
};

struct LtcRangeStats {
  RangeDescriptor desc;
  size_t memtable_bytes = 0;
  size_t immutables = 0;
  std::vector<size_t> files_per_level;
  uint64_t table_bytes = 0;
  size_t pending_jobs = 0;
  uint64_t ops = 0;
  SeqNo last_flushed_seq = 0;
  uint64_t manifest_version = 0;
};

struct LtcStats {
  std::vector<LtcRangeStats> ranges;
  uint64_t backlog = 0;
  uint64_t flushes = 0;
  uint64_t compactions_applied = 0;
  uint64_t local_jobs = 0;
  uint64_t remote_jobs = 0;
  uint64_t orphans_deleted = 0;
  uint64_t cpu_busy_us = 0;
  int cpu_cores = 1;
  std::map<std::string, uint64_t> flushes_per_stoc;
};

struct ScanResult {
  std::vector<KeyValue> rows;
  // Upper bound of the range that served the scan ("" = +inf).
  std::string range_upper;
};

// LSM-tree component: owns ranges, serves client operations, flushes to
// StoCs chosen by power-of-d and schedules compactions.
class Ltc {
 public:
  Ltc(LtcOptions options, std::shared_ptr<Transport> transport);
  ~Ltc();

  Status Start(const std::string& address, std::string* bound = nullptr);
  // Stops background work and serving. Nothing is flushed; with a disk
  // tier and the log, state is recoverable by adoption elsewhere.
  void Stop();

  // Client operations. `epoch` is the caller's view of the range epoch;
  // 0 skips the check.
  Result<PutAck> Put(std::string_view key, std::string_view value,
                     uint64_t epoch = 0);
  Result<PutAck> Delete(std::string_view key, uint64_t epoch = 0);
  Result<std::optional<std::string>> Get(std::string_view key,
                                         uint64_t epoch = 0);
  // Scans the range containing `lower`, clipped to [lower, upper). A limit
  // of 0 means no limit.
  Result<ScanResult> Scan(std::string_view lower, std::string_view upper,
                          size_t limit, uint64_t epoch = 0);

  // Ownership transfer.
  Status Adopt(const RangeDescriptor& desc,
               const std::vector<std::string>& log_stocs,
               std::optional<RangeManifest> manifest);
  Result<RangeManifest> Release(uint32_t range_id);

  // Rotates and flushes every memtable, waiting for completion.
  Status FlushAll();
  // FlushAll, then waits until no compaction is pending or needed.
  Status Quiesce(std::chrono::milliseconds timeout);
  // Deletes objects of the range that no manifest or job references.
  Result<size_t> SweepOrphans(uint32_t range_id);

  // Installs a finished job's outputs. Results for unknown (or already
  // applied) jobs fail with UnknownJob, results from another epoch with
  // StaleEpoch; their outputs are deleted in the latter case.
  Status ApplyCompaction(uint32_t range_id, const CompactionResult& result);
  std::vector<CompactionJob> PendingJobs(uint32_t range_id) const;

  LtcStats Stats() const;
  std::string StatsJson() const;
  std::map<ObjectId, std::string> Placements() const;
  Result<RangeManifest> Manifest(uint32_t range_id) const;
  std::vector<RangeDescriptor> OwnedRanges() const;
  uint64_t Backlog() const { return total_jobs_.load(); }

  const std::string& name() const { return options_.name; }
  const std::string& address() const { return address_; }
  const LtcOptions& options() const { return options_; }

 private:
  struct Job {
    CompactionPick pick;
    CompactionJob job;
  };

  struct Range {
    RangeDescriptor desc;
    std::vector<std::string> log_stocs;
    uint64_t log_id = 0;

    std::mutex lane;         // one writer at a time
    std::mutex flush_mu;     // one flush at a time
    std::mutex manifest_mu;  // serializes manifest writes
    std::mutex mu;           // guards everything below
    std::condition_variable cv;

    bool serving = true;
    int inflight = 0;
    std::shared_ptr<Memtable> active;
    std::deque<std::shared_ptr<Memtable>> immutables;  // newest first
    std::map<const Memtable*, std::vector<uint64_t>> max_lsn;
    std::shared_ptr<const LevelMetadata> levels;
    uint64_t version = 0;
    uint64_t persisted_version = 0;
    std::optional<ObjectId> manifest_id;
    SeqNo last_flushed_seq = 0;
    SeqNo next_seq = 1;
    uint64_t flush_counter = 0;
    uint64_t job_counter = 0;
    std::map<uint64_t, Job> jobs;
    std::set<ObjectId> pending_inputs;
    bool l0_job_pending = false;
    std::set<ObjectId> inflight_objects;
    std::atomic<uint64_t> ops{0};
    uint64_t reported_ops = 0;
  };

  Result<std::shared_ptr<Range>> RangeFor(std::string_view key,
                                          uint64_t epoch) const;
  std::shared_ptr<Range> RangeById(uint32_t range_id) const;
  std::vector<std::shared_ptr<Range>> AllRanges() const;
  Status NotOwner(std::string_view key) const;
  // Forgets a range that was released or lost to a newer owner.
  void DropRange(const std::shared_ptr<Range>& r);

  Result<PutAck> Write(std::string_view key, ValueType type,
                       std::string_view value, uint64_t epoch);
  void RotateLocked(Range& r);
  // Flushes the oldest immutable memtable. Caller holds r->flush_mu.
  Status FlushOne(Range& r, bool releasing);
  Status FlushImmutables(Range& r);
  Result<std::string> PlaceObject(ObjectId id, const std::string& bytes);
  Status PersistManifest(Range& r);
  RangeManifest SnapshotManifestLocked(const Range& r) const;
  Result<std::optional<RangeManifest>> LoadLatestManifest(
      uint32_t range_id, const std::string& home);

  void MaybeSchedule(const std::shared_ptr<Range>& r);
  void Dispatch(std::shared_ptr<Range> r, uint64_t job_id);
  Result<CompactionResult> RunJob(const CompactionJob& job, bool* retry);
  Status ApplyResult(const std::shared_ptr<Range>& r,
                     const CompactionResult& result);
  void DeleteObjects(const std::vector<std::pair<ObjectId, std::string>>& objs);

  TableOpener Opener();
  void Evict(ObjectId id);

  void FlusherLoop();
  void ReporterLoop();
  void Backoff(std::chrono::milliseconds d);
  void SpawnTracked(std::function<void()> fn);

  Frame Serve(const Frame& f);
  void RegisterHandlers();

  LtcOptions options_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<StocStatsBoard> board_;
  std::shared_ptr<StocClient> stoc_;
  VirtualCpu cpu_;
  Dispatcher dispatcher_;
  std::string address_;

  mutable std::shared_mutex ranges_mu_;
  std::map<uint32_t, std::shared_ptr<Range>> ranges_;
  std::map<std::string, std::shared_ptr<Range>> by_lower_;
  std::map<uint32_t, uint64_t> max_epoch_seen_;
  std::mutex adopt_mu_;

  std::mutex table_mu_;
  std::map<ObjectId, std::shared_ptr<TableReader>> tables_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;

  std::atomic<bool> stopping_{false};
  std::mutex bg_mu_;
  std::condition_variable bg_cv_;
  bool flush_wanted_ = false;
  int tracked_threads_ = 0;
  std::thread flusher_;
  std::thread reporter_;

  std::atomic<uint64_t> total_jobs_{0};
  std::atomic<uint64_t> next_worker_{0};
  std::atomic<uint64_t> flushes_{0};
  std::atomic<uint64_t> compactions_applied_{0};
  std::atomic<uint64_t> local_jobs_{0};
  std::atomic<uint64_t> remote_jobs_{0};
  std::atomic<uint64_t> orphans_deleted_{0};
  mutable std::mutex stats_mu_;
  std::map<std::string, uint64_t> flushes_per_stoc_;
};

}  // namespace dlsm

#endif  // DLSM_LTC_LTC_H_
