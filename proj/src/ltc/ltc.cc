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

#include "ltc/ltc.h"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "stoc/placement.h"

namespace dlsm {

namespace {

using Clock = std::chrono::steady_clock;

Status NotServing(uint32_t range_id) {
  return Status(Code::kNotOwner,
                "range " + std::to_string(range_id) + " is not served here");
}

bool Retryable(Code c) {
  return c == Code::kBusy || c == Code::kConnectionFailed ||
         c == Code::kTimeout || c == Code::kUnavailable;
}

}  // namespace

Ltc::Ltc(LtcOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      board_(std::make_shared<StocStatsBoard>()),
      stoc_(std::make_shared<StocClient>(transport_, options_.rpc_timeout,
                                         board_)),
      cpu_(std::chrono::microseconds(options_.cpu_cost_us),
           options_.cpu_cores),
      rng_(options_.seed) {
  RegisterHandlers();
}

Ltc::~Ltc() { Stop(); }

Status Ltc::Start(const std::string& address, std::string* bound) {
  std::string actual;
  DLSM_RETURN_IF_ERROR(transport_->Listen(
      address, [this](const Frame& f) { return Serve(f); }, &actual));
  address_ = actual;
  if (options_.name.empty()) options_.name = actual;
  if (bound != nullptr) *bound = actual;
  flusher_ = std::thread([this] { FlusherLoop(); });
  if (!options_.coordinator.empty()) {
    reporter_ = std::thread([this] { ReporterLoop(); });
  }
  return Status::OK();
}

void Ltc::Stop() {
  if (stopping_.exchange(true)) return;
  if (!address_.empty()) transport_->Unlisten(address_);
  for (const auto& r : AllRanges()) {
    std::lock_guard<std::mutex> l(r->mu);
    r->serving = false;
    r->cv.notify_all();
  }
  {
    std::lock_guard<std::mutex> l(bg_mu_);
    bg_cv_.notify_all();
  }
  if (flusher_.joinable()) flusher_.join();
  if (reporter_.joinable()) reporter_.join();
  std::unique_lock<std::mutex> l(bg_mu_);
  bg_cv_.wait(l, [&] { return tracked_threads_ == 0; });
}

void Ltc::SpawnTracked(std::function<void()> fn) {
  {
    std::lock_guard<std::mutex> l(bg_mu_);
    ++tracked_threads_;
  }
  std::thread([this, fn = std::move(fn)] {
    fn();
    std::lock_guard<std::mutex> l(bg_mu_);
    --tracked_threads_;
    bg_cv_.notify_all();
  }).detach();
}

void Ltc::Backoff(std::chrono::milliseconds d) {
  std::unique_lock<std::mutex> l(bg_mu_);
  bg_cv_.wait_for(l, d, [&] { return stopping_.load(); });
}

// Ownership lookups.

std::shared_ptr<Ltc::Range> Ltc::RangeById(uint32_t range_id) const {
  std::shared_lock<std::shared_mutex> l(ranges_mu_);
  auto it = ranges_.find(range_id);
  return it == ranges_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<Ltc::Range>> Ltc::AllRanges() const {
  std::shared_lock<std::shared_mutex> l(ranges_mu_);
  std::vector<std::shared_ptr<Range>> out;
  for (const auto& [id, r] : ranges_) out.push_back(r);
  return out;
}

Status Ltc::NotOwner(std::string_view key) const {
  return Status(Code::kNotOwner,
                options_.name + " does not own key " + EscapeBytes(key));
}

Result<std::shared_ptr<Ltc::Range>> Ltc::RangeFor(std::string_view key,
                                                  uint64_t epoch) const {
  std::shared_lock<std::shared_mutex> l(ranges_mu_);
  auto it = by_lower_.upper_bound(std::string(key));
  if (it == by_lower_.begin()) return NotOwner(key);
  --it;
  const auto& r = it->second;
  if (!r->desc.Contains(key)) return NotOwner(key);
  if (epoch != 0 && epoch > r->desc.epoch) {
    return Status(Code::kNotOwner, "range " + std::to_string(r->desc.range_id) +
                                       " has moved to a newer epoch");
  }
  return r;
}

// Client path.

Result<PutAck> Ltc::Put(std::string_view key, std::string_view value,
                        uint64_t epoch) {
  DLSM_RETURN_IF_ERROR(ValidateValue(value));
  return Write(key, ValueType::kValue, value, epoch);
}

Result<PutAck> Ltc::Delete(std::string_view key, uint64_t epoch) {
  return Write(key, ValueType::kTombstone, {}, epoch);
}

void Ltc::RotateLocked(Range& r) {
  r.active->MarkImmutable();
  r.immutables.push_front(r.active);
  r.active = std::make_shared<Memtable>(options_.memtable_bytes);
}

Result<PutAck> Ltc::Write(std::string_view key, ValueType type,
                          std::string_view value, uint64_t epoch) {
  DLSM_RETURN_IF_ERROR(ValidateKey(key));
  cpu_.Charge();
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Range> r, RangeFor(key, epoch));
  std::unique_lock<std::mutex> lane(r->lane);
  SeqNo seq = 0;
  {
    std::unique_lock<std::mutex> l(r->mu);
    r->cv.wait(l, [&] {
      return !r->serving || r->immutables.size() < options_.max_immutables;
    });
    if (!r->serving) return NotOwner(key);
    seq = r->next_seq++;
    ++r->inflight;
  }
  auto finish = [&] {
    std::lock_guard<std::mutex> l(r->mu);
    --r->inflight;
    r->cv.notify_all();
  };

  LogEntry rec{r->desc.range_id, seq, type, std::string(key),
               std::string(value)};
  std::string bytes = rec.Encode();
  std::vector<uint64_t> lsns(r->log_stocs.size());
  for (size_t j = 0; j < r->log_stocs.size(); ++j) {
    auto lsn = stoc_->AppendLog(r->log_stocs[j], r->log_id, r->desc.epoch,
                                bytes);
    if (!lsn.ok()) {
      if (lsn.status().Is(Code::kStaleEpoch)) {
        {
          std::lock_guard<std::mutex> l(r->mu);
          r->serving = false;
        }
        finish();
        DropRange(r);
        return Status(Code::kNotOwner,
                      "range " + std::to_string(r->desc.range_id) +
                          " was fenced by a newer owner");
      }
      finish();
      return Status(Code::kUnavailable,
                    "log append failed: " + lsn.status().ToString());
    }
    lsns[j] = *lsn;
  }

  bool rotated = false;
  {
    std::lock_guard<std::mutex> l(r->mu);
    Status s = r->active->Put(key, seq, type, value);
    if (s.Is(Code::kMemtableFull)) {
      RotateLocked(*r);
      rotated = true;
      s = r->active->Put(key, seq, type, value);
    }
    if (s.ok()) r->max_lsn[r->active.get()] = lsns;
    --r->inflight;
    r->cv.notify_all();
    DLSM_RETURN_IF_ERROR(s);
  }
  if (rotated) {
    std::lock_guard<std::mutex> l(bg_mu_);
    flush_wanted_ = true;
    bg_cv_.notify_all();
  }
  r->ops.fetch_add(1, std::memory_order_relaxed);
  return PutAck{seq, true};
}

TableOpener Ltc::Opener() {
  return [this](const SstHandle& h) -> Result<std::shared_ptr<TableReader>> {
    {
      std::lock_guard<std::mutex> l(table_mu_);
      auto it = tables_.find(h.id);
      if (it != tables_.end()) return it->second;
    }
    auto src = std::make_shared<StocSource>(stoc_, h.stoc, h.id,
                                            h.summary.file_size);
    DLSM_ASSIGN_OR_RETURN(std::shared_ptr<TableReader> t,
                          TableReader::Open(src));
    std::lock_guard<std::mutex> l(table_mu_);
    tables_.emplace(h.id, t);
    return t;
  };
}

void Ltc::Evict(ObjectId id) {
  std::lock_guard<std::mutex> l(table_mu_);
  tables_.erase(id);
}

Result<std::optional<std::string>> Ltc::Get(std::string_view key,
                                            uint64_t epoch) {
  DLSM_RETURN_IF_ERROR(ValidateKey(key));
  cpu_.Charge();
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Range> r, RangeFor(key, epoch));
  r->ops.fetch_add(1, std::memory_order_relaxed);
  Status last;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::shared_ptr<const LevelMetadata> levels;
    uint64_t version = 0;
    {
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->serving) return NotOwner(key);
      std::optional<VersionedValue> v = r->active->Get(key);
      for (size_t i = 0; !v && i < r->immutables.size(); ++i) {
        v = r->immutables[i]->Get(key);
      }
      if (v) {
        if (v->is_tombstone()) return std::optional<std::string>();
        return std::optional<std::string>(std::move(v->value));
      }
      levels = r->levels;
      version = r->version;
      ++r->inflight;
    }
    auto got = RangeGet(*levels, {}, key, Opener());
    std::lock_guard<std::mutex> l(r->mu);
    --r->inflight;
    r->cv.notify_all();
    if (got.ok()) return got;
    last = got.status();
    if (r->version == version) break;
  }
  return last;
}

Result<ScanResult> Ltc::Scan(std::string_view lower, std::string_view upper,
                             size_t limit, uint64_t epoch) {
  if (lower.size() > kMaxKeyBytes) {
    return InvalidArgumentError("scan bound too long");
  }
  cpu_.Charge();
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Range> r, RangeFor(lower, epoch));
  r->ops.fetch_add(1, std::memory_order_relaxed);
  if (limit == 0) limit = SIZE_MAX;
  std::string hi(upper);
  const std::string& range_upper = r->desc.upper;
  if (!range_upper.empty() && (hi.empty() || hi > range_upper)) {
    hi = range_upper;
  }
  Status last;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<std::vector<Entry>> mems;
    std::shared_ptr<const LevelMetadata> levels;
    uint64_t version = 0;
    {
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->serving) return NotOwner(lower);
      mems.push_back(r->active->EntriesInRange(lower, hi));
      for (const auto& m : r->immutables) {
        mems.push_back(m->EntriesInRange(lower, hi));
      }
      levels = r->levels;
      version = r->version;
      ++r->inflight;
    }
    auto rows = TreeScan(*levels, std::move(mems), lower, hi, limit, Opener());
    std::lock_guard<std::mutex> l(r->mu);
    --r->inflight;
    r->cv.notify_all();
    if (rows.ok()) return ScanResult{std::move(rows).value(), range_upper};
    last = rows.status();
    if (r->version == version) break;
  }
  return last;
}

// Flushing and manifests.

Result<std::string> Ltc::PlaceObject(ObjectId id, const std::string& bytes) {
  std::vector<std::string> tried;
  Status last(Code::kNoCandidates, "no StoCs configured");
  while (tried.size() < options_.stocs.size()) {
    auto candidates = CandidatesFromBoard(options_.stocs, board_.get(), tried);
    if (candidates.empty()) break;
    Result<size_t> idx = Status(Code::kNoCandidates, "no candidates");
    {
      std::lock_guard<std::mutex> l(rng_mu_);
      idx = SelectPowerOfD(candidates, options_.d, rng_);
    }
    if (!idx.ok()) return idx.status();
    const std::string& stoc = candidates[*idx].address;
    auto put = stoc_->PutObject(stoc, id, bytes);
    if (put.ok()) return stoc;
    if (put.status().Is(Code::kAlreadyExists)) {
      auto existing = stoc_->GetObject(stoc, id, 0, UINT64_MAX);
      if (existing.ok() && *existing == bytes) return stoc;
    }
    last = put.status();
    tried.push_back(stoc);
  }
  return last;
}

RangeManifest Ltc::SnapshotManifestLocked(const Range& r) const {
  RangeManifest m;
  m.range_id = r.desc.range_id;
  m.epoch = r.desc.epoch;
  m.version = r.version;
  m.last_flushed_seq = r.last_flushed_seq;
  m.log_id = r.log_id;
  m.log_stocs = r.log_stocs;
  m.levels = *r.levels;
  return m;
}

Status Ltc::PersistManifest(Range& r) {
  std::lock_guard<std::mutex> ml(r.manifest_mu);
  RangeManifest m;
  {
    std::lock_guard<std::mutex> l(r.mu);
    if (r.manifest_id && r.version == r.persisted_version) {
      return Status::OK();
    }
    m = SnapshotManifestLocked(r);
  }
  ObjectId id = ManifestObjectId(m.range_id, m.epoch, m.version);
  auto put = stoc_->PutObject(r.log_stocs[0], id, m.Encode());
  if (!put.ok() && !put.status().Is(Code::kAlreadyExists)) {
    return put.status().Annotate("persisting manifest");
  }
  std::optional<ObjectId> old;
  {
    std::lock_guard<std::mutex> l(r.mu);
    old = r.manifest_id;
    r.manifest_id = id;
    r.persisted_version = std::max(r.persisted_version, m.version);
  }
  if (old && *old != id) (void)stoc_->DeleteObject(r.log_stocs[0], *old);
  return Status::OK();
}

Status Ltc::FlushOne(Range& r, bool releasing) {
  std::shared_ptr<Memtable> m;
  std::vector<uint64_t> lsns;
  ObjectId id;
  uint64_t epoch = 0;
  {
    std::lock_guard<std::mutex> l(r.mu);
    if (!releasing && !r.serving) return Status::OK();
    if (r.immutables.empty()) return Status::OK();
    m = r.immutables.back();
    lsns = r.max_lsn[m.get()];
    epoch = r.desc.epoch;
    id = ObjectId{r.desc.range_id, FlushFileNo(epoch, ++r.flush_counter)};
    r.inflight_objects.insert(id);
  }
  auto drop_inflight = [&] {
    std::lock_guard<std::mutex> l(r.mu);
    r.inflight_objects.erase(id);
  };
  auto encoded = FlushMemtable(*m, options_.sst);
  if (!encoded.ok()) {
    std::lock_guard<std::mutex> l(r.mu);
    r.inflight_objects.erase(id);
    if (encoded.status().Is(Code::kEmptyMemtable) &&
        r.immutables.back() == m) {
      r.immutables.pop_back();
      r.max_lsn.erase(m.get());
      r.cv.notify_all();
      return Status::OK();
    }
    return encoded.status();
  }
  auto where = PlaceObject(id, encoded->bytes);
  if (!where.ok()) {
    drop_inflight();
    return where.status().Annotate("flush");
  }
  {
    std::lock_guard<std::mutex> l(r.mu);
    r.inflight_objects.erase(id);
    auto next = std::make_shared<LevelMetadata>(*r.levels);
    next->AddL0(SstHandle{id, *where, encoded->summary});
    r.levels = std::move(next);
    r.last_flushed_seq = std::max(r.last_flushed_seq, m->max_seq());
    r.immutables.pop_back();
    r.max_lsn.erase(m.get());
    ++r.version;
    r.cv.notify_all();
  }
  flushes_.fetch_add(1);
  {
    std::lock_guard<std::mutex> l(stats_mu_);
    ++flushes_per_stoc_[*where];
  }
  DLSM_RETURN_IF_ERROR(PersistManifest(r));
  for (size_t j = 0; j < r.log_stocs.size() && j < lsns.size(); ++j) {
    if (lsns[j] == 0) continue;
    (void)stoc_->TruncateLog(r.log_stocs[j], r.log_id, lsns[j], epoch);
  }
  return Status::OK();
}

Status Ltc::FlushImmutables(Range& r) {
  std::lock_guard<std::mutex> fl(r.flush_mu);
  while (true) {
    {
      std::lock_guard<std::mutex> l(r.mu);
      if (r.immutables.empty() || !r.serving) return Status::OK();
    }
    DLSM_RETURN_IF_ERROR(FlushOne(r, false));
  }
}

Status Ltc::FlushAll() {
  Status first;
  for (const auto& r : AllRanges()) {
    {
      std::lock_guard<std::mutex> lane(r->lane);
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->serving) continue;
      if (!r->active->empty()) RotateLocked(*r);
    }
    Status s = FlushImmutables(*r);
    if (!s.ok() && first.ok()) first = s;
  }
  return first;
}

void Ltc::FlusherLoop() {
  while (!stopping_) {
    {
      std::unique_lock<std::mutex> l(bg_mu_);
      bg_cv_.wait_for(l, std::chrono::milliseconds(50),
                      [&] { return stopping_ || flush_wanted_; });
      if (stopping_) return;
      flush_wanted_ = false;
    }
    for (const auto& r : AllRanges()) {
      if (stopping_) return;
      (void)FlushImmutables(*r);
      MaybeSchedule(r);
    }
  }
}

// Compaction.

void Ltc::MaybeSchedule(const std::shared_ptr<Range>& r) {
  std::vector<uint64_t> started;
  {
    std::lock_guard<std::mutex> l(r->mu);
    if (!r->serving || stopping_) return;
    while (total_jobs_.load() <
           static_cast<uint64_t>(std::max(options_.max_inflight_jobs, 1))) {
      auto pick = PickCompaction(*r->levels, options_.policy,
                                 r->pending_inputs, r->l0_job_pending);
      if (!pick) break;
      CompactionJob job;
      job.job_id = CompactionJobId(r->desc.epoch, ++r->job_counter);
      job.range_id = r->desc.range_id;
      job.epoch = r->desc.epoch;
      for (const auto& in : pick->inputs) {
        job.inputs.push_back(
            JobInput{in.handle.id, in.handle.stoc, in.handle.summary.file_size});
        r->pending_inputs.insert(in.handle.id);
      }
      job.target_level = pick->target_level;
      job.purge_tombstones = pick->purge_tombstones;
      job.max_output_bytes = options_.max_output_bytes;
      job.sst = options_.sst;
      job.output_stocs = options_.stocs;
      job.d = options_.d;
      if (pick->source_level == 0) r->l0_job_pending = true;
      started.push_back(job.job_id);
      r->jobs.emplace(job.job_id, Job{std::move(*pick), std::move(job)});
      total_jobs_.fetch_add(1);
    }
  }
  for (uint64_t id : started) {
    SpawnTracked([this, r, id] { Dispatch(r, id); });
  }
}

Result<CompactionResult> Ltc::RunJob(const CompactionJob& job, bool* retry) {
  *retry = false;
  if (!options_.workers.empty()) {
    std::string payload;
    EncodeJob(&payload, job);
    size_t n = options_.workers.size();
    for (size_t i = 0; i < n; ++i) {
      const std::string& w = options_.workers[next_worker_.fetch_add(1) % n];
      auto body = CallBody(*transport_, w, Opcode::kCompact, job.epoch,
                           payload, options_.job_timeout);
      if (body.ok()) {
        CompactionResult res;
        Status s = DecodeResult(*body, &res);
        if (!s.ok()) {
          *retry = true;
          return s;
        }
        remote_jobs_.fetch_add(1);
        return res;
      }
      if (Retryable(body.status().code())) continue;
      *retry = body.status().Is(Code::kWriteFailed);
      return body.status();
    }
    *retry = true;
    return Status(Code::kBusy, "no worker accepted the job");
  }
  if (options_.local_compaction) {
    std::mt19937_64 rng(Mix64(options_.seed ^ job.job_id));
    auto res = ExecuteJob(job, *stoc_, rng, &stopping_);
    if (res.ok()) {
      local_jobs_.fetch_add(1);
    } else {
      *retry = res.status().Is(Code::kWriteFailed) ||
               Retryable(res.status().code());
    }
    return res;
  }
  *retry = true;
  return Status(Code::kUnavailable, "no compaction worker configured");
}

void Ltc::Dispatch(std::shared_ptr<Range> r, uint64_t job_id) {
  CompactionJob job;
  {
    std::lock_guard<std::mutex> l(r->mu);
    auto it = r->jobs.find(job_id);
    if (it == r->jobs.end()) return;
    job = it->second.job;
  }
  int attempts = 0;
  while (!stopping_) {
    {
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->serving || r->jobs.count(job_id) == 0) return;
    }
    bool retry = false;
    auto res = RunJob(job, &retry);
    if (stopping_) return;
    if (res.ok()) {
      (void)ApplyResult(r, *res);
      return;
    }
    if (!retry) {
      {
        std::lock_guard<std::mutex> l(r->mu);
        auto it = r->jobs.find(job_id);
        if (it == r->jobs.end()) return;
        for (const auto& in : it->second.pick.inputs) {
          r->pending_inputs.erase(in.handle.id);
        }
        if (it->second.pick.source_level == 0) r->l0_job_pending = false;
        r->jobs.erase(it);
        total_jobs_.fetch_sub(1);
      }
      Backoff(std::chrono::milliseconds(200));
      MaybeSchedule(r);
      return;
    }
    attempts = std::min(attempts + 1, 10);
    Backoff(std::chrono::milliseconds(10 * attempts));
  }
}

void Ltc::DeleteObjects(
    const std::vector<std::pair<ObjectId, std::string>>& objs) {
  for (const auto& [id, stoc] : objs) {
    Evict(id);
    (void)stoc_->DeleteObject(stoc, id);
  }
}

Status Ltc::ApplyResult(const std::shared_ptr<Range>& r,
                        const CompactionResult& result) {
  std::vector<std::pair<ObjectId, std::string>> outputs;
  for (const auto& o : result.outputs) outputs.emplace_back(o.id, o.stoc);
  std::vector<std::pair<ObjectId, std::string>> inputs;
  Status status;
  {
    std::lock_guard<std::mutex> l(r->mu);
    if (!r->serving || result.epoch != r->desc.epoch ||
        result.range_id != r->desc.range_id) {
      status = Status(Code::kStaleEpoch, "compaction result from epoch " +
                                             std::to_string(result.epoch));
    } else if (auto it = r->jobs.find(result.job_id); it == r->jobs.end()) {
      status = Status(Code::kUnknownJob,
                      "job " + std::to_string(result.job_id) + " is not pending");
    } else {
      Job job = std::move(it->second);
      r->jobs.erase(it);
      total_jobs_.fetch_sub(1);
      for (const auto& in : job.pick.inputs) {
        r->pending_inputs.erase(in.handle.id);
      }
      if (job.pick.source_level == 0) r->l0_job_pending = false;
      std::vector<SstHandle> outs;
      for (const auto& o : result.outputs) {
        outs.push_back(SstHandle{o.id, o.stoc, o.summary});
      }
      auto next = std::make_shared<LevelMetadata>(*r->levels);
      status = ApplyCompactionEdit(next.get(), job.pick.inputs,
                                   job.pick.target_level, outs);
      if (status.ok()) {
        r->levels = std::move(next);
        ++r->version;
        for (const auto& in : job.pick.inputs) {
          inputs.emplace_back(in.handle.id, in.handle.stoc);
        }
      }
    }
  }
  if (!status.ok()) {
    // A duplicate result names objects the first application made live.
    if (!status.Is(Code::kUnknownJob)) DeleteObjects(outputs);
    return status;
  }
  compactions_applied_.fetch_add(1);
  if (PersistManifest(*r).ok()) {
    DeleteObjects(inputs);
  } else {
    for (const auto& [id, stoc] : inputs) Evict(id);
  }
  MaybeSchedule(r);
  return Status::OK();
}

Status Ltc::ApplyCompaction(uint32_t range_id,
                            const CompactionResult& result) {
  auto r = RangeById(range_id);
  if (r == nullptr) return NotServing(range_id);
  return ApplyResult(r, result);
}

std::vector<CompactionJob> Ltc::PendingJobs(uint32_t range_id) const {
  std::vector<CompactionJob> out;
  auto r = RangeById(range_id);
  if (r == nullptr) return out;
  std::lock_guard<std::mutex> l(r->mu);
  for (const auto& [id, job] : r->jobs) out.push_back(job.job);
  return out;
}

// Ownership transfer.

Result<std::optional<RangeManifest>> Ltc::LoadLatestManifest(
    uint32_t range_id, const std::string& home) {
  DLSM_ASSIGN_OR_RETURN(std::vector<ObjectInfo> objs,
                        stoc_->ListObjects(home, range_id));
  std::optional<ObjectId> best;
  for (const auto& o : objs) {
    if (IsManifestObject(o.id) && (!best || o.id > *best)) best = o.id;
  }
  if (!best) return std::optional<RangeManifest>();
  DLSM_ASSIGN_OR_RETURN(std::string bytes,
                        stoc_->GetObject(home, *best, 0, UINT64_MAX));
  DLSM_ASSIGN_OR_RETURN(RangeManifest m, RangeManifest::Decode(bytes));
  return std::optional<RangeManifest>(std::move(m));
}

Status Ltc::Adopt(const RangeDescriptor& desc,
                  const std::vector<std::string>& log_stocs,
                  std::optional<RangeManifest> manifest) {
  if (log_stocs.empty()) return InvalidArgumentError("no log StoCs");
  if (stopping_) return UnavailableError("LTC is stopping");
  std::lock_guard<std::mutex> al(adopt_mu_);
  {
    std::shared_lock<std::shared_mutex> l(ranges_mu_);
    auto owned = ranges_.find(desc.range_id);
    if (owned != ranges_.end()) {
      if (owned->second->desc == desc) return Status::OK();
      return Status(Code::kStaleEpoch, "range already served at epoch " +
                                           std::to_string(
                                               owned->second->desc.epoch));
    }
    auto seen = max_epoch_seen_.find(desc.range_id);
    if (seen != max_epoch_seen_.end() && seen->second >= desc.epoch) {
      return Status(Code::kStaleEpoch, "epoch " + std::to_string(desc.epoch) +
                                           " already used here");
    }
  }

  RangeManifest m;
  if (manifest) {
    m = std::move(*manifest);
  } else {
    auto loaded = LoadLatestManifest(desc.range_id, log_stocs[0]);
    if (!loaded.ok()) {
      return Status(Code::kRecoveryFailed,
                    "loading manifest: " + loaded.status().ToString());
    }
    if (*loaded) {
      m = std::move(**loaded);
    } else {
      m.range_id = desc.range_id;
      m.levels = LevelMetadata(options_.policy.num_levels);
    }
  }
  if (m.range_id != desc.range_id) {
    return InvalidArgumentError("manifest is for another range");
  }
  if (m.epoch >= desc.epoch) {
    return Status(Code::kStaleEpoch,
                  "manifest epoch " + std::to_string(m.epoch) +
                      " is not older than " + std::to_string(desc.epoch));
  }

  auto r = std::make_shared<Range>();
  r->desc = desc;
  r->log_stocs = log_stocs;
  r->log_id = desc.range_id;

  // Reading at the new epoch fences every older writer on each replica.
  std::map<SeqNo, LogEntry> replay;
  std::map<SeqNo, std::vector<uint64_t>> lsn_of;
  SeqNo max_seq = m.last_flushed_seq;
  int readable = 0;
  Status read_error;
  for (size_t j = 0; j < log_stocs.size(); ++j) {
    auto recs = stoc_->ReadLog(log_stocs[j], r->log_id, 0, desc.epoch);
    if (!recs.ok()) {
      if (recs.status().Is(Code::kStaleEpoch)) return recs.status();
      read_error = recs.status();
      continue;
    }
    ++readable;
    for (const auto& rec : *recs) {
      auto e = LogEntry::Decode(rec.data);
      if (!e.ok()) {
        return Status(Code::kRecoveryFailed,
                      "log record: " + e.status().ToString());
      }
      max_seq = std::max(max_seq, e->seq);
      if (e->seq <= m.last_flushed_seq) continue;
      auto& lsns = lsn_of[e->seq];
      lsns.resize(log_stocs.size());
      lsns[j] = rec.lsn;
      replay.emplace(e->seq, std::move(e).value());
    }
  }
  if (readable == 0) {
    return Status(Code::kRecoveryFailed,
                  "no log replica readable: " + read_error.ToString());
  }
  for (const auto& h : m.levels.AllFiles()) {
    max_seq = std::max(max_seq, h.summary.max_seq);
  }

  r->levels = std::make_shared<LevelMetadata>(m.levels);
  r->version = m.version + 1;
  r->last_flushed_seq = m.last_flushed_seq;
  r->next_seq = max_seq + 1;
  r->active = std::make_shared<Memtable>(options_.memtable_bytes);
  for (const auto& [seq, e] : replay) {
    Status s = r->active->Put(e.key, seq, e.type, e.value);
    if (s.Is(Code::kMemtableFull)) {
      RotateLocked(*r);
      s = r->active->Put(e.key, seq, e.type, e.value);
    }
    if (!s.ok()) return Status(Code::kRecoveryFailed, s.ToString());
    auto& mx = r->max_lsn[r->active.get()];
    mx.resize(log_stocs.size());
    for (size_t j = 0; j < mx.size(); ++j) {
      mx[j] = std::max(mx[j], lsn_of[seq][j]);
    }
  }
  Status ps = PersistManifest(*r);
  if (!ps.ok()) return Status(Code::kRecoveryFailed, ps.ToString());
  {
    std::unique_lock<std::shared_mutex> l(ranges_mu_);
    ranges_[desc.range_id] = r;
    by_lower_[desc.lower] = r;
    max_epoch_seen_[desc.range_id] = desc.epoch;
  }
  {
    std::lock_guard<std::mutex> l(bg_mu_);
    flush_wanted_ = true;
    bg_cv_.notify_all();
  }
  MaybeSchedule(r);
  uint32_t id = desc.range_id;
  SpawnTracked([this, id] { (void)SweepOrphans(id); });
  return Status::OK();
}

Result<RangeManifest> Ltc::Release(uint32_t range_id) {
  auto r = RangeById(range_id);
  if (r == nullptr) return NotServing(range_id);
  std::lock_guard<std::mutex> lane(r->lane);
  std::lock_guard<std::mutex> fl(r->flush_mu);
  size_t unflushed = 0;
  {
    std::unique_lock<std::mutex> l(r->mu);
    if (!r->serving) return NotServing(range_id);
    r->serving = false;
    r->cv.notify_all();
    r->cv.wait(l, [&] { return r->inflight == 0; });
    unflushed = r->active->approx_bytes();
    for (const auto& m : r->immutables) unflushed += m->approx_bytes();
  }
  // Small tails are flushed; large ones are handed over through the log.
  if (unflushed < options_.handoff_flush_bytes) {
    {
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->active->empty()) RotateLocked(*r);
    }
    while (true) {
      {
        std::lock_guard<std::mutex> l(r->mu);
        if (r->immutables.empty()) break;
      }
      if (!FlushOne(*r, true).ok()) break;
    }
  }
  {
    std::lock_guard<std::mutex> l(r->mu);
    total_jobs_.fetch_sub(r->jobs.size());
    r->jobs.clear();
    r->pending_inputs.clear();
    r->l0_job_pending = false;
  }
  Status ps = PersistManifest(*r);
  if (!ps.ok()) {
    std::lock_guard<std::mutex> l(r->mu);
    r->serving = true;
    return ps;
  }
  RangeManifest m;
  {
    std::lock_guard<std::mutex> l(r->mu);
    m = SnapshotManifestLocked(*r);
  }
  DropRange(r);
  return m;
}

void Ltc::DropRange(const std::shared_ptr<Range>& r) {
  uint32_t range_id = r->desc.range_id;
  {
    std::unique_lock<std::shared_mutex> l(ranges_mu_);
    auto it = ranges_.find(range_id);
    if (it == ranges_.end() || it->second != r) return;
    ranges_.erase(it);
    by_lower_.erase(r->desc.lower);
  }
  std::lock_guard<std::mutex> l(table_mu_);
  std::erase_if(tables_,
                [&](const auto& kv) { return kv.first.range_id == range_id; });
}

Result<size_t> Ltc::SweepOrphans(uint32_t range_id) {
  auto r = RangeById(range_id);
  if (r == nullptr) return NotServing(range_id);
  std::set<std::string> stocs(options_.stocs.begin(), options_.stocs.end());
  stocs.insert(r->log_stocs.begin(), r->log_stocs.end());
  std::vector<std::pair<ObjectId, std::string>> listed;
  for (const auto& s : stocs) {
    auto objs = stoc_->ListObjects(s, range_id);
    if (!objs.ok()) continue;
    for (const auto& o : *objs) listed.emplace_back(o.id, s);
  }
  // The live set is taken after listing so anything made live in between
  // is seen as live.
  std::map<ObjectId, std::string> live;
  std::set<uint64_t> jobs;
  std::set<ObjectId> inflight;
  std::optional<ObjectId> manifest;
  uint64_t epoch = 0;
  {
    std::lock_guard<std::mutex> l(r->mu);
    if (!r->serving) return NotServing(range_id);
    for (const auto& h : r->levels->AllFiles()) live[h.id] = h.stoc;
    for (const auto& [id, job] : r->jobs) jobs.insert(id);
    inflight = r->inflight_objects;
    manifest = r->manifest_id;
    epoch = r->desc.epoch;
  }
  std::vector<std::pair<ObjectId, std::string>> doomed;
  for (const auto& [id, stoc] : listed) {
    if (IsManifestObject(id)) {
      if (manifest && id < *manifest) doomed.emplace_back(id, stoc);
      continue;
    }
    auto it = live.find(id);
    if (it != live.end() && it->second == stoc) continue;
    if (inflight.count(id) != 0) continue;
    if (IsCompactionObject(id) &&
        jobs.count(id.file_no & ~uint64_t{0xFFFF}) != 0) {
      continue;
    }
    if (ObjectEpoch(id) > epoch) continue;
    doomed.emplace_back(id, stoc);
  }
  DeleteObjects(doomed);
  orphans_deleted_.fetch_add(doomed.size());
  return doomed.size();
}

Status Ltc::Quiesce(std::chrono::milliseconds timeout) {
  auto deadline = Clock::now() + timeout;
  while (Clock::now() < deadline && !stopping_) {
    (void)FlushAll();
    bool idle = true;
    auto ranges = AllRanges();
    for (const auto& r : ranges) {
      std::lock_guard<std::mutex> l(r->mu);
      if (!r->serving) continue;
      if (!r->active->empty() || !r->immutables.empty() || !r->jobs.empty() ||
          PickCompaction(*r->levels, options_.policy, r->pending_inputs,
                         r->l0_job_pending)) {
        idle = false;
      }
    }
    if (idle) return Status::OK();
    for (const auto& r : ranges) MaybeSchedule(r);
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return Status(Code::kTimeout, "LTC did not quiesce in time");
}

// Introspection.

LtcStats Ltc::Stats() const {
  LtcStats s;
  for (const auto& r : AllRanges()) {
    LtcRangeStats rs;
    std::lock_guard<std::mutex> l(r->mu);
    rs.desc = r->desc;
    rs.memtable_bytes = r->active->approx_bytes();
    rs.immutables = r->immutables.size();
    for (const auto& level : r->levels->levels) {
      rs.files_per_level.push_back(level.size());
      for (const auto& h : level) rs.table_bytes += h.summary.file_size;
    }
    rs.pending_jobs = r->jobs.size();
    rs.ops = r->ops.load();
    rs.last_flushed_seq = r->last_flushed_seq;
    rs.manifest_version = r->version;
    s.ranges.push_back(std::move(rs));
  }
  s.backlog = total_jobs_.load();
  s.cpu_busy_us = cpu_.busy_us();
  s.cpu_cores = cpu_.cores();
  s.flushes = flushes_.load();
  s.compactions_applied = compactions_applied_.load();
  s.local_jobs = local_jobs_.load();
  s.remote_jobs = remote_jobs_.load();
  s.orphans_deleted = orphans_deleted_.load();
  std::lock_guard<std::mutex> l(stats_mu_);
  s.flushes_per_stoc = flushes_per_stoc_;
  return s;
}

std::string Ltc::StatsJson() const {
  LtcStats s = Stats();
  nlohmann::json j;
  j["name"] = options_.name;
  j["backlog"] = s.backlog;
  j["flushes"] = s.flushes;
  j["compactions_applied"] = s.compactions_applied;
  j["local_jobs"] = s.local_jobs;
  j["remote_jobs"] = s.remote_jobs;
  j["orphans_deleted"] = s.orphans_deleted;
  j["cpu_busy_us"] = s.cpu_busy_us;
  j["cpu_cores"] = s.cpu_cores;
  j["flushes_per_stoc"] = s.flushes_per_stoc;
  j["ranges"] = nlohmann::json::array();
  for (const auto& r : s.ranges) {
    j["ranges"].push_back({{"range_id", r.desc.range_id},
                           {"epoch", r.desc.epoch},
                           {"memtable_bytes", r.memtable_bytes},
                           {"immutables", r.immutables},
                           {"files_per_level", r.files_per_level},
                           {"table_bytes", r.table_bytes},
                           {"pending_jobs", r.pending_jobs},
                           {"ops", r.ops},
                           {"last_flushed_seq", r.last_flushed_seq},
                           {"manifest_version", r.manifest_version}});
  }
  return j.dump();
}

std::map<ObjectId, std::string> Ltc::Placements() const {
  std::map<ObjectId, std::string> out;
  for (const auto& r : AllRanges()) {
    std::lock_guard<std::mutex> l(r->mu);
    for (const auto& h : r->levels->AllFiles()) out[h.id] = h.stoc;
  }
  return out;
}

Result<RangeManifest> Ltc::Manifest(uint32_t range_id) const {
  auto r = RangeById(range_id);
  if (r == nullptr) return NotServing(range_id);
  std::lock_guard<std::mutex> l(r->mu);
  return SnapshotManifestLocked(*r);
}

std::vector<RangeDescriptor> Ltc::OwnedRanges() const {
  std::vector<RangeDescriptor> out;
  for (const auto& r : AllRanges()) out.push_back(r->desc);
  return out;
}

// Background reporting.

void Ltc::ReporterLoop() {
  auto last = Clock::now();
  while (!stopping_) {
    Backoff(options_.report_interval);
    if (stopping_) return;
    auto now = Clock::now();
    double secs = std::chrono::duration<double>(now - last).count();
    last = now;
    LoadReport report;
    report.ltc = address_;
    for (const auto& r : AllRanges()) {
      uint64_t ops = r->ops.load();
      uint64_t delta = ops - r->reported_ops;
      r->reported_ops = ops;
      report.ops_per_sec.emplace_back(r->desc.range_id,
                                      secs > 0 ? delta / secs : 0.0);
    }
    (void)CallBody(*transport_, options_.coordinator, Opcode::kReportLoad, 0,
                   report.Encode(), options_.rpc_timeout);
  }
}

// Wire protocol.

Frame Ltc::Serve(const Frame& f) { return dispatcher_.Handle(f); }

void Ltc::RegisterHandlers() {
  auto ack = [](const PutAck& a) {
    std::string out;
    PutFixed64(&out, a.seq);
    PutFixed8(&out, a.durable ? 1 : 0);
    return out;
  };
  dispatcher_.Register(Opcode::kPing, [](const Frame&) -> Result<std::string> {
    return std::string();
  });
  dispatcher_.Register(Opcode::kPut, [this, ack](const Frame& f)
                                         -> Result<std::string> {
    Decoder d(f.payload);
    std::string_view key, value;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&key));
    DLSM_RETURN_IF_ERROR(d.GetBytes(&value));
    DLSM_ASSIGN_OR_RETURN(PutAck a, Put(key, value, f.epoch));
    return ack(a);
  });
  dispatcher_.Register(Opcode::kDelete, [this, ack](const Frame& f)
                                            -> Result<std::string> {
    Decoder d(f.payload);
    std::string_view key;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&key));
    DLSM_ASSIGN_OR_RETURN(PutAck a, Delete(key, f.epoch));
    return ack(a);
  });
  dispatcher_.Register(Opcode::kGet, [this](const Frame& f)
                                         -> Result<std::string> {
    Decoder d(f.payload);
    std::string_view key;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&key));
    DLSM_ASSIGN_OR_RETURN(std::optional<std::string> v, Get(key, f.epoch));
    std::string out;
    PutFixed8(&out, v ? 1 : 0);
    PutBytes(&out, v ? *v : std::string());
    return out;
  });
  dispatcher_.Register(Opcode::kScan, [this](const Frame& f)
                                          -> Result<std::string> {
    Decoder d(f.payload);
    std::string_view lower, upper;
    uint32_t limit = 0;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&lower));
    DLSM_RETURN_IF_ERROR(d.GetBytes(&upper));
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&limit));
    DLSM_ASSIGN_OR_RETURN(ScanResult res, Scan(lower, upper, limit, f.epoch));
    std::string out;
    PutFixed32(&out, static_cast<uint32_t>(res.rows.size()));
    for (const auto& [k, v] : res.rows) {
      PutBytes(&out, k);
      PutBytes(&out, v);
    }
    PutBytes(&out, res.range_upper);
    return out;
  });
  dispatcher_.Register(Opcode::kAdoptRange, [this](const Frame& f)
                                                -> Result<std::string> {
    Decoder d(f.payload);
    RangeDescriptor desc;
    uint32_t n = 0;
    DLSM_RETURN_IF_ERROR(RangeDescriptor::DecodeFrom(&d, &desc));
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
    std::vector<std::string> log_stocs(n);
    for (auto& s : log_stocs) DLSM_RETURN_IF_ERROR(d.GetBytes(&s));
    bool has_manifest = false;
    DLSM_RETURN_IF_ERROR(d.GetBool(&has_manifest));
    std::optional<RangeManifest> manifest;
    if (has_manifest) {
      std::string_view bytes;
      DLSM_RETURN_IF_ERROR(d.GetBytes(&bytes));
      DLSM_ASSIGN_OR_RETURN(manifest, RangeManifest::Decode(bytes));
    }
    DLSM_RETURN_IF_ERROR(Adopt(desc, log_stocs, std::move(manifest)));
    return std::string();
  });
  dispatcher_.Register(Opcode::kReleaseRange, [this](const Frame& f)
                                                  -> Result<std::string> {
    Decoder d(f.payload);
    uint32_t range_id = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&range_id));
    DLSM_ASSIGN_OR_RETURN(RangeManifest m, Release(range_id));
    std::string out;
    PutBytes(&out, m.Encode());
    return out;
  });
  dispatcher_.Register(Opcode::kLtcStats, [this](const Frame&)
                                              -> Result<std::string> {
    return StatsJson();
  });
  dispatcher_.Register(Opcode::kFlush, [this](const Frame&)
                                           -> Result<std::string> {
    DLSM_RETURN_IF_ERROR(FlushAll());
    return std::string();
  });
  dispatcher_.Register(Opcode::kQuiesce, [this](const Frame& f)
                                             -> Result<std::string> {
    Decoder d(f.payload);
    uint32_t timeout_ms = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&timeout_ms));
    DLSM_RETURN_IF_ERROR(Quiesce(std::chrono::milliseconds(timeout_ms)));
    return std::string();
  });
  dispatcher_.Register(Opcode::kHeartbeat, [this](const Frame&)
                                               -> Result<std::string> {
    auto owned = OwnedRanges();
    std::string out;
    PutFixed32(&out, static_cast<uint32_t>(owned.size()));
    for (const auto& r : owned) r.EncodeTo(&out);
    return out;
  });
}

}  // namespace dlsm
