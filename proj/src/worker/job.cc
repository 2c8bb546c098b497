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

#include "worker/job.h"

#include <chrono>

#include "common/coding.h"
#include "stoc/placement.h"

namespace dlsm {

void EncodeJob(std::string* out, const CompactionJob& job) {
  PutFixed64(out, job.job_id);
  PutFixed32(out, job.range_id);
  PutFixed64(out, job.epoch);
  PutFixed32(out, static_cast<uint32_t>(job.inputs.size()));
  for (const auto& in : job.inputs) {
    PutFixed32(out, in.id.range_id);
    PutFixed64(out, in.id.file_no);
    PutBytes(out, in.stoc);
    PutFixed64(out, in.size);
  }
  PutFixed32(out, static_cast<uint32_t>(job.target_level));
  PutFixed8(out, job.purge_tombstones ? 1 : 0);
  PutFixed64(out, job.max_output_bytes);
  PutFixed64(out, job.sst.block_size_bytes);
  PutFixed32(out, static_cast<uint32_t>(job.sst.bloom_bits_per_key));
  PutFixed32(out, static_cast<uint32_t>(job.output_stocs.size()));
  for (const auto& s : job.output_stocs) PutBytes(out, s);
  PutFixed32(out, static_cast<uint32_t>(job.d));
  PutBytes(out, job.pinned_stoc);
}

Status DecodeJob(std::string_view in, CompactionJob* job) {
  Decoder d(in);
  uint32_t n = 0, u32 = 0;
  uint64_t u64 = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&job->job_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&job->range_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&job->epoch));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  job->inputs.resize(n);
  for (auto& i : job->inputs) {
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&i.id.range_id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&i.id.file_no));
    DLSM_RETURN_IF_ERROR(d.GetBytes(&i.stoc));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&i.size));
  }
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&u32));
  job->target_level = static_cast<int>(u32);
  DLSM_RETURN_IF_ERROR(d.GetBool(&job->purge_tombstones));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&job->max_output_bytes));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&u64));
  job->sst.block_size_bytes = u64;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&u32));
  job->sst.bloom_bits_per_key = static_cast<int>(u32);
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  job->output_stocs.resize(n);
  for (auto& s : job->output_stocs) DLSM_RETURN_IF_ERROR(d.GetBytes(&s));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&u32));
  job->d = static_cast<int>(u32);
  DLSM_RETURN_IF_ERROR(d.GetBytes(&job->pinned_stoc));
  if (!d.empty()) return CorruptionError("trailing bytes in job");
  if (job->inputs.empty()) return InvalidArgumentError("job has no inputs");
  return Status::OK();
}

void EncodeResult(std::string* out, const CompactionResult& r) {
  PutFixed64(out, r.job_id);
  PutFixed32(out, r.range_id);
  PutFixed64(out, r.epoch);
  PutFixed32(out, static_cast<uint32_t>(r.outputs.size()));
  for (const auto& o : r.outputs) {
    PutFixed32(out, o.id.range_id);
    PutFixed64(out, o.id.file_no);
    PutBytes(out, o.stoc);
    EncodeSstSummary(out, o.summary);
  }
  PutFixed64(out, r.bytes_read);
  PutFixed64(out, r.bytes_written);
  PutFixed64(out, r.entries_dropped);
  PutFixed64(out, r.duration_us);
}

Status DecodeResult(std::string_view in, CompactionResult* r) {
  Decoder d(in);
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&r->job_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&r->range_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&r->epoch));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  r->outputs.resize(n);
  for (auto& o : r->outputs) {
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&o.id.range_id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&o.id.file_no));
    DLSM_RETURN_IF_ERROR(d.GetBytes(&o.stoc));
    DLSM_RETURN_IF_ERROR(DecodeSstSummary(&d, &o.summary));
  }
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&r->bytes_read));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&r->bytes_written));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&r->entries_dropped));
  return d.GetFixed64(&r->duration_us);
}

ObjectId OutputObjectId(const CompactionJob& job, uint32_t index) {
  return ObjectId{job.range_id, job.job_id | index};
}

Result<CompactOutput> CompactJobInputs(const CompactionJob& job,
                                       StocClient& client,
                                       uint64_t* bytes_read) {
  std::vector<SstContents> inputs;
  inputs.reserve(job.inputs.size());
  for (const auto& in : job.inputs) {
    Result<std::string> bytes = client.GetObject(in.stoc, in.id, 0, UINT64_MAX);
    if (!bytes.ok()) {
      return Status(Code::kFetchFailed, "fetch " + in.id.ToString() + " from " +
                                            in.stoc + ": " +
                                            bytes.status().ToString());
    }
    if (bytes_read != nullptr) *bytes_read += bytes->size();
    Result<SstContents> c = DecodeSst(*bytes);
    if (!c.ok()) {
      return Status(Code::kFetchFailed, "decode " + in.id.ToString() + ": " +
                                            c.status().ToString());
    }
    inputs.push_back(std::move(*c));
  }
  CompactOptions opts;
  opts.purge_tombstones = job.purge_tombstones;
  opts.max_output_bytes = job.max_output_bytes;
  opts.sst = job.sst;
  return Compact(inputs, opts);
}

namespace {

// Stores one output. An AlreadyExists reply is success only if the stored
// bytes are ours (a retried job); anything else tries another StoC.
Result<std::string> StoreOutput(const CompactionJob& job, ObjectId id,
                                const std::string& bytes, StocClient& client,
                                std::mt19937_64& rng) {
  std::vector<std::string> tried;
  std::vector<std::string> pool =
      job.pinned_stoc.empty() ? job.output_stocs
                              : std::vector<std::string>{job.pinned_stoc};
  Status last = Status(Code::kNoCandidates, "no output StoCs");
  while (tried.size() < pool.size()) {
    auto cands = CandidatesFromBoard(pool, client.board().get(), tried);
    Result<size_t> pick = SelectPowerOfD(cands, job.d, rng);
    if (!pick.ok()) break;
    const std::string& stoc = cands[*pick].address;
    Result<uint32_t> put = client.PutObject(stoc, id, bytes);
    if (put.ok()) return stoc;
    if (put.status().code() == Code::kAlreadyExists) {
      Result<std::string> existing = client.GetObject(stoc, id, 0, UINT64_MAX);
      if (existing.ok() && *existing == bytes) return stoc;
      return Status(Code::kWriteFailed,
                    "object " + id.ToString() + " exists with other bytes");
    }
    last = put.status();
    tried.push_back(stoc);
  }
  return Status(Code::kWriteFailed,
                "store " + id.ToString() + ": " + last.ToString());
}

}  // namespace

Result<CompactionResult> ExecuteJob(const CompactionJob& job,
                                    StocClient& client, std::mt19937_64& rng,
                                    const std::atomic<bool>* cancel) {
  auto start = std::chrono::steady_clock::now();
  if (job.inputs.empty()) return InvalidArgumentError("job has no inputs");
  CompactionResult result;
  result.job_id = job.job_id;
  result.range_id = job.range_id;
  result.epoch = job.epoch;
  DLSM_ASSIGN_OR_RETURN(CompactOutput out,
                        CompactJobInputs(job, client, &result.bytes_read));
  if (out.tables.size() > 0xFFFF) {
    return Status(Code::kWriteFailed, "too many outputs for one job");
  }
  for (size_t i = 0; i < out.tables.size(); ++i) {
    if (cancel != nullptr && cancel->load()) {
      return UnavailableError("job cancelled");
    }
    ObjectId id = OutputObjectId(job, static_cast<uint32_t>(i));
    DLSM_ASSIGN_OR_RETURN(std::string stoc,
                          StoreOutput(job, id, out.tables[i].bytes, client, rng));
    result.bytes_written += out.tables[i].bytes.size();
    result.outputs.push_back(JobOutput{id, stoc, out.tables[i].summary});
  }
  result.entries_dropped = out.input_entries - out.output_entries;
  result.duration_us = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - start)
          .count());
  return result;
}

}  // namespace dlsm
