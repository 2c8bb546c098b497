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

#ifndef DLSM_STOC_STORE_H_
#define DLSM_STOC_STORE_H_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "common/status.h"
#include "lsm/types.h"

namespace dlsm {

enum class Tier { kMemory, kDisk };

struct StoreOptions {
  Tier tier = Tier::kMemory;
  std::string dir;               // required for kDisk
  uint64_t capacity_bytes = 0;   // 0 = unlimited
  uint64_t log_segment_bytes = 4u << 20;
  bool sync = true;              // fsync before acknowledging (kDisk)
};

struct ObjectInfo {
  ObjectId id;
  uint64_t size = 0;
};

struct LogRecord {
  uint64_t lsn = 0;
  std::string data;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

// Local storage behind a StoC: write-once objects and append-only logs.
//
// Disk layout under dir:
//   <range_id>-<file_no>.sst    one file per object
//   <log_id>.log.<segment>      log segments, records
//                               u64 lsn | u32 len | u32 crc | data
//   <log_id>.log.meta           u64 epoch | u64 truncated_upto | u32 crc
//
// Thread-safe. Object operations on distinct ids run in parallel; appends
// to one log are serialized.
class ObjectStore {
 public:
  static Result<std::unique_ptr<ObjectStore>> Open(StoreOptions options);
  ~ObjectStore();

  // Returns the crc32 of bytes.
  Result<uint32_t> PutObject(ObjectId id, std::string_view bytes);
  // len == UINT64_MAX reads to the end.
  Result<std::string> GetObject(ObjectId id, uint64_t offset, uint64_t len);
  Result<uint64_t> ObjectSize(ObjectId id);
  Status DeleteObject(ObjectId id);
  std::vector<ObjectInfo> ListObjects(std::optional<uint32_t> range_id);

  // Log operations carry the caller's epoch for the log. A call with an
  // epoch below the highest one seen for the log fails with StaleEpoch; a
  // higher epoch is recorded durably before the call proceeds. Epoch 0
  // skips fencing.
  Result<uint64_t> AppendLog(uint64_t log_id, uint64_t epoch,
                             std::string_view record);
  // Records with lsn >= from_lsn, stopping after max_bytes of payload;
  // *more is set when records were left out.
  Result<std::vector<LogRecord>> ReadLog(uint64_t log_id, uint64_t from_lsn,
                                         uint64_t epoch, size_t max_bytes,
                                         bool* more);
  Status TruncateLog(uint64_t log_id, uint64_t upto_lsn, uint64_t epoch);
  Result<uint64_t> LogTail(uint64_t log_id);
  std::vector<uint64_t> ListLogs();

  uint64_t bytes_stored() const { return bytes_stored_.load(); }
  uint64_t object_count() const;
  Tier tier() const { return options_.tier; }

 private:
  struct Log;

  explicit ObjectStore(StoreOptions options) : options_(std::move(options)) {}

  Status Recover();
  Status RecoverLog(uint64_t log_id, const std::vector<uint64_t>& segments);
  std::string ObjectPath(ObjectId id) const;
  std::string SegmentPath(uint64_t log_id, uint64_t segment) const;
  std::string MetaPath(uint64_t log_id) const;
  Status WriteMeta(uint64_t log_id, const Log& log);
  Status Reserve(uint64_t bytes, std::atomic<uint64_t>* counter);
  Result<std::shared_ptr<Log>> GetLog(uint64_t log_id, bool create);
  Status Fence(uint64_t log_id, Log& log, uint64_t epoch);

  StoreOptions options_;
  std::atomic<uint64_t> bytes_stored_{0};
  std::atomic<uint64_t> log_bytes_{0};

  mutable std::shared_mutex objects_mu_;
  // Memory tier keeps bytes; disk tier keeps only sizes. nullptr bytes
  // marks a put in progress.
  struct Object {
    uint64_t size = 0;
    bool committed = false;
    std::shared_ptr<const std::string> bytes;
  };
  std::map<ObjectId, Object> objects_;

  std::mutex logs_mu_;
  std::map<uint64_t, std::shared_ptr<Log>> logs_;
};

}  // namespace dlsm

#endif  // DLSM_STOC_STORE_H_
