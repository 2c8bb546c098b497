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

#include "stoc/store.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "common/coding.h"

namespace dlsm {

namespace fs = std::filesystem;

namespace {

constexpr size_t kLogRecordHeader = 16;

Status PosixError(const std::string& what) {
  return IoError(what + ": " + std::strerror(errno));
}

Status WriteFully(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return PosixError("write");
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return Status::OK();
}

Status SyncDir(const std::string& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return PosixError("open dir " + dir);
  int rc = ::fsync(fd);
  ::close(fd);
  return rc == 0 ? Status::OK() : PosixError("fsync dir");
}

// Writes path atomically: tmp file, fsync, rename, fsync dir.
Status WriteFileAtomic(const std::string& dir, const std::string& path,
                       std::string_view data, bool sync) {
  std::string tmp = path + ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) return PosixError("open " + tmp);
  Status s = WriteFully(fd, data);
  if (s.ok() && sync && ::fsync(fd) != 0) s = PosixError("fsync " + tmp);
  ::close(fd);
  if (!s.ok()) {
    ::unlink(tmp.c_str());
    return s;
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) return PosixError("rename");
  return sync ? SyncDir(dir) : Status::OK();
}

Result<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return NotFoundError("cannot open " + path);
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

}  // namespace

struct ObjectStore::Log {
  struct Segment {
    uint64_t number = 0;
    uint64_t max_lsn = 0;
    uint64_t bytes = 0;
  };

  std::mutex mu;
  uint64_t epoch = 0;
  uint64_t truncated_upto = 0;
  uint64_t next_lsn = 1;
  std::map<uint64_t, std::string> records;
  std::vector<Segment> segments;
  int active_fd = -1;
  bool meta_written = false;

  ~Log() {
    if (active_fd >= 0) ::close(active_fd);
  }
};

Result<std::unique_ptr<ObjectStore>> ObjectStore::Open(StoreOptions options) {
  if (options.tier == Tier::kDisk) {
    if (options.dir.empty()) {
      return InvalidArgumentError("disk tier requires a directory");
    }
    std::error_code ec;
    fs::create_directories(options.dir, ec);
    if (ec) return IoError("create " + options.dir + ": " + ec.message());
  }
  std::unique_ptr<ObjectStore> store(new ObjectStore(std::move(options)));
  if (store->options_.tier == Tier::kDisk) {
    DLSM_RETURN_IF_ERROR(store->Recover());
  }
  return store;
}

ObjectStore::~ObjectStore() = default;

std::string ObjectStore::ObjectPath(ObjectId id) const {
  return options_.dir + "/" + std::to_string(id.range_id) + "-" +
         std::to_string(id.file_no) + ".sst";
}

std::string ObjectStore::SegmentPath(uint64_t log_id, uint64_t segment) const {
  return options_.dir + "/" + std::to_string(log_id) + ".log." +
         std::to_string(segment);
}

std::string ObjectStore::MetaPath(uint64_t log_id) const {
  return options_.dir + "/" + std::to_string(log_id) + ".log.meta";
}

Status ObjectStore::Recover() {
  std::map<uint64_t, std::vector<uint64_t>> log_segments;
  std::set<uint64_t> log_ids;
  for (const auto& entry : fs::directory_iterator(options_.dir)) {
    std::string name = entry.path().filename().string();
    unsigned range = 0;
    unsigned long long file_no = 0, log_id = 0, seg = 0;
    char tail[16] = {0};
    if (name.size() > 4 && name.ends_with(".tmp")) {
      fs::remove(entry.path());
      continue;
    }
    if (std::sscanf(name.c_str(), "%u-%llu.ss%1s", &range, &file_no, tail) == 3 &&
        name.ends_with(".sst")) {
      ObjectId id{range, file_no};
      uint64_t size = entry.file_size();
      objects_[id] = Object{size, true, nullptr};
      bytes_stored_ += size;
      continue;
    }
    if (name.ends_with(".log.meta") &&
        std::sscanf(name.c_str(), "%llu.log.meta", &log_id) == 1) {
      log_ids.insert(log_id);
      continue;
    }
    if (std::sscanf(name.c_str(), "%llu.log.%llu", &log_id, &seg) == 2) {
      log_segments[log_id].push_back(seg);
      log_ids.insert(log_id);
    }
  }
  for (uint64_t id : log_ids) {
    auto& segs = log_segments[id];
    std::sort(segs.begin(), segs.end());
    DLSM_RETURN_IF_ERROR(RecoverLog(id, segs));
  }
  return Status::OK();
}

Status ObjectStore::RecoverLog(uint64_t log_id,
                               const std::vector<uint64_t>& segments) {
  auto log = std::make_shared<Log>();
  Result<std::string> meta = ReadFile(MetaPath(log_id));
  if (meta.ok()) {
    if (meta->size() != 20 ||
        Crc32(std::string_view(*meta).substr(0, 16)) !=
            DecodeFixed32(meta->data() + 16)) {
      return CorruptionError("bad log meta for log " + std::to_string(log_id));
    }
    log->epoch = DecodeFixed64(meta->data());
    log->truncated_upto = DecodeFixed64(meta->data() + 8);
    log->meta_written = true;
  }
  uint64_t max_lsn = log->truncated_upto;
  for (uint64_t seg : segments) {
    std::string path = SegmentPath(log_id, seg);
    DLSM_ASSIGN_OR_RETURN(std::string data, ReadFile(path));
    Log::Segment s{seg, 0, 0};
    size_t pos = 0;
    while (pos + kLogRecordHeader <= data.size()) {
      uint64_t lsn = DecodeFixed64(data.data() + pos);
      uint32_t len = DecodeFixed32(data.data() + pos + 8);
      uint32_t crc = DecodeFixed32(data.data() + pos + 12);
      if (pos + kLogRecordHeader + len > data.size()) break;
      std::string_view body(data.data() + pos + kLogRecordHeader, len);
      std::string check;
      PutFixed64(&check, lsn);
      check.append(body);
      if (Crc32(check) != crc) break;
      if (lsn > log->truncated_upto) {
        log->records[lsn] = std::string(body);
        log_bytes_ += len;
      }
      s.max_lsn = std::max(s.max_lsn, lsn);
      max_lsn = std::max(max_lsn, lsn);
      pos += kLogRecordHeader + len;
    }
    if (pos != data.size()) {
      // Torn tail from a crash mid-append: the record was never acked.
      if (::truncate(path.c_str(), static_cast<off_t>(pos)) != 0) {
        return PosixError("truncate " + path);
      }
    }
    s.bytes = pos;
    log->segments.push_back(s);
  }
  log->next_lsn = max_lsn + 1;
  logs_[log_id] = std::move(log);
  return Status::OK();
}

Status ObjectStore::Reserve(uint64_t bytes, std::atomic<uint64_t>* counter) {
  uint64_t prev = counter->fetch_add(bytes);
  if (options_.capacity_bytes != 0 &&
      bytes_stored_.load() + log_bytes_.load() > options_.capacity_bytes) {
    counter->fetch_sub(bytes);
    (void)prev;
    return Status(Code::kOutOfSpace, "store capacity exceeded");
  }
  return Status::OK();
}

Result<uint32_t> ObjectStore::PutObject(ObjectId id, std::string_view bytes) {
  {
    std::unique_lock<std::shared_mutex> l(objects_mu_);
    if (objects_.count(id)) {
      return AlreadyExistsError("object " + id.ToString() + " exists");
    }
    DLSM_RETURN_IF_ERROR(Reserve(bytes.size(), &bytes_stored_));
    objects_[id] = Object{bytes.size(), false, nullptr};
  }
  Status s;
  std::shared_ptr<const std::string> held;
  if (options_.tier == Tier::kDisk) {
    s = WriteFileAtomic(options_.dir, ObjectPath(id), bytes, options_.sync);
  } else {
    held = std::make_shared<const std::string>(bytes);
  }
  std::unique_lock<std::shared_mutex> l(objects_mu_);
  if (!s.ok()) {
    objects_.erase(id);
    bytes_stored_ -= bytes.size();
    return s;
  }
  Object& o = objects_[id];
  o.committed = true;
  o.bytes = std::move(held);
  return Crc32(bytes);
}

Result<std::string> ObjectStore::GetObject(ObjectId id, uint64_t offset,
                                           uint64_t len) {
  Object o;
  {
    std::shared_lock<std::shared_mutex> l(objects_mu_);
    auto it = objects_.find(id);
    if (it == objects_.end() || !it->second.committed) {
      return NotFoundError("object " + id.ToString());
    }
    o = it->second;
  }
  if (len == UINT64_MAX) len = offset <= o.size ? o.size - offset : 0;
  if (offset > o.size || len > o.size - offset) {
    return OutOfRangeError("read [" + std::to_string(offset) + ", +" +
                           std::to_string(len) + ") past object of " +
                           std::to_string(o.size) + " bytes");
  }
  if (o.bytes) return o.bytes->substr(offset, len);
  int fd = ::open(ObjectPath(id).c_str(), O_RDONLY);
  if (fd < 0) {
    if (errno == ENOENT) return NotFoundError("object " + id.ToString());
    return PosixError("open object");
  }
  std::string out(len, '\0');
  size_t done = 0;
  while (done < len) {
    ssize_t n = ::pread(fd, out.data() + done, len - done,
                        static_cast<off_t>(offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      ::close(fd);
      return IoError("short read on object " + id.ToString());
    }
    done += static_cast<size_t>(n);
  }
  ::close(fd);
  return out;
}

Result<uint64_t> ObjectStore::ObjectSize(ObjectId id) {
  std::shared_lock<std::shared_mutex> l(objects_mu_);
  auto it = objects_.find(id);
  if (it == objects_.end() || !it->second.committed) {
    return NotFoundError("object " + id.ToString());
  }
  return it->second.size;
}

Status ObjectStore::DeleteObject(ObjectId id) {
  std::unique_lock<std::shared_mutex> l(objects_mu_);
  auto it = objects_.find(id);
  if (it == objects_.end() || !it->second.committed) {
    return NotFoundError("object " + id.ToString());
  }
  if (options_.tier == Tier::kDisk) {
    if (::unlink(ObjectPath(id).c_str()) != 0 && errno != ENOENT) {
      return PosixError("unlink object");
    }
  }
  bytes_stored_ -= it->second.size;
  objects_.erase(it);
  return Status::OK();
}

std::vector<ObjectInfo> ObjectStore::ListObjects(
    std::optional<uint32_t> range_id) {
  std::shared_lock<std::shared_mutex> l(objects_mu_);
  std::vector<ObjectInfo> out;
  for (const auto& [id, o] : objects_) {
    if (!o.committed) continue;
    if (range_id && id.range_id != *range_id) continue;
    out.push_back(ObjectInfo{id, o.size});
  }
  return out;
}

uint64_t ObjectStore::object_count() const {
  std::shared_lock<std::shared_mutex> l(objects_mu_);
  uint64_t n = 0;
  for (const auto& [id, o] : objects_) n += o.committed ? 1 : 0;
  return n;
}

Result<std::shared_ptr<ObjectStore::Log>> ObjectStore::GetLog(uint64_t log_id,
                                                              bool create) {
  std::lock_guard<std::mutex> l(logs_mu_);
  auto it = logs_.find(log_id);
  if (it != logs_.end()) return it->second;
  if (!create) return NotFoundError("log " + std::to_string(log_id));
  auto log = std::make_shared<Log>();
  logs_[log_id] = log;
  return log;
}

Status ObjectStore::WriteMeta(uint64_t log_id, const Log& log) {
  if (options_.tier != Tier::kDisk) return Status::OK();
  std::string meta;
  PutFixed64(&meta, log.epoch);
  PutFixed64(&meta, log.truncated_upto);
  PutFixed32(&meta, Crc32(meta));
  return WriteFileAtomic(options_.dir, MetaPath(log_id), meta, options_.sync);
}

Status ObjectStore::Fence(uint64_t log_id, Log& log, uint64_t epoch) {
  if (epoch == 0) return Status::OK();
  if (epoch < log.epoch) {
    return Status(Code::kStaleEpoch,
                  "log " + std::to_string(log_id) + " fenced at epoch " +
                      std::to_string(log.epoch) + ", caller has " +
                      std::to_string(epoch));
  }
  if (epoch > log.epoch) {
    uint64_t prev = log.epoch;
    log.epoch = epoch;
    Status s = WriteMeta(log_id, log);
    if (!s.ok()) {
      log.epoch = prev;
      return s;
    }
    log.meta_written = true;
  }
  return Status::OK();
}

Result<uint64_t> ObjectStore::AppendLog(uint64_t log_id, uint64_t epoch,
                                        std::string_view record) {
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Log> log, GetLog(log_id, true));
  std::lock_guard<std::mutex> l(log->mu);
  DLSM_RETURN_IF_ERROR(Fence(log_id, *log, epoch));
  DLSM_RETURN_IF_ERROR(Reserve(record.size(), &log_bytes_));
  uint64_t lsn = log->next_lsn;
  if (options_.tier == Tier::kDisk) {
    if (log->active_fd < 0 || log->segments.empty() ||
        log->segments.back().bytes >= options_.log_segment_bytes) {
      if (log->active_fd >= 0) ::close(log->active_fd);
      uint64_t number = log->segments.empty() ? 0 : log->segments.back().number;
      if (!log->segments.empty() &&
          log->segments.back().bytes >= options_.log_segment_bytes) {
        ++number;
      }
      if (log->segments.empty() || log->segments.back().number != number) {
        log->segments.push_back(Log::Segment{number, 0, 0});
      }
      std::string path = SegmentPath(log_id, number);
      log->active_fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
      if (log->active_fd < 0) {
        log_bytes_ -= record.size();
        return PosixError("open " + path);
      }
      if (options_.sync) {
        Status s = SyncDir(options_.dir);
        if (!s.ok()) {
          log_bytes_ -= record.size();
          return s;
        }
      }
    }
    std::string buf;
    std::string check;
    PutFixed64(&check, lsn);
    check.append(record);
    PutFixed64(&buf, lsn);
    PutFixed32(&buf, static_cast<uint32_t>(record.size()));
    PutFixed32(&buf, Crc32(check));
    buf.append(record);
    Status s = WriteFully(log->active_fd, buf);
    if (s.ok() && options_.sync && ::fdatasync(log->active_fd) != 0) {
      s = PosixError("fdatasync log");
    }
    if (!s.ok()) {
      log_bytes_ -= record.size();
      // Drop the descriptor so the next append starts from a known offset.
      ::close(log->active_fd);
      log->active_fd = -1;
      return s;
    }
    log->segments.back().bytes += buf.size();
    log->segments.back().max_lsn = lsn;
  }
  log->records[lsn] = std::string(record);
  log->next_lsn = lsn + 1;
  return lsn;
}

Result<std::vector<LogRecord>> ObjectStore::ReadLog(uint64_t log_id,
                                                    uint64_t from_lsn,
                                                    uint64_t epoch,
                                                    size_t max_bytes,
                                                    bool* more) {
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Log> log, GetLog(log_id, epoch != 0));
  std::lock_guard<std::mutex> l(log->mu);
  DLSM_RETURN_IF_ERROR(Fence(log_id, *log, epoch));
  std::vector<LogRecord> out;
  size_t bytes = 0;
  if (more != nullptr) *more = false;
  for (auto it = log->records.lower_bound(from_lsn); it != log->records.end();
       ++it) {
    if (!out.empty() && bytes + it->second.size() > max_bytes) {
      if (more != nullptr) *more = true;
      break;
    }
    bytes += it->second.size();
    out.push_back(LogRecord{it->first, it->second});
  }
  return out;
}

Status ObjectStore::TruncateLog(uint64_t log_id, uint64_t upto_lsn,
                                uint64_t epoch) {
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Log> log, GetLog(log_id, false));
  std::lock_guard<std::mutex> l(log->mu);
  DLSM_RETURN_IF_ERROR(Fence(log_id, *log, epoch));
  if (upto_lsn <= log->truncated_upto) return Status::OK();
  uint64_t prev = log->truncated_upto;
  log->truncated_upto = upto_lsn;
  Status s = WriteMeta(log_id, *log);
  if (!s.ok()) {
    log->truncated_upto = prev;
    return s;
  }
  for (auto it = log->records.begin();
       it != log->records.end() && it->first <= upto_lsn;) {
    log_bytes_ -= it->second.size();
    it = log->records.erase(it);
  }
  log->next_lsn = std::max(log->next_lsn, upto_lsn + 1);
  if (options_.tier == Tier::kDisk) {
    // Whole segments at or below the cut are reclaimed. If that includes
    // the active segment, numbering continues with a fresh one.
    std::vector<Log::Segment> keep;
    for (size_t i = 0; i < log->segments.size(); ++i) {
      const Log::Segment& seg = log->segments[i];
      bool last = i + 1 == log->segments.size();
      if (seg.max_lsn > upto_lsn || (last && seg.bytes == 0)) {
        keep.push_back(seg);
        continue;
      }
      if (last) {
        if (log->active_fd >= 0) ::close(log->active_fd);
        log->active_fd = -1;
        keep.push_back(Log::Segment{seg.number + 1, 0, 0});
      }
      ::unlink(SegmentPath(log_id, seg.number).c_str());
    }
    log->segments = std::move(keep);
  }
  return Status::OK();
}

Result<uint64_t> ObjectStore::LogTail(uint64_t log_id) {
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<Log> log, GetLog(log_id, false));
  std::lock_guard<std::mutex> l(log->mu);
  return log->next_lsn - 1;
}

std::vector<uint64_t> ObjectStore::ListLogs() {
  std::lock_guard<std::mutex> l(logs_mu_);
  std::vector<uint64_t> out;
  for (const auto& [id, log] : logs_) out.push_back(id);
  return out;
}

}  // namespace dlsm
