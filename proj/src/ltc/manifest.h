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

#ifndef DLSM_LTC_MANIFEST_H_
#define DLSM_LTC_MANIFEST_H_

#include <map>
#include <string>
#include <vector>

#include "lsm/version.h"

namespace dlsm {

// Half-open key interval [lower, upper) owned at `epoch`. An empty upper
// bound means +infinity.
struct RangeDescriptor {
  uint32_t range_id = 0;
  std::string lower;
  std::string upper;
  uint64_t epoch = 0;

  bool Contains(std::string_view key) const {
    return key >= lower && (upper.empty() || key < upper);
  }

  void EncodeTo(std::string* out) const;
  static Status DecodeFrom(Decoder* d, RangeDescriptor* out);

  friend bool operator==(const RangeDescriptor&, const RangeDescriptor&) = default;
};

// Everything needed to serve a range besides the unflushed log tail.
// Persisted whole, as a StoC object on the range's home StoC
// (log_stocs[0]), every time it changes.
struct RangeManifest {
  uint32_t range_id = 0;
  uint64_t epoch = 0;
  uint64_t version = 0;
  SeqNo last_flushed_seq = 0;
  uint64_t log_id = 0;
  std::vector<std::string> log_stocs;
  LevelMetadata levels;

  std::string Encode() const;
  static Result<RangeManifest> Decode(std::string_view bytes);

  // ObjectId -> StoC for every live table.
  std::map<ObjectId, std::string> Placements() const;

  friend bool operator==(const RangeManifest&, const RangeManifest&) = default;
};

inline constexpr uint32_t kManifestMagic = 0x464D4C44;  // "DLMF"

// Object numbering. Three disjoint families share a range's file_no space:
//   flush output       (epoch << 32) | counter          bits 62, 63 clear
//   compaction output  1<<62 | epoch << 40 | job << 16 | index
//   manifest           1<<63 | epoch << 32 | version
// Ordering by file_no within the manifest family orders by (epoch, version).
uint64_t FlushFileNo(uint64_t epoch, uint64_t counter);
uint64_t CompactionJobId(uint64_t epoch, uint64_t counter);
ObjectId ManifestObjectId(uint32_t range_id, uint64_t epoch, uint64_t version);
bool IsManifestObject(ObjectId id);
// Epoch of the owner that created the object.
uint64_t ObjectEpoch(ObjectId id);

// One logged write.
struct LogEntry {
  uint32_t range_id = 0;
  SeqNo seq = 0;
  ValueType type = ValueType::kValue;
  std::string key;
  std::string value;

  std::string Encode() const;
  static Result<LogEntry> Decode(std::string_view bytes);

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

// Per-range request rates an LTC sends to the coordinator.
struct LoadReport {
  std::string ltc;
  std::vector<std::pair<uint32_t, double>> ops_per_sec;

  std::string Encode() const;
  static Result<LoadReport> Decode(std::string_view bytes);

  friend bool operator==(const LoadReport&, const LoadReport&) = default;
};

bool IsCompactionObject(ObjectId id);

}  // namespace dlsm

#endif  // DLSM_LTC_MANIFEST_H_
