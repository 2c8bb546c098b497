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

#include "ltc/manifest.h"

#include <bit>

namespace dlsm {

void RangeDescriptor::EncodeTo(std::string* out) const {
  PutFixed32(out, range_id);
  PutBytes(out, lower);
  PutBytes(out, upper);
  PutFixed64(out, epoch);
}

Status RangeDescriptor::DecodeFrom(Decoder* d, RangeDescriptor* out) {
  DLSM_RETURN_IF_ERROR(d->GetFixed32(&out->range_id));
  DLSM_RETURN_IF_ERROR(d->GetBytes(&out->lower));
  DLSM_RETURN_IF_ERROR(d->GetBytes(&out->upper));
  return d->GetFixed64(&out->epoch);
}

std::string RangeManifest::Encode() const {
  std::string out;
  PutFixed32(&out, kManifestMagic);
  PutFixed32(&out, 1);
  PutFixed32(&out, range_id);
  PutFixed64(&out, epoch);
  PutFixed64(&out, version);
  PutFixed64(&out, last_flushed_seq);
  PutFixed64(&out, log_id);
  PutFixed32(&out, static_cast<uint32_t>(log_stocs.size()));
  for (const auto& s : log_stocs) PutBytes(&out, s);
  PutFixed32(&out, static_cast<uint32_t>(levels.levels.size()));
  for (size_t l = 0; l < levels.levels.size(); ++l) {
    PutFixed32(&out, static_cast<uint32_t>(levels.levels[l].size()));
    for (const auto& h : levels.levels[l]) EncodeSstHandle(&out, h);
    PutBytes(&out, levels.compact_pointer[l]);
  }
  PutFixed32(&out, Crc32(out));
  return out;
}

Result<RangeManifest> RangeManifest::Decode(std::string_view bytes) {
  if (bytes.size() < 8) return CorruptionError("manifest too short");
  uint32_t crc = DecodeFixed32(bytes.data() + bytes.size() - 4);
  if (Crc32(bytes.substr(0, bytes.size() - 4)) != crc) {
    return Status(Code::kChecksumMismatch, "manifest checksum mismatch");
  }
  Decoder d(bytes.substr(0, bytes.size() - 4));
  uint32_t magic = 0, format = 0, n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&magic));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&format));
  if (magic != kManifestMagic || format != 1) {
    return CorruptionError("not a manifest");
  }
  RangeManifest m;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&m.range_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&m.epoch));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&m.version));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&m.last_flushed_seq));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&m.log_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  m.log_stocs.resize(n);
  for (auto& s : m.log_stocs) DLSM_RETURN_IF_ERROR(d.GetBytes(&s));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  if (n == 0 || n > 64) return CorruptionError("bad level count");
  m.levels = LevelMetadata(static_cast<int>(n));
  for (uint32_t l = 0; l < n; ++l) {
    uint32_t files = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&files));
    m.levels.levels[l].resize(files);
    for (auto& h : m.levels.levels[l]) {
      DLSM_RETURN_IF_ERROR(DecodeSstHandle(&d, &h));
    }
    DLSM_RETURN_IF_ERROR(d.GetBytes(&m.levels.compact_pointer[l]));
  }
  if (!d.empty()) return CorruptionError("trailing bytes in manifest");
  return m;
}

std::map<ObjectId, std::string> RangeManifest::Placements() const {
  std::map<ObjectId, std::string> out;
  for (const auto& h : levels.AllFiles()) out[h.id] = h.stoc;
  return out;
}

uint64_t FlushFileNo(uint64_t epoch, uint64_t counter) {
  return (epoch << 32) | (counter & 0xFFFFFFFFull);
}

uint64_t CompactionJobId(uint64_t epoch, uint64_t counter) {
  return (1ull << 62) | ((epoch & 0x3FFFFF) << 40) |
         ((counter & 0xFFFFFF) << 16);
}

ObjectId ManifestObjectId(uint32_t range_id, uint64_t epoch, uint64_t version) {
  return ObjectId{range_id, (1ull << 63) | ((epoch & 0x7FFFFFFF) << 32) |
                                (version & 0xFFFFFFFFull)};
}

bool IsManifestObject(ObjectId id) { return (id.file_no >> 63) != 0; }

uint64_t ObjectEpoch(ObjectId id) {
  if (IsManifestObject(id)) return (id.file_no >> 32) & 0x7FFFFFFF;
  if ((id.file_no >> 62) & 1) return (id.file_no >> 40) & 0x3FFFFF;
  return id.file_no >> 32;
}

std::string LogEntry::Encode() const {
  std::string out;
  PutFixed32(&out, range_id);
  PutFixed64(&out, seq);
  PutFixed8(&out, static_cast<uint8_t>(type));
  PutBytes(&out, key);
  PutBytes(&out, value);
  return out;
}

Result<LogEntry> LogEntry::Decode(std::string_view bytes) {
  Decoder d(bytes);
  LogEntry e;
  uint8_t type = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&e.range_id));
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&e.seq));
  DLSM_RETURN_IF_ERROR(d.GetFixed8(&type));
  if (type > 1) return CorruptionError("bad log entry type");
  e.type = static_cast<ValueType>(type);
  DLSM_RETURN_IF_ERROR(d.GetBytes(&e.key));
  DLSM_RETURN_IF_ERROR(d.GetBytes(&e.value));
  if (!d.empty()) return CorruptionError("trailing bytes in log entry");
  return e;
}

bool IsCompactionObject(ObjectId id) { return (id.file_no >> 62) == 1; }

std::string LoadReport::Encode() const {
  std::string out;
  PutBytes(&out, ltc);
  PutFixed32(&out, static_cast<uint32_t>(ops_per_sec.size()));
  for (const auto& [range, ops] : ops_per_sec) {
    PutFixed32(&out, range);
    PutFixed64(&out, std::bit_cast<uint64_t>(ops));
  }
  return out;
}

Result<LoadReport> LoadReport::Decode(std::string_view bytes) {
  Decoder d(bytes);
  LoadReport r;
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetBytes(&r.ltc));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t range = 0;
    uint64_t bits = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&range));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&bits));
    r.ops_per_sec.emplace_back(range, std::bit_cast<double>(bits));
  }
  if (!d.empty()) return CorruptionError("trailing bytes in load report");
  return r;
}

}  // namespace dlsm
