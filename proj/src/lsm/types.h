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

#ifndef DLSM_LSM_TYPES_H_
#define DLSM_LSM_TYPES_H_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "common/status.h"

namespace dlsm {

using SeqNo = uint64_t;

inline constexpr size_t kMaxKeyBytes = 4096;
inline constexpr size_t kMaxValueBytes = 1 << 20;

enum class ValueType : uint8_t {
  kValue = 0,
  kTombstone = 1,
};

// One versioned record. Entries sort by key ascending, then by sequence
// number descending, so the newest version of a key comes first.
struct Entry {
  std::string key;
  SeqNo seq = 0;
  ValueType type = ValueType::kValue;
  std::string value;

  bool is_tombstone() const { return type == ValueType::kTombstone; }

  friend bool operator==(const Entry&, const Entry&) = default;
};

inline bool EntryBefore(std::string_view a_key, SeqNo a_seq,
                        std::string_view b_key, SeqNo b_seq) {
  int c = a_key.compare(b_key);
  if (c != 0) return c < 0;
  return a_seq > b_seq;
}

inline bool EntryBefore(const Entry& a, const Entry& b) {
  return EntryBefore(a.key, a.seq, b.key, b.seq);
}

// A lookup result: the newest visible version of a key.
struct VersionedValue {
  SeqNo seq = 0;
  ValueType type = ValueType::kValue;
  std::string value;

  bool is_tombstone() const { return type == ValueType::kTombstone; }
  friend bool operator==(const VersionedValue&,
                         const VersionedValue&) = default;
};

Status ValidateKey(std::string_view key);
Status ValidateValue(std::string_view value);

// Globally unique name of a stored object. file_no is allocated by the LTC
// that owns range_id; see FileNumbers in ltc/manifest.h for the layout.
struct ObjectId {
  uint32_t range_id = 0;
  uint64_t file_no = 0;

  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
  friend bool operator==(const ObjectId&, const ObjectId&) = default;

  std::string ToString() const;
};

struct ObjectIdHash {
  size_t operator()(const ObjectId& id) const {
    return static_cast<size_t>(id.file_no * 0x9e3779b97f4a7c15ULL ^
                               id.range_id);
  }
};

// Renders arbitrary bytes for humans: printable ASCII is kept, everything
// else is \xNN escaped.
std::string EscapeBytes(std::string_view bytes);

}  // namespace dlsm

#endif  // DLSM_LSM_TYPES_H_
