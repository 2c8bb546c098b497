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

#ifndef DLSM_LSM_MEMTABLE_H_
#define DLSM_LSM_MEMTABLE_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsm/types.h"

namespace dlsm {

// In-memory write buffer for one range. Holds at most one version per key.
//
// Not internally synchronized: while Active, callers serialize access.
// Once MarkImmutable() has been called the table is read-only and may be
// shared freely between threads.
class Memtable {
 public:
  enum class State { kActive, kImmutable };

  explicit Memtable(size_t flush_threshold_bytes)
      : flush_threshold_bytes_(flush_threshold_bytes) {}

  Memtable(const Memtable&) = delete;
  Memtable& operator=(const Memtable&) = delete;

  // Inserts a version. Fails with MemtableFull, without inserting, when the
  // insert would push approx_bytes past the flush threshold; the caller is
  // expected to rotate and retry on a fresh memtable. An empty memtable
  // always accepts one entry so oversized records still make progress.
  Status Put(std::string_view key, SeqNo seq, ValueType type,
             std::string_view value);

  // True when Put(key, value) would be rejected with MemtableFull.
  bool WouldOverflow(std::string_view key, std::string_view value) const;

  std::optional<VersionedValue> Get(std::string_view key) const;

  void MarkImmutable() { state_ = State::kImmutable; }

  State state() const { return state_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  size_t approx_bytes() const { return approx_bytes_; }
  SeqNo max_seq() const { return max_seq_; }
  SeqNo min_seq() const { return min_seq_; }

  // Sorted snapshot of all entries (key ascending).
  std::vector<Entry> Entries() const;

  // Sorted entries with lower <= key < upper. An empty upper means
  // unbounded.
  std::vector<Entry> EntriesInRange(std::string_view lower,
                                    std::string_view upper) const;

  static size_t EntryCharge(std::string_view key, std::string_view value) {
    return key.size() + value.size() + kPerEntryOverhead;
  }

 private:
  static constexpr size_t kPerEntryOverhead = 24;

  struct Slot {
    SeqNo seq;
    ValueType type;
    std::string value;
  };

  size_t flush_threshold_bytes_;
  std::map<std::string, Slot, std::less<>> entries_;
  size_t approx_bytes_ = 0;
  SeqNo max_seq_ = 0;
  SeqNo min_seq_ = 0;
  State state_ = State::kActive;
};

}  // namespace dlsm

#endif  // DLSM_LSM_MEMTABLE_H_
