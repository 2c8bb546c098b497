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

#include "lsm/memtable.h"

namespace dlsm {

bool Memtable::WouldOverflow(std::string_view key,
                             std::string_view value) const {
  if (entries_.empty()) return false;
  size_t next = approx_bytes_ + EntryCharge(key, value);
  auto it = entries_.find(key);
  if (it != entries_.end()) next -= EntryCharge(key, it->second.value);
  return next > flush_threshold_bytes_;
}

Status Memtable::Put(std::string_view key, SeqNo seq, ValueType type,
                     std::string_view value) {
  if (state_ != State::kActive) {
    return Status(Code::kImmutableMemtable, "memtable is immutable");
  }
  if (seq <= max_seq_ && !entries_.empty()) {
    return Status(Code::kSeqRegression, "sequence number did not increase");
  }
  if (type == ValueType::kTombstone) value = {};
  if (WouldOverflow(key, value)) {
    return Status(Code::kMemtableFull, "flush threshold reached");
  }
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(std::string(key), Slot{seq, type, std::string(value)});
  } else {
    approx_bytes_ -= EntryCharge(key, it->second.value);
    it->second = Slot{seq, type, std::string(value)};
  }
  approx_bytes_ += EntryCharge(key, value);
  if (min_seq_ == 0) min_seq_ = seq;
  max_seq_ = seq;
  return Status::OK();
}

std::optional<VersionedValue> Memtable::Get(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return VersionedValue{it->second.seq, it->second.type, it->second.value};
}

std::vector<Entry> Memtable::Entries() const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& [k, slot] : entries_) {
    out.push_back(Entry{k, slot.seq, slot.type, slot.value});
  }
  return out;
}

std::vector<Entry> Memtable::EntriesInRange(std::string_view lower,
                                            std::string_view upper) const {
  std::vector<Entry> out;
  for (auto it = entries_.lower_bound(lower); it != entries_.end(); ++it) {
    if (!upper.empty() && std::string_view(it->first) >= upper) break;
    out.push_back(Entry{it->first, it->second.seq, it->second.type,
                        it->second.value});
  }
  return out;
}

}  // namespace dlsm
