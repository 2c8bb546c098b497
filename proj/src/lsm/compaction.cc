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

#include "lsm/compaction.h"

#include <queue>

namespace dlsm {

namespace {

struct Cursor {
  const std::vector<Entry>* run;
  size_t pos;
  const Entry& entry() const { return (*run)[pos]; }
};

struct CursorAfter {
  bool operator()(const Cursor& a, const Cursor& b) const {
    // priority_queue is a max-heap; invert so the smallest entry is on top.
    return EntryBefore(b.entry(), a.entry());
  }
};

}  // namespace

Result<CompactOutput> CompactRuns(
    std::span<const std::vector<Entry>* const> runs,
    const CompactOptions& options) {
  CompactOutput out;
  std::priority_queue<Cursor, std::vector<Cursor>, CursorAfter> heap;
  for (const auto* run : runs) {
    out.input_entries += run->size();
    if (!run->empty()) heap.push(Cursor{run, 0});
  }

  SstBuilder builder(options.sst);
  auto emit = [&](const Entry& e) -> Status {
    if (!builder.empty() && builder.SizeIfAdded(e) > options.max_output_bytes) {
      DLSM_ASSIGN_OR_RETURN(EncodedSst t, builder.Finish());
      out.tables.push_back(std::move(t));
      builder = SstBuilder(options.sst);
    }
    if (builder.empty() && builder.SizeIfAdded(e) > options.max_output_bytes) {
      return InvalidArgumentError("entry larger than max_output_bytes");
    }
    ++out.output_entries;
    return builder.Add(e);
  };

  const Entry* prev = nullptr;
  while (!heap.empty()) {
    Cursor c = heap.top();
    heap.pop();
    const Entry& e = c.entry();
    if (prev != nullptr && prev->key == e.key) {
      if (prev->seq == e.seq) {
        return CorruptionError("duplicate (key, seq) across compaction inputs");
      }
      // Older version of a key already decided.
    } else if (!(e.is_tombstone() && options.purge_tombstones)) {
      DLSM_RETURN_IF_ERROR(emit(e));
    }
    prev = &e;
    if (c.pos + 1 < c.run->size()) {
      const Entry& next = (*c.run)[c.pos + 1];
      if (!EntryBefore(e, next)) {
        return CorruptionError("compaction input not sorted");
      }
      heap.push(Cursor{c.run, c.pos + 1});
    }
  }
  if (!builder.empty()) {
    DLSM_ASSIGN_OR_RETURN(EncodedSst t, builder.Finish());
    out.tables.push_back(std::move(t));
  }
  return out;
}

Result<CompactOutput> Compact(std::span<const SstContents> inputs,
                              const CompactOptions& options) {
  if (inputs.empty()) return InvalidArgumentError("no compaction inputs");
  std::vector<const std::vector<Entry>*> runs;
  runs.reserve(inputs.size());
  for (const auto& in : inputs) runs.push_back(&in.entries);
  return CompactRuns(runs, options);
}

Result<EncodedSst> FlushMemtable(const Memtable& mt,
                                 const SstOptions& options) {
  if (mt.state() != Memtable::State::kImmutable) {
    return InvalidArgumentError("only immutable memtables can be flushed");
  }
  if (mt.empty()) return Status(Code::kEmptyMemtable, "memtable is empty");
  std::vector<Entry> entries = mt.Entries();
  return EncodeSst(entries, options);
}

}  // namespace dlsm
