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

#ifndef DLSM_LSM_COMPACTION_H_
#define DLSM_LSM_COMPACTION_H_

#include <span>
#include <vector>

#include "lsm/memtable.h"
#include "lsm/sstable.h"

namespace dlsm {

struct CompactOptions {
  // Drop tombstones that survive the merge. Only safe when the output goes
  // to the bottom non-empty level.
  bool purge_tombstones = false;
  size_t max_output_bytes = 4 << 20;
  SstOptions sst;
};

struct CompactOutput {
  std::vector<EncodedSst> tables;
  uint64_t input_entries = 0;
  uint64_t output_entries = 0;
};

// Merges the inputs, keeping only the newest version of every key, and
// splits the result into tables no larger than max_output_bytes. The output
// is a pure function of (inputs, options): repeated calls produce
// byte-identical tables. A (key, seq) pair present in two inputs is
// reported as Corruption.
Result<CompactOutput> Compact(std::span<const SstContents> inputs,
                              const CompactOptions& options);

// Same merge over already-sorted entry runs.
Result<CompactOutput> CompactRuns(
    std::span<const std::vector<Entry>* const> runs,
    const CompactOptions& options);

// Encodes an immutable memtable as one table. Tombstones are kept: a
// flush never purges.
Result<EncodedSst> FlushMemtable(const Memtable& mt,
                                 const SstOptions& options = {});

}  // namespace dlsm

#endif  // DLSM_LSM_COMPACTION_H_
