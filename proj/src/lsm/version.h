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

#ifndef DLSM_LSM_VERSION_H_
#define DLSM_LSM_VERSION_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "common/coding.h"
#include "lsm/sstable.h"

namespace dlsm {

// A table as the level structure sees it: where it lives and what it covers.
struct SstHandle {
  ObjectId id;
  std::string stoc;  // endpoint of the StoC holding the object
  SstSummary summary;

  friend bool operator==(const SstHandle&, const SstHandle&) = default;
};

// Leveled policy knobs.
struct LevelPolicy {
  int l0_trigger = 4;
  int size_ratio = 10;
  uint64_t level1_target_bytes = 16ull << 20;
  int num_levels = 7;

  uint64_t TargetBytes(int level) const;
};

// Per-range level structure. Level 0 is ordered newest first and may
// overlap; every deeper level is sorted by min_key and disjoint.
struct LevelMetadata {
  std::vector<std::vector<SstHandle>> levels;
  // Round-robin cursor per level: max_key of the last file picked.
  std::vector<std::string> compact_pointer;

  explicit LevelMetadata(int num_levels = 7)
      : levels(num_levels), compact_pointer(num_levels) {}

  void AddL0(SstHandle h);
  uint64_t LevelBytes(int level) const;
  size_t NumFiles() const;
  std::vector<SstHandle> AllFiles() const;
  bool Empty() const { return NumFiles() == 0; }

  // Structural invariants: deeper levels sorted and non-overlapping, L0
  // ordered by descending max_seq.
  Status CheckInvariants() const;

  friend bool operator==(const LevelMetadata&, const LevelMetadata&) = default;
};

struct CompactionInput {
  int level = 0;
  SstHandle handle;
};

struct CompactionPick {
  int source_level = 0;
  int target_level = 1;
  std::vector<CompactionInput> inputs;
  bool purge_tombstones = false;
};

// Chooses the next compaction, or nothing when no level is over its
// trigger. Files in `pending` belong to in-flight jobs and are never picked
// again; while any L0 job is in flight no new L0 job is started.
std::optional<CompactionPick> PickCompaction(
    const LevelMetadata& levels, const LevelPolicy& policy,
    const std::set<ObjectId>& pending, bool l0_job_pending);

// Replaces `inputs` with `outputs` at target_level and re-checks the level
// invariants. Fails without modifying anything if an input is missing.
// Advances the source level's round-robin cursor.
Status ApplyCompactionEdit(LevelMetadata* levels,
                           const std::vector<CompactionInput>& inputs,
                           int target_level,
                           const std::vector<SstHandle>& outputs);

// Wire/manifest encoding of table handles.
void EncodeSstSummary(std::string* out, const SstSummary& s);
Status DecodeSstSummary(Decoder* d, SstSummary* s);
void EncodeSstHandle(std::string* out, const SstHandle& h);
Status DecodeSstHandle(Decoder* d, SstHandle* h);

bool RangesOverlap(const std::string& a_min, const std::string& a_max,
                   const std::string& b_min, const std::string& b_max);

}  // namespace dlsm

#endif  // DLSM_LSM_VERSION_H_
