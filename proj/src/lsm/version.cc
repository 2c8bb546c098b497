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

#include "lsm/version.h"

#include <algorithm>

namespace dlsm {

uint64_t LevelPolicy::TargetBytes(int level) const {
  uint64_t t = level1_target_bytes;
  for (int l = 1; l < level; ++l) t *= static_cast<uint64_t>(size_ratio);
  return t;
}

void EncodeSstSummary(std::string* out, const SstSummary& s) {
  PutBytes(out, s.min_key);
  PutBytes(out, s.max_key);
  PutFixed64(out, s.min_seq);
  PutFixed64(out, s.max_seq);
  PutFixed64(out, s.entry_count);
  PutFixed64(out, s.file_size);
}

Status DecodeSstSummary(Decoder* d, SstSummary* s) {
  DLSM_RETURN_IF_ERROR(d->GetBytes(&s->min_key));
  DLSM_RETURN_IF_ERROR(d->GetBytes(&s->max_key));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&s->min_seq));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&s->max_seq));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&s->entry_count));
  return d->GetFixed64(&s->file_size);
}

void EncodeSstHandle(std::string* out, const SstHandle& h) {
  PutFixed32(out, h.id.range_id);
  PutFixed64(out, h.id.file_no);
  PutBytes(out, h.stoc);
  EncodeSstSummary(out, h.summary);
}

Status DecodeSstHandle(Decoder* d, SstHandle* h) {
  DLSM_RETURN_IF_ERROR(d->GetFixed32(&h->id.range_id));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&h->id.file_no));
  DLSM_RETURN_IF_ERROR(d->GetBytes(&h->stoc));
  return DecodeSstSummary(d, &h->summary);
}

bool RangesOverlap(const std::string& a_min, const std::string& a_max,
                   const std::string& b_min, const std::string& b_max) {
  return !(a_max < b_min || b_max < a_min);
}

void LevelMetadata::AddL0(SstHandle h) {
  levels[0].insert(levels[0].begin(), std::move(h));
}

uint64_t LevelMetadata::LevelBytes(int level) const {
  uint64_t total = 0;
  for (const auto& h : levels[level]) total += h.summary.file_size;
  return total;
}

size_t LevelMetadata::NumFiles() const {
  size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

std::vector<SstHandle> LevelMetadata::AllFiles() const {
  std::vector<SstHandle> out;
  for (const auto& l : levels) out.insert(out.end(), l.begin(), l.end());
  return out;
}

Status LevelMetadata::CheckInvariants() const {
  for (size_t i = 1; i < levels[0].size(); ++i) {
    if (levels[0][i - 1].summary.max_seq < levels[0][i].summary.max_seq) {
      return CorruptionError("level 0 not ordered newest first");
    }
  }
  for (size_t l = 1; l < levels.size(); ++l) {
    const auto& files = levels[l];
    for (size_t i = 0; i < files.size(); ++i) {
      if (files[i].summary.max_key < files[i].summary.min_key) {
        return CorruptionError("table with inverted key range");
      }
      if (i > 0 && !(files[i - 1].summary.max_key < files[i].summary.min_key)) {
        return CorruptionError("overlapping tables in level " +
                               std::to_string(l));
      }
    }
  }
  return Status::OK();
}

namespace {

struct KeyHull {
  std::string min;
  std::string max;
};

KeyHull HullOf(const std::vector<CompactionInput>& inputs) {
  KeyHull h{inputs.front().handle.summary.min_key,
            inputs.front().handle.summary.max_key};
  for (const auto& in : inputs) {
    h.min = std::min(h.min, in.handle.summary.min_key);
    h.max = std::max(h.max, in.handle.summary.max_key);
  }
  return h;
}

// Adds the files of `level` overlapping the inputs' hull. Returns false if
// one of them is pending.
bool AddOverlapping(const LevelMetadata& lm, int level,
                    const std::set<ObjectId>& pending,
                    std::vector<CompactionInput>* inputs) {
  KeyHull hull = HullOf(*inputs);
  for (const auto& h : lm.levels[level]) {
    if (RangesOverlap(hull.min, hull.max, h.summary.min_key,
                      h.summary.max_key)) {
      if (pending.count(h.id)) return false;
      inputs->push_back(CompactionInput{level, h});
    }
  }
  return true;
}

bool DeeperLevelsEmpty(const LevelMetadata& lm, int level) {
  for (size_t l = static_cast<size_t>(level) + 1; l < lm.levels.size(); ++l) {
    if (!lm.levels[l].empty()) return false;
  }
  return true;
}

std::optional<CompactionPick> PickLevel0(const LevelMetadata& lm,
                                         const std::set<ObjectId>& pending) {
  CompactionPick pick;
  pick.source_level = 0;
  pick.target_level = 1;
  for (const auto& h : lm.levels[0]) pick.inputs.push_back({0, h});
  if (!AddOverlapping(lm, 1, pending, &pick.inputs)) return std::nullopt;
  pick.purge_tombstones = DeeperLevelsEmpty(lm, 1);
  return pick;
}

std::optional<CompactionPick> PickLevelN(const LevelMetadata& lm, int level,
                                         const std::set<ObjectId>& pending) {
  const auto& files = lm.levels[level];
  if (files.empty()) return std::nullopt;
  const std::string& cursor = lm.compact_pointer[level];
  size_t start = 0;
  if (!cursor.empty()) {
    while (start < files.size() && files[start].summary.min_key <= cursor) {
      ++start;
    }
    if (start == files.size()) start = 0;
  }
  for (size_t i = 0; i < files.size(); ++i) {
    const SstHandle& h = files[(start + i) % files.size()];
    if (pending.count(h.id)) continue;
    CompactionPick pick;
    pick.source_level = level;
    pick.target_level = level + 1;
    pick.inputs.push_back({level, h});
    if (!AddOverlapping(lm, level + 1, pending, &pick.inputs)) continue;
    pick.purge_tombstones = DeeperLevelsEmpty(lm, level + 1);
    return pick;
  }
  return std::nullopt;
}

}  // namespace

std::optional<CompactionPick> PickCompaction(const LevelMetadata& lm,
                                             const LevelPolicy& policy,
                                             const std::set<ObjectId>& pending,
                                             bool l0_job_pending) {
  std::optional<CompactionPick> best;
  double best_score = 0;
  auto consider = [&](double score, std::optional<CompactionPick> pick) {
    if (pick && score >= 1.0 && score > best_score) {
      best = std::move(pick);
      best_score = score;
    }
  };
  if (!l0_job_pending && !lm.levels[0].empty()) {
    double score = static_cast<double>(lm.levels[0].size()) /
                   static_cast<double>(policy.l0_trigger);
    if (score >= 1.0) consider(score, PickLevel0(lm, pending));
  }
  const int last = static_cast<int>(lm.levels.size()) - 1;
  for (int level = 1; level < last; ++level) {
    double score = static_cast<double>(lm.LevelBytes(level)) /
                   static_cast<double>(policy.TargetBytes(level));
    if (score > 1.0) consider(score, PickLevelN(lm, level, pending));
  }
  return best;
}

Status ApplyCompactionEdit(LevelMetadata* lm,
                           const std::vector<CompactionInput>& inputs,
                           int target_level,
                           const std::vector<SstHandle>& outputs) {
  if (target_level <= 0 ||
      target_level >= static_cast<int>(lm->levels.size())) {
    return InvalidArgumentError("bad target level");
  }
  LevelMetadata next = *lm;
  int source_level = target_level;
  std::string pointer;
  for (const auto& in : inputs) {
    if (in.level < 0 || in.level >= static_cast<int>(next.levels.size())) {
      return InvalidArgumentError("bad input level");
    }
    auto& files = next.levels[in.level];
    auto it = std::find_if(files.begin(), files.end(), [&](const SstHandle& h) {
      return h.id == in.handle.id;
    });
    if (it == files.end()) {
      return NotFoundError("compaction input " + in.handle.id.ToString() +
                           " not in level " + std::to_string(in.level));
    }
    files.erase(it);
    source_level = std::min(source_level, in.level);
    if (in.level == target_level - 1) {
      pointer = std::max(pointer, in.handle.summary.max_key);
    }
  }
  auto& target = next.levels[target_level];
  target.insert(target.end(), outputs.begin(), outputs.end());
  std::sort(target.begin(), target.end(),
            [](const SstHandle& a, const SstHandle& b) {
              return a.summary.min_key < b.summary.min_key;
            });
  if (source_level > 0 && source_level == target_level - 1) {
    next.compact_pointer[source_level] = pointer;
  }
  DLSM_RETURN_IF_ERROR(next.CheckInvariants());
  *lm = std::move(next);
  return Status::OK();
}

}  // namespace dlsm
