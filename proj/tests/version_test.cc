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

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace dlsm {
namespace {

std::string K(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "k%05d", i);
  return buf;
}

SstHandle H(uint64_t file_no, int lo, int hi, uint64_t size = 1000,
            SeqNo max_seq = 0) {
  SstHandle h;
  h.id = ObjectId{1, file_no};
  h.stoc = "stoc-0";
  h.summary.min_key = K(lo);
  h.summary.max_key = K(hi);
  h.summary.file_size = size;
  h.summary.max_seq = max_seq == 0 ? file_no : max_seq;
  h.summary.min_seq = h.summary.max_seq;
  h.summary.entry_count = 1;
  return h;
}

TEST(PickCompactionTest, FreshRangeHasNothingToDo) {
  LevelMetadata lm;
  EXPECT_FALSE(PickCompaction(lm, LevelPolicy{}, {}, false).has_value());
}

TEST(PickCompactionTest, BelowL0TriggerNothing) {
  LevelMetadata lm;
  for (uint64_t f = 1; f <= 3; ++f) lm.AddL0(H(f, 0, 10));
  EXPECT_FALSE(PickCompaction(lm, LevelPolicy{}, {}, false).has_value());
}

TEST(PickCompactionTest, FourL0FilesPlusOverlappingL1) {
  LevelMetadata lm;
  lm.levels[1] = {H(100, 0, 5), H(101, 20, 30), H(102, 50, 60)};
  lm.AddL0(H(1, 1, 3));
  lm.AddL0(H(2, 2, 8));
  lm.AddL0(H(3, 25, 26));
  lm.AddL0(H(4, 4, 4));
  auto pick = PickCompaction(lm, LevelPolicy{}, {}, false);
  ASSERT_TRUE(pick.has_value());
  EXPECT_EQ(pick->source_level, 0);
  EXPECT_EQ(pick->target_level, 1);
  std::set<uint64_t> ids;
  for (const auto& in : pick->inputs) ids.insert(in.handle.id.file_no);
  // Hull of L0 is [k1, k26]: overlaps files 100 and 101 but not 102.
  EXPECT_EQ(ids, (std::set<uint64_t>{1, 2, 3, 4, 100, 101}));
  EXPECT_TRUE(pick->purge_tombstones);
}

TEST(PickCompactionTest, PurgeOnlyAtBottomNonEmptyLevel) {
  LevelMetadata lm;
  lm.levels[3] = {H(200, 0, 100)};
  for (uint64_t f = 1; f <= 4; ++f) lm.AddL0(H(f, 0, 10));
  auto pick = PickCompaction(lm, LevelPolicy{}, {}, false);
  ASSERT_TRUE(pick.has_value());
  EXPECT_FALSE(pick->purge_tombstones);
}

TEST(PickCompactionTest, PendingL0JobBlocksAnotherL0Job) {
  LevelMetadata lm;
  for (uint64_t f = 1; f <= 8; ++f) lm.AddL0(H(f, 0, 10));
  EXPECT_FALSE(PickCompaction(lm, LevelPolicy{}, {}, true).has_value());
}

TEST(PickCompactionTest, PendingOverlapBlocksJob) {
  LevelMetadata lm;
  lm.levels[1] = {H(100, 0, 50)};
  for (uint64_t f = 1; f <= 4; ++f) lm.AddL0(H(f, 0, 10));
  std::set<ObjectId> pending = {ObjectId{1, 100}};
  EXPECT_FALSE(PickCompaction(lm, LevelPolicy{}, pending, false).has_value());
}

TEST(PickCompactionTest, OversizedLevelRoundRobin) {
  LevelPolicy policy;
  policy.level1_target_bytes = 2500;
  LevelMetadata lm;
  lm.levels[1] = {H(10, 0, 9), H(11, 10, 19), H(12, 20, 29)};
  lm.levels[2] = {H(20, 5, 12)};
  auto pick = PickCompaction(lm, policy, {}, false);
  ASSERT_TRUE(pick.has_value());
  EXPECT_EQ(pick->source_level, 1);
  EXPECT_EQ(pick->target_level, 2);
  ASSERT_EQ(pick->inputs.size(), 2u);
  EXPECT_EQ(pick->inputs[0].handle.id.file_no, 10u);
  EXPECT_EQ(pick->inputs[1].handle.id.file_no, 20u);

  // After applying, the cursor moves past k00012 (hull max of the inputs
  // at the source level is k00009), so the next pick starts at file 11.
  SstHandle out = H(30, 0, 12, 1500);
  ASSERT_TRUE(ApplyCompactionEdit(&lm, pick->inputs, 2, {out}).ok());
  EXPECT_EQ(lm.compact_pointer[1], K(9));
  lm.levels[1].push_back(H(13, 30, 39));
  auto next = PickCompaction(lm, policy, {}, false);
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(next->inputs[0].handle.id.file_no, 11u);
}

TEST(ApplyCompactionEditTest, SwapsInputsForOutputs) {
  LevelMetadata lm;
  lm.levels[1] = {H(100, 0, 5)};
  for (uint64_t f = 1; f <= 4; ++f) lm.AddL0(H(f, 0, 10));
  auto pick = PickCompaction(lm, LevelPolicy{}, {}, false);
  ASSERT_TRUE(pick.has_value());
  std::vector<SstHandle> outs = {H(50, 0, 4, 1000, 4), H(51, 5, 10, 1000, 4)};
  ASSERT_TRUE(ApplyCompactionEdit(&lm, pick->inputs, 1, outs).ok());
  EXPECT_TRUE(lm.levels[0].empty());
  ASSERT_EQ(lm.levels[1].size(), 2u);
  EXPECT_TRUE(lm.CheckInvariants().ok());
}

TEST(ApplyCompactionEditTest, MissingInputLeavesMetadataUntouched) {
  LevelMetadata lm;
  lm.AddL0(H(1, 0, 10));
  LevelMetadata before = lm;
  std::vector<CompactionInput> inputs = {{0, H(1, 0, 10)}, {0, H(9, 0, 10)}};
  EXPECT_EQ(ApplyCompactionEdit(&lm, inputs, 1, {H(50, 0, 10)}).code(),
            Code::kNotFound);
  EXPECT_EQ(lm, before);
}

TEST(ApplyCompactionEditTest, OverlappingOutputRejected) {
  LevelMetadata lm;
  lm.levels[1] = {H(100, 0, 5)};
  lm.AddL0(H(1, 20, 30));
  LevelMetadata before = lm;
  std::vector<CompactionInput> inputs = {{0, H(1, 20, 30)}};
  EXPECT_EQ(ApplyCompactionEdit(&lm, inputs, 1, {H(50, 3, 30)}).code(),
            Code::kCorruption);
  EXPECT_EQ(lm, before);
}

// Independent model of the leveled rule over an integer key space: a level
// is a set of (lo, hi, size) intervals; overlap is computed by enumerating
// covered integers rather than by comparing endpoints.
struct ModelFile {
  uint64_t id;
  int lo, hi;
  uint64_t size;
};

std::set<int> Covered(const std::vector<ModelFile>& files) {
  std::set<int> out;
  for (const auto& f : files)
    for (int k = f.lo; k <= f.hi; ++k) out.insert(k);
  return out;
}

TEST(PickCompactionTest, TraceMatchesModel) {
  std::mt19937_64 rng(2024);
  LevelPolicy policy;
  policy.level1_target_bytes = 6000;
  policy.num_levels = 4;
  LevelMetadata lm(4);
  std::vector<std::vector<ModelFile>> model(4);
  uint64_t next_id = 1;
  int jobs = 0;
  for (int step = 0; step < 400; ++step) {
    int lo = static_cast<int>(rng() % 200);
    int hi = lo + static_cast<int>(rng() % 30);
    uint64_t size = 500 + rng() % 1000;
    uint64_t id = next_id++;
    lm.AddL0(H(id, lo, hi, size, id));
    model[0].insert(model[0].begin(), ModelFile{id, lo, hi, size});

    auto pick = PickCompaction(lm, policy, {}, false);

    // Model expectation: L0 has >= 4 files, or a level's bytes exceed its
    // target; score order picks the larger ratio.
    double l0_score = model[0].size() / 4.0;
    double best = l0_score >= 1.0 ? l0_score : 0;
    int best_level = l0_score >= 1.0 ? 0 : -1;
    for (int l = 1; l < 3; ++l) {
      uint64_t bytes = 0;
      for (auto& f : model[l]) bytes += f.size;
      double score = static_cast<double>(bytes) / policy.TargetBytes(l);
      if (score > 1.0 && score > best) {
        best = score;
        best_level = l;
      }
    }
    ASSERT_EQ(pick.has_value(), best_level >= 0) << "step " << step;
    if (!pick) continue;
    ASSERT_EQ(pick->source_level, best_level);
    ++jobs;

    std::vector<ModelFile> src;
    if (best_level == 0) {
      src = model[0];
    } else {
      uint64_t first = pick->inputs[0].handle.id.file_no;
      for (auto& f : model[best_level])
        if (f.id == first) src.push_back(f);
      ASSERT_EQ(src.size(), 1u);
    }
    int hull_lo = 1 << 30, hull_hi = -1;
    for (auto& f : src) {
      hull_lo = std::min(hull_lo, f.lo);
      hull_hi = std::max(hull_hi, f.hi);
    }
    std::set<int> hull;
    for (int k = hull_lo; k <= hull_hi; ++k) hull.insert(k);
    std::set<uint64_t> expect_ids;
    for (auto& f : src) expect_ids.insert(f.id);
    for (auto& f : model[best_level + 1]) {
      auto cov = Covered({f});
      bool overlap = false;
      for (int k : cov) overlap |= hull.count(k) > 0;
      if (overlap) expect_ids.insert(f.id);
    }
    std::set<uint64_t> got_ids;
    for (auto& in : pick->inputs) got_ids.insert(in.handle.id.file_no);
    ASSERT_EQ(got_ids, expect_ids) << "step " << step;

    // Synthetic compaction: one output spanning the inputs, 90% of size.
    int out_lo = 1 << 30, out_hi = -1;
    uint64_t out_size = 0;
    for (auto& in : pick->inputs) {
      out_lo = std::min(out_lo, std::stoi(in.handle.summary.min_key.substr(1)));
      out_hi = std::max(out_hi, std::stoi(in.handle.summary.max_key.substr(1)));
      out_size += in.handle.summary.file_size;
    }
    out_size = out_size * 9 / 10;
    uint64_t out_id = next_id++;
    ASSERT_TRUE(ApplyCompactionEdit(&lm, pick->inputs, pick->target_level,
                                    {H(out_id, out_lo, out_hi, out_size, out_id)})
                    .ok());
    for (int l = 0; l < 4; ++l) {
      std::erase_if(model[l], [&](const ModelFile& f) { return got_ids.count(f.id); });
    }
    model[pick->target_level].push_back(ModelFile{out_id, out_lo, out_hi, out_size});
    ASSERT_TRUE(lm.CheckInvariants().ok());
  }
  EXPECT_GT(jobs, 50);
}

}  // namespace
}  // namespace dlsm
