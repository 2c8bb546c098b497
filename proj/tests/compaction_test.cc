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

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"

namespace dlsm {
namespace {

SstContents Decoded(const std::vector<Entry>& entries) {
  auto sst = EncodeSst(entries);
  EXPECT_TRUE(sst.ok());
  auto c = DecodeSst(sst->bytes);
  EXPECT_TRUE(c.ok());
  return *c;
}

std::vector<Entry> AllEntries(const CompactOutput& out) {
  std::vector<Entry> all;
  for (const auto& t : out.tables) {
    auto c = DecodeSst(t.bytes);
    EXPECT_TRUE(c.ok()) << c.status().ToString();
    all.insert(all.end(), c->entries.begin(), c->entries.end());
  }
  return all;
}

TEST(CompactTest, OverwrittenKeyPurged) {
  std::vector<SstContents> in = {
      Decoded({Entry{"a", 2, ValueType::kValue, "y"}}),
      Decoded({Entry{"a", 1, ValueType::kValue, "x"}})};
  auto out = Compact(in, CompactOptions{});
  ASSERT_TRUE(out.ok());
  auto all = AllEntries(*out);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0], (Entry{"a", 2, ValueType::kValue, "y"}));
}

TEST(CompactTest, DeletedKeyPurgedAtBottom) {
  std::vector<SstContents> in = {
      Decoded({Entry{"a", 2, ValueType::kTombstone, ""}}),
      Decoded({Entry{"a", 1, ValueType::kValue, "x"}})};
  CompactOptions opts;
  opts.purge_tombstones = true;
  auto out = Compact(in, opts);
  ASSERT_TRUE(out.ok());
  EXPECT_TRUE(out->tables.empty());
  EXPECT_EQ(out->input_entries - out->output_entries, 2u);
}

TEST(CompactTest, TombstoneRetainedAboveBottom) {
  std::vector<SstContents> in = {
      Decoded({Entry{"a", 2, ValueType::kTombstone, ""}}),
      Decoded({Entry{"a", 1, ValueType::kValue, "x"}})};
  auto out = Compact(in, CompactOptions{});
  ASSERT_TRUE(out.ok());
  auto all = AllEntries(*out);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_TRUE(all[0].is_tombstone());
}

TEST(CompactTest, DuplicateKeySeqIsCorruption) {
  std::vector<SstContents> in = {
      Decoded({Entry{"a", 1, ValueType::kValue, "x"}}),
      Decoded({Entry{"a", 1, ValueType::kValue, "y"}})};
  EXPECT_EQ(Compact(in, CompactOptions{}).status().code(), Code::kCorruption);
}

TEST(CompactTest, NoInputsRejected) {
  EXPECT_FALSE(Compact({}, CompactOptions{}).ok());
}

// Three random tables of 1k entries each against the brute-force fold.
TEST(CompactTest, MatchesFoldOracle) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    SeqNo seq = 1;
    std::vector<std::vector<Entry>> runs;
    std::vector<SstContents> in;
    for (int i = 0; i < 3; ++i) {
      runs.push_back(testing::RandomRun(rng, 1000, 2000, &seq, 0.2));
      in.push_back(Decoded(runs.back()));
    }
    const bool purge = seed % 2 == 0;
    CompactOptions opts;
    opts.purge_tombstones = purge;
    opts.max_output_bytes = 8 << 10;
    auto out = Compact(in, opts);
    ASSERT_TRUE(out.ok());

    std::vector<Entry> expect;
    for (auto& [k, e] : testing::FoldNewest(runs)) {
      if (purge && e.is_tombstone()) continue;
      expect.push_back(e);
    }
    EXPECT_EQ(AllEntries(*out), expect);
    EXPECT_EQ(out->output_entries, expect.size());
  }
}

TEST(CompactTest, OutputsBoundedSortedAndDisjoint) {
  std::mt19937_64 rng(77);
  SeqNo seq = 1;
  std::vector<SstContents> in;
  for (int i = 0; i < 4; ++i) {
    in.push_back(Decoded(testing::RandomRun(rng, 2000, 50000, &seq)));
  }
  CompactOptions opts;
  opts.max_output_bytes = 16 << 10;
  auto out = Compact(in, opts);
  ASSERT_TRUE(out.ok());
  ASSERT_GT(out->tables.size(), 3u);
  for (size_t i = 0; i < out->tables.size(); ++i) {
    const auto& t = out->tables[i];
    EXPECT_LE(t.bytes.size(), opts.max_output_bytes);
    EXPECT_EQ(t.summary.file_size, t.bytes.size());
    if (i > 0) {
      EXPECT_LT(out->tables[i - 1].summary.max_key, t.summary.min_key);
    }
  }
}

TEST(CompactTest, Deterministic) {
  std::mt19937_64 rng(1234);
  SeqNo seq = 1;
  std::vector<SstContents> in;
  for (int i = 0; i < 5; ++i) {
    in.push_back(Decoded(testing::RandomRun(rng, 500, 1000, &seq, 0.3)));
  }
  CompactOptions opts;
  opts.max_output_bytes = 4 << 10;
  auto a = Compact(in, opts);
  auto b = Compact(in, opts);
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_EQ(a->tables.size(), b->tables.size());
  for (size_t i = 0; i < a->tables.size(); ++i) {
    EXPECT_EQ(a->tables[i].bytes, b->tables[i].bytes);
  }
}

// Reading any key from the output equals reading the newest version from
// the inputs, except for tombstones purged at the bottom.
TEST(CompactTest, SemanticsPreservingProperty) {
  for (uint64_t seed = 100; seed < 130; ++seed) {
    std::mt19937_64 rng(seed);
    SeqNo seq = 1;
    std::vector<std::vector<Entry>> runs;
    std::vector<SstContents> in;
    const int n_inputs = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n_inputs; ++i) {
      runs.push_back(testing::RandomRun(rng, 1 + rng() % 300, 400, &seq, 0.25));
      in.push_back(Decoded(runs.back()));
    }
    CompactOptions opts;
    opts.purge_tombstones = rng() % 2 == 0;
    opts.max_output_bytes = 2048 + rng() % 8192;
    auto out = Compact(in, opts);
    ASSERT_TRUE(out.ok());
    std::map<std::string, Entry> output;
    for (auto& e : AllEntries(*out)) output[e.key] = e;
    auto newest = testing::FoldNewest(runs);
    for (int k = 0; k < 400; ++k) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "k%06d", k);
      auto want = newest.find(buf);
      auto got = output.find(buf);
      if (want == newest.end() ||
          (opts.purge_tombstones && want->second.is_tombstone())) {
        EXPECT_TRUE(got == output.end()) << buf;
      } else {
        ASSERT_TRUE(got != output.end()) << buf;
        EXPECT_EQ(got->second, want->second);
      }
    }
  }
}

TEST(CompactTest, EntryLargerThanLimitRejected) {
  std::vector<SstContents> in = {
      Decoded({Entry{"a", 1, ValueType::kValue, std::string(5000, 'v')}})};
  CompactOptions opts;
  opts.max_output_bytes = 1024;
  EXPECT_EQ(Compact(in, opts).status().code(), Code::kInvalidArgument);
}

}  // namespace
}  // namespace dlsm
