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

#include "lsm/lookup.h"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "lsm/compaction.h"
#include "test_util.h"

namespace dlsm {
namespace {

// Minimal single-range tree assembled from the lsm building blocks.
class MiniTree {
 public:
  explicit MiniTree(size_t memtable_bytes, LevelPolicy policy = {})
      : memtable_bytes_(memtable_bytes), policy_(policy),
        levels_(policy.num_levels) {
    active_ = std::make_unique<Memtable>(memtable_bytes_);
  }

  void Put(const std::string& key, ValueType type, const std::string& value) {
    SeqNo seq = ++seq_;
    Status s = active_->Put(key, seq, type, value);
    if (s.code() == Code::kMemtableFull) {
      Flush();
      s = active_->Put(key, seq, type, value);
    }
    ASSERT_TRUE(s.ok()) << s.ToString();
  }

  void Flush() {
    if (active_->empty()) return;
    active_->MarkImmutable();
    auto sst = FlushMemtable(*active_, sst_options_);
    ASSERT_TRUE(sst.ok()) << sst.status().ToString();
    SstHandle h{ObjectId{0, ++file_no_}, "mem", sst->summary};
    store_[h.id] = std::make_shared<const std::string>(sst->bytes);
    levels_.AddL0(h);
    active_ = std::make_unique<Memtable>(memtable_bytes_);
    CompactAll();
  }

  void CompactAll() {
    while (auto pick = PickCompaction(levels_, policy_, {}, false)) {
      std::vector<SstContents> inputs;
      for (const auto& in : pick->inputs) {
        auto c = DecodeSst(*store_.at(in.handle.id));
        ASSERT_TRUE(c.ok());
        inputs.push_back(std::move(*c));
      }
      CompactOptions opts;
      opts.purge_tombstones = pick->purge_tombstones;
      opts.max_output_bytes = 8 << 10;
      opts.sst = sst_options_;
      auto out = Compact(inputs, opts);
      ASSERT_TRUE(out.ok()) << out.status().ToString();
      std::vector<SstHandle> outputs;
      for (auto& t : out->tables) {
        SstHandle h{ObjectId{0, ++file_no_}, "mem", t.summary};
        store_[h.id] = std::make_shared<const std::string>(t.bytes);
        outputs.push_back(h);
      }
      ASSERT_TRUE(ApplyCompactionEdit(&levels_, pick->inputs,
                                      pick->target_level, outputs)
                      .ok());
      for (const auto& in : pick->inputs) store_.erase(in.handle.id);
      ++compactions_;
    }
  }

  Result<std::optional<std::string>> Get(std::string_view key) {
    const Memtable* mts[] = {active_.get()};
    return RangeGet(levels_, mts, key, Opener());
  }

  Result<std::vector<KeyValue>> Scan(std::string_view lo, std::string_view hi,
                                     size_t limit) {
    std::vector<std::vector<Entry>> mts = {active_->EntriesInRange(lo, hi)};
    return TreeScan(levels_, std::move(mts), lo, hi, limit, Opener());
  }

  TableOpener Opener() {
    return [this](const SstHandle& h) -> Result<std::shared_ptr<TableReader>> {
      auto it = store_.find(h.id);
      if (it == store_.end()) return NotFoundError(h.id.ToString());
      ++opens_;
      return TableReader::Open(std::make_shared<StringSource>(it->second));
    };
  }

  const LevelMetadata& levels() const { return levels_; }
  int compactions() const { return compactions_; }
  int opens() const { return opens_; }

 private:
  size_t memtable_bytes_;
  LevelPolicy policy_;
  SstOptions sst_options_{512, 10};
  LevelMetadata levels_;
  std::unique_ptr<Memtable> active_;
  std::map<ObjectId, std::shared_ptr<const std::string>> store_;
  SeqNo seq_ = 0;
  uint64_t file_no_ = 0;
  int compactions_ = 0;
  int opens_ = 0;
};

TEST(LookupTest, MemtableShadowsTables) {
  MiniTree t(1 << 20);
  t.Put("a", ValueType::kValue, "old");
  t.Flush();
  t.Put("a", ValueType::kValue, "new");
  auto r = t.Get("a");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->value(), "new");
}

TEST(LookupTest, NewerL0ShadowsOlderL0) {
  MiniTree t(1 << 20);
  t.Put("a", ValueType::kValue, "1");
  t.Flush();
  t.Put("a", ValueType::kValue, "2");
  t.Flush();
  auto r = t.Get("a");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->value(), "2");
}

TEST(LookupTest, TombstoneInL0HidesL1Value) {
  MiniTree t(1 << 20);
  t.Put("a", ValueType::kValue, "v");
  for (int i = 0; i < 4; ++i) {
    t.Put("pad" + std::to_string(i), ValueType::kValue, "x");
    t.Flush();
  }
  ASSERT_FALSE(t.levels().levels[1].empty());
  t.Put("a", ValueType::kTombstone, "");
  t.Flush();
  ASSERT_EQ(t.levels().levels[0].size(), 1u);
  auto r = t.Get("a");
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->has_value());
}

TEST(LookupTest, DeleteThenReinsert) {
  MiniTree t(1 << 20);
  t.Put("a", ValueType::kValue, "1");
  t.Flush();
  t.Put("a", ValueType::kTombstone, "");
  t.Flush();
  t.Put("a", ValueType::kValue, "2");
  auto r = t.Get("a");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->value(), "2");
}

TEST(LookupTest, MissingKeyOpensNoDeepTables) {
  MiniTree t(1 << 20);
  for (int i = 0; i < 4; ++i) {
    t.Put("m" + std::to_string(i), ValueType::kValue, "x");
    t.Flush();
  }
  ASSERT_TRUE(t.levels().levels[0].empty());
  int before = t.opens();
  auto r = t.Get("zzz");
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->has_value());
  EXPECT_EQ(t.opens(), before);
}

TEST(LookupTest, RandomWorkloadMatchesOracle) {
  std::mt19937_64 rng(7);
  LevelPolicy policy;
  policy.level1_target_bytes = 32 << 10;
  MiniTree t(4 << 10, policy);
  std::map<std::string, std::string> oracle;
  std::bernoulli_distribution del(0.15);
  for (int op = 0; op < 10000; ++op) {
    std::string key = testing::RandomKey(rng, 2000);
    if (del(rng)) {
      t.Put(key, ValueType::kTombstone, "");
      oracle.erase(key);
    } else {
      std::string v = testing::RandomValue(rng, 48);
      t.Put(key, ValueType::kValue, v);
      oracle[key] = v;
    }
    if (op % 500 == 499) {
      for (int i = 0; i < 50; ++i) {
        std::string k = testing::RandomKey(rng, 2000);
        auto r = t.Get(k);
        ASSERT_TRUE(r.ok()) << r.status().ToString();
        auto it = oracle.find(k);
        if (it == oracle.end()) {
          ASSERT_FALSE(r->has_value()) << k;
        } else {
          ASSERT_EQ(r->value_or("<none>"), it->second) << k;
        }
      }
    }
  }
  EXPECT_GT(t.compactions(), 5);
  EXPECT_GT(t.levels().LevelBytes(2), 0u);
  ASSERT_TRUE(t.levels().CheckInvariants().ok());

  // Full scan equals the oracle.
  auto all = t.Scan("", "", SIZE_MAX);
  ASSERT_TRUE(all.ok());
  std::vector<KeyValue> expect(oracle.begin(), oracle.end());
  EXPECT_EQ(*all, expect);

  // Bounded scans with limits.
  for (int i = 0; i < 50; ++i) {
    std::string lo = testing::RandomKey(rng, 2000);
    std::string hi = testing::RandomKey(rng, 2000);
    if (hi < lo) std::swap(lo, hi);
    size_t limit = 1 + rng() % 100;
    auto got = t.Scan(lo, hi, limit);
    ASSERT_TRUE(got.ok());
    std::vector<KeyValue> want;
    for (auto it = oracle.lower_bound(lo);
         it != oracle.end() && it->first < hi && want.size() < limit; ++it) {
      want.push_back(*it);
    }
    ASSERT_EQ(*got, want) << lo << " " << hi << " " << limit;
  }
}

}  // namespace
}  // namespace dlsm
