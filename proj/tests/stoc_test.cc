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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <random>
#include <thread>

#include "stoc/stoc.h"
#include "transport/sim_network.h"

namespace dlsm {
namespace {

using std::chrono::milliseconds;

std::string TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("dlsm_stoc_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir.string();
}

StoreOptions DiskOptions(const std::string& dir) {
  StoreOptions o;
  o.tier = Tier::kDisk;
  o.dir = dir;
  o.log_segment_bytes = 256;
  return o;
}

class StoreTest : public ::testing::TestWithParam<Tier> {
 protected:
  void SetUp() override {
    StoreOptions o;
    if (GetParam() == Tier::kDisk) {
      dir_ = TempDir(::testing::UnitTest::GetInstance()->current_test_info()->name());
      o = DiskOptions(dir_);
    }
    auto s = ObjectStore::Open(o);
    ASSERT_TRUE(s.ok()) << s.status().ToString();
    store_ = std::move(*s);
  }
  void TearDown() override {
    store_.reset();
    if (!dir_.empty()) std::filesystem::remove_all(dir_);
  }

  std::string dir_;
  std::unique_ptr<ObjectStore> store_;
};

TEST_P(StoreTest, PutGetRoundTrip) {
  ObjectId id{1, 1};
  ASSERT_TRUE(store_->PutObject(id, "hello world").ok());
  EXPECT_EQ(*store_->GetObject(id, 0, 11), "hello world");
  EXPECT_EQ(*store_->GetObject(id, 6, 5), "world");
  EXPECT_EQ(*store_->GetObject(id, 0, UINT64_MAX), "hello world");
  EXPECT_EQ(*store_->ObjectSize(id), 11u);
}

TEST_P(StoreTest, WriteOnce) {
  ObjectId id{1, 1};
  ASSERT_TRUE(store_->PutObject(id, "a").ok());
  EXPECT_EQ(store_->PutObject(id, "b").status().code(), Code::kAlreadyExists);
  EXPECT_EQ(*store_->GetObject(id, 0, 1), "a");
}

TEST_P(StoreTest, OutOfRangeRead) {
  ObjectId id{1, 1};
  ASSERT_TRUE(store_->PutObject(id, "abc").ok());
  EXPECT_EQ(store_->GetObject(id, 2, 5).status().code(), Code::kOutOfRange);
  EXPECT_EQ(store_->GetObject(id, 4, 0).status().code(), Code::kOutOfRange);
  EXPECT_EQ(*store_->GetObject(id, 3, 0), "");
}

TEST_P(StoreTest, DeleteAndNotFound) {
  ObjectId id{2, 9};
  EXPECT_EQ(store_->DeleteObject(id).code(), Code::kNotFound);
  ASSERT_TRUE(store_->PutObject(id, "x").ok());
  ASSERT_TRUE(store_->DeleteObject(id).ok());
  EXPECT_EQ(store_->GetObject(id, 0, 1).status().code(), Code::kNotFound);
  EXPECT_EQ(store_->bytes_stored(), 0u);
}

TEST_P(StoreTest, ConcurrentPutsAccountBytes) {
  std::vector<std::thread> threads;
  std::atomic<uint64_t> total{0};
  for (int i = 0; i < 100; ++i) {
    threads.emplace_back([&, i] {
      std::string bytes(100 + i * 7, static_cast<char>('a' + i % 26));
      ASSERT_TRUE(store_->PutObject(ObjectId{3, static_cast<uint64_t>(i)}, bytes).ok());
      total += bytes.size();
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store_->bytes_stored(), total.load());
  EXPECT_EQ(store_->object_count(), 100u);
  for (int i = 0; i < 100; ++i) {
    auto r = store_->GetObject(ObjectId{3, static_cast<uint64_t>(i)}, 0, UINT64_MAX);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->size(), 100u + i * 7);
  }
}

TEST_P(StoreTest, RandomSliceFuzz) {
  std::mt19937_64 rng(5);
  std::string local(10000, '\0');
  for (auto& c : local) c = static_cast<char>(rng());
  ObjectId id{4, 4};
  ASSERT_TRUE(store_->PutObject(id, local).ok());
  for (int i = 0; i < 500; ++i) {
    uint64_t off = rng() % local.size();
    uint64_t len = rng() % (local.size() - off + 1);
    auto r = store_->GetObject(id, off, len);
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(*r, local.substr(off, len));
  }
}

TEST_P(StoreTest, ListByRange) {
  ASSERT_TRUE(store_->PutObject(ObjectId{1, 1}, "a").ok());
  ASSERT_TRUE(store_->PutObject(ObjectId{1, 2}, "bb").ok());
  ASSERT_TRUE(store_->PutObject(ObjectId{2, 1}, "ccc").ok());
  EXPECT_EQ(store_->ListObjects(std::nullopt).size(), 3u);
  auto r1 = store_->ListObjects(1);
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_EQ(r1[1].size, 2u);
}

TEST_P(StoreTest, LogAppendsAreDense) {
  EXPECT_EQ(*store_->AppendLog(7, 0, "a"), 1u);
  EXPECT_EQ(*store_->AppendLog(7, 0, "b"), 2u);
  EXPECT_EQ(*store_->AppendLog(7, 0, "c"), 3u);
  auto recs = store_->ReadLog(7, 2, 0, SIZE_MAX, nullptr);
  ASSERT_TRUE(recs.ok());
  ASSERT_EQ(recs->size(), 2u);
  EXPECT_EQ((*recs)[0], (LogRecord{2, "b"}));
  EXPECT_TRUE(store_->ReadLog(7, 99, 0, SIZE_MAX, nullptr)->empty());
  EXPECT_EQ(store_->ReadLog(8, 1, 0, SIZE_MAX, nullptr).status().code(),
            Code::kNotFound);
}

TEST_P(StoreTest, ConcurrentAppendersDenseNoLoss) {
  std::vector<std::thread> threads;
  std::mutex mu;
  std::set<uint64_t> lsns;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 2500; ++i) {
        auto r = store_->AppendLog(1, 0, std::to_string(t) + "/" + std::to_string(i));
        ASSERT_TRUE(r.ok());
        std::lock_guard<std::mutex> l(mu);
        lsns.insert(*r);
      }
    });
  }
  for (auto& t : threads) t.join();
  ASSERT_EQ(lsns.size(), 10000u);
  EXPECT_EQ(*lsns.begin(), 1u);
  EXPECT_EQ(*lsns.rbegin(), 10000u);
  EXPECT_EQ(store_->ReadLog(1, 0, 0, SIZE_MAX, nullptr)->size(), 10000u);
}

TEST_P(StoreTest, TruncateMatchesOracle) {
  std::mt19937_64 rng(3);
  std::map<uint64_t, std::string> oracle;
  uint64_t cut = 0;
  for (int i = 0; i < 400; ++i) {
    if (rng() % 5 == 0 && !oracle.empty()) {
      uint64_t upto = oracle.begin()->first + rng() % 10;
      ASSERT_TRUE(store_->TruncateLog(5, upto, 0).ok());
      cut = std::max(cut, upto);
      oracle.erase(oracle.begin(), oracle.upper_bound(upto));
    } else {
      std::string rec = "r" + std::to_string(i);
      auto lsn = store_->AppendLog(5, 0, rec);
      ASSERT_TRUE(lsn.ok());
      ASSERT_GT(*lsn, cut);
      oracle[*lsn] = rec;
    }
  }
  auto recs = store_->ReadLog(5, 0, 0, SIZE_MAX, nullptr);
  ASSERT_TRUE(recs.ok());
  std::vector<LogRecord> want;
  for (auto& [l, r] : oracle) want.push_back({l, r});
  EXPECT_EQ(*recs, want);
}

TEST_P(StoreTest, TruncateEdgeCases) {
  for (int i = 0; i < 3; ++i) ASSERT_TRUE(store_->AppendLog(2, 0, "x").ok());
  ASSERT_TRUE(store_->TruncateLog(2, 0, 0).ok());
  EXPECT_EQ(store_->ReadLog(2, 0, 0, SIZE_MAX, nullptr)->size(), 3u);
  ASSERT_TRUE(store_->TruncateLog(2, 3, 0).ok());
  EXPECT_TRUE(store_->ReadLog(2, 0, 0, SIZE_MAX, nullptr)->empty());
  EXPECT_EQ(*store_->AppendLog(2, 0, "y"), 4u);
  EXPECT_EQ(store_->TruncateLog(99, 1, 0).code(), Code::kNotFound);
}

TEST_P(StoreTest, EpochFencing) {
  ASSERT_TRUE(store_->AppendLog(1, 1, "old owner").ok());
  // A new owner reads with epoch 2, fencing epoch 1 out.
  ASSERT_TRUE(store_->ReadLog(1, 0, 2, SIZE_MAX, nullptr).ok());
  EXPECT_EQ(store_->AppendLog(1, 1, "late").status().code(), Code::kStaleEpoch);
  EXPECT_EQ(store_->TruncateLog(1, 1, 1).code(), Code::kStaleEpoch);
  EXPECT_TRUE(store_->AppendLog(1, 2, "new").ok());
  // Fencing an unseen log creates it.
  ASSERT_TRUE(store_->ReadLog(50, 0, 3, SIZE_MAX, nullptr).ok());
  EXPECT_EQ(store_->AppendLog(50, 2, "x").status().code(), Code::kStaleEpoch);
}

TEST_P(StoreTest, ReadLogBatches) {
  for (int i = 0; i < 10; ++i) ASSERT_TRUE(store_->AppendLog(3, 0, std::string(10, 'a')).ok());
  bool more = false;
  auto r = store_->ReadLog(3, 0, 0, 35, &more);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->size(), 3u);
  EXPECT_TRUE(more);
}

INSTANTIATE_TEST_SUITE_P(Tiers, StoreTest,
                         ::testing::Values(Tier::kMemory, Tier::kDisk),
                         [](const auto& info) {
                           return info.param == Tier::kDisk ? "Disk" : "Memory";
                         });

TEST(StoreDurabilityTest, RestartKeepsAckedData) {
  std::string dir = TempDir("restart");
  {
    auto s = ObjectStore::Open(DiskOptions(dir));
    ASSERT_TRUE(s.ok());
    ASSERT_TRUE((*s)->PutObject(ObjectId{1, 1}, "object-bytes").ok());
    ASSERT_TRUE((*s)->PutObject(ObjectId{1, 2}, "gone").ok());
    ASSERT_TRUE((*s)->DeleteObject(ObjectId{1, 2}).ok());
    for (int i = 0; i < 50; ++i) {
      ASSERT_TRUE((*s)->AppendLog(9, 4, "rec" + std::to_string(i)).ok());
    }
    ASSERT_TRUE((*s)->TruncateLog(9, 20, 4).ok());
  }
  auto s = ObjectStore::Open(DiskOptions(dir));
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  EXPECT_EQ(*(*s)->GetObject(ObjectId{1, 1}, 0, UINT64_MAX), "object-bytes");
  EXPECT_EQ((*s)->GetObject(ObjectId{1, 2}, 0, 1).status().code(), Code::kNotFound);
  EXPECT_EQ((*s)->bytes_stored(), 12u);
  auto recs = (*s)->ReadLog(9, 0, 0, SIZE_MAX, nullptr);
  ASSERT_TRUE(recs.ok());
  ASSERT_EQ(recs->size(), 30u);
  EXPECT_EQ(recs->front(), (LogRecord{21, "rec20"}));
  EXPECT_EQ((*s)->AppendLog(9, 3, "stale").status().code(), Code::kStaleEpoch);
  EXPECT_EQ(*(*s)->AppendLog(9, 4, "next"), 51u);
  s->reset();
  std::filesystem::remove_all(dir);
}

TEST(StoreDurabilityTest, FullyTruncatedLogKeepsLsnAcrossRestart) {
  std::string dir = TempDir("trunc_restart");
  {
    auto s = *ObjectStore::Open(DiskOptions(dir));
    for (int i = 0; i < 5; ++i) ASSERT_TRUE(s->AppendLog(1, 0, "x").ok());
    ASSERT_TRUE(s->TruncateLog(1, 5, 0).ok());
  }
  auto s = *ObjectStore::Open(DiskOptions(dir));
  EXPECT_EQ(*s->AppendLog(1, 0, "y"), 6u);
  s.reset();
  std::filesystem::remove_all(dir);
}

TEST(StoreDurabilityTest, TornTailDropped) {
  std::string dir = TempDir("torn");
  {
    auto s = *ObjectStore::Open(DiskOptions(dir));
    ASSERT_TRUE(s->AppendLog(1, 0, "complete").ok());
  }
  {
    std::ofstream f(dir + "/1.log.0", std::ios::binary | std::ios::app);
    f << "\x02\x00\x00\x00\x00\x00\x00\x00\x10\x00";  // half a header
  }
  auto s = ObjectStore::Open(DiskOptions(dir));
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  auto recs = (*s)->ReadLog(1, 0, 0, SIZE_MAX, nullptr);
  ASSERT_EQ(recs->size(), 1u);
  EXPECT_EQ(*(*s)->AppendLog(1, 0, "after"), 2u);
  s->reset();
  auto again = *ObjectStore::Open(DiskOptions(dir));
  EXPECT_EQ(again->ReadLog(1, 0, 0, SIZE_MAX, nullptr)->size(), 2u);
  again.reset();
  std::filesystem::remove_all(dir);
}

TEST(StoreCapacityTest, OutOfSpace) {
  StoreOptions o;
  o.capacity_bytes = 100;
  auto s = *ObjectStore::Open(o);
  ASSERT_TRUE(s->PutObject(ObjectId{1, 1}, std::string(80, 'a')).ok());
  EXPECT_EQ(s->PutObject(ObjectId{1, 2}, std::string(30, 'a')).status().code(),
            Code::kOutOfSpace);
  EXPECT_EQ(s->AppendLog(1, 0, std::string(30, 'a')).status().code(),
            Code::kOutOfSpace);
  EXPECT_EQ(s->bytes_stored(), 80u);
  ASSERT_TRUE(s->DeleteObject(ObjectId{1, 1}).ok());
  EXPECT_TRUE(s->PutObject(ObjectId{1, 2}, std::string(30, 'a')).ok());
}

class StocServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    net_ = SimNetwork::Create();
    auto server = StocServer::Open(StocOptions{}, net_->Endpoint("stoc-0"));
    ASSERT_TRUE(server.ok());
    server_ = std::move(*server);
    ASSERT_TRUE(server_->Start("stoc-0").ok());
    board_ = std::make_shared<StocStatsBoard>();
    client_ = std::make_shared<StocClient>(net_->Endpoint("ltc-0"),
                                           milliseconds(5000), board_);
  }

  std::shared_ptr<SimNetwork> net_;
  std::unique_ptr<StocServer> server_;
  std::shared_ptr<StocStatsBoard> board_;
  std::shared_ptr<StocClient> client_;
};

TEST_F(StocServiceTest, ObjectOpsOverTheWire) {
  ObjectId id{1, 7};
  auto crc = client_->PutObject("stoc-0", id, "payload");
  ASSERT_TRUE(crc.ok());
  EXPECT_EQ(*crc, Crc32("payload"));
  EXPECT_EQ(client_->PutObject("stoc-0", id, "x").status().code(),
            Code::kAlreadyExists);
  EXPECT_EQ(*client_->GetObject("stoc-0", id, 3, 4), "load");
  EXPECT_EQ(*client_->ObjectSize("stoc-0", id), 7u);
  auto list = client_->ListObjects("stoc-0", 1);
  ASSERT_TRUE(list.ok());
  ASSERT_EQ(list->size(), 1u);
  EXPECT_EQ((*list)[0].id, id);
  ASSERT_TRUE(client_->DeleteObject("stoc-0", id).ok());
  EXPECT_EQ(client_->GetObject("stoc-0", id, 0, 1).status().code(),
            Code::kNotFound);
  EXPECT_EQ(board_->Get("stoc-0").object_count, 0u);
}

TEST_F(StocServiceTest, LogOpsOverTheWire) {
  for (int i = 1; i <= 3; ++i) {
    EXPECT_EQ(*client_->AppendLog("stoc-0", 4, 1, "r" + std::to_string(i)),
              static_cast<uint64_t>(i));
  }
  auto recs = client_->ReadLog("stoc-0", 4, 1, 2);
  ASSERT_TRUE(recs.ok());
  EXPECT_EQ(recs->size(), 3u);
  EXPECT_EQ(client_->AppendLog("stoc-0", 4, 1, "stale").status().code(),
            Code::kStaleEpoch);
  ASSERT_TRUE(client_->TruncateLog("stoc-0", 4, 2, 2).ok());
  EXPECT_EQ(client_->ReadLog("stoc-0", 4, 0, 2)->size(), 1u);
}

TEST_F(StocServiceTest, ReadLogLargerThanOneFrame) {
  std::string rec(1 << 20, 'q');
  for (int i = 0; i < 12; ++i) ASSERT_TRUE(client_->AppendLog("stoc-0", 1, 0, rec).ok());
  auto recs = client_->ReadLog("stoc-0", 1, 0, 0);
  ASSERT_TRUE(recs.ok()) << recs.status().ToString();
  EXPECT_EQ(recs->size(), 12u);
}

TEST_F(StocServiceTest, StatsTrackLatencyAndDrain) {
  auto fresh = client_->Stats("stoc-0");
  ASSERT_TRUE(fresh.ok());
  EXPECT_EQ(fresh->outstanding_requests, 0u);
  uint64_t before = fresh->ewma_latency_us;
  server_->SetInjectedLatency(10000, 0);
  std::vector<std::thread> threads;
  std::atomic<uint64_t> max_outstanding{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        ASSERT_TRUE(client_->PutObject("stoc-0", ObjectId{9, uint64_t(t * 10 + i)}, "x").ok());
        uint64_t o = board_->Get("stoc-0").outstanding_requests;
        uint64_t cur = max_outstanding.load();
        while (o > cur && !max_outstanding.compare_exchange_weak(cur, o)) {}
      }
    });
  }
  for (auto& t : threads) t.join();
  auto after = server_->Stats();
  EXPECT_GT(after.ewma_latency_us, before);
  EXPECT_GE(after.ewma_latency_us, 9000u);
  EXPECT_GT(max_outstanding.load(), 0u);
  EXPECT_EQ(after.outstanding_requests, 0u);
  EXPECT_EQ(after.object_count, 20u);
}

TEST_F(StocServiceTest, TableReadableThroughStocSource) {
  std::vector<Entry> entries;
  for (int i = 0; i < 2000; ++i) {
    entries.push_back(Entry{"key" + std::to_string(100000 + i), uint64_t(i + 1),
                            ValueType::kValue, std::string(20, 'v')});
  }
  auto sst = EncodeSst(entries);
  ASSERT_TRUE(sst.ok());
  ObjectId id{2, 1};
  ASSERT_TRUE(client_->PutObject("stoc-0", id, sst->bytes).ok());
  auto src = std::make_shared<StocSource>(client_, "stoc-0", id, sst->bytes.size());
  auto reader = TableReader::Open(src);
  ASSERT_TRUE(reader.ok());
  auto got = (*reader)->Get("key101234");
  ASSERT_TRUE(got.ok());
  ASSERT_TRUE(got->has_value());
  EXPECT_EQ((*got)->seq, 1235u);
}

}  // namespace
}  // namespace dlsm
