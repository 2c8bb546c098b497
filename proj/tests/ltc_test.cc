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

#include <map>
#include <random>
#include <set>
#include <thread>

#include "ltc/ltc.h"
#include "test_util.h"
#include "transport/sim_network.h"
#include "worker/worker.h"

namespace dlsm {
namespace {

using std::chrono::milliseconds;

TEST(ManifestTest, RoundTrip) {
  RangeManifest m;
  m.range_id = 7;
  m.epoch = 3;
  m.version = 12;
  m.last_flushed_seq = 991;
  m.log_id = 7;
  m.log_stocs = {"stoc-0", "stoc-2"};
  m.levels = LevelMetadata(4);
  SstSummary s{"a", "k", 1, 9, 5, 4096};
  m.levels.levels[0].push_back(SstHandle{{7, FlushFileNo(3, 1)}, "stoc-1", s});
  m.levels.levels[2].push_back(SstHandle{{7, 42}, "stoc-0", s});
  m.levels.compact_pointer[2] = "k";
  std::string bytes = m.Encode();
  auto back = RangeManifest::Decode(bytes);
  ASSERT_TRUE(back.ok()) << back.status().ToString();
  EXPECT_EQ(*back, m);
  bytes[10] ^= 1;
  EXPECT_TRUE(RangeManifest::Decode(bytes).status().Is(Code::kChecksumMismatch));
}

TEST(ManifestTest, LogEntryAndLoadReportRoundTrip) {
  LogEntry e{4, 77, ValueType::kTombstone, "key", ""};
  EXPECT_EQ(*LogEntry::Decode(e.Encode()), e);
  LoadReport r{"ltc-1", {{1, 10.5}, {9, 0.0}}};
  EXPECT_EQ(*LoadReport::Decode(r.Encode()), r);
}

// Property: the three object-number families never collide, manifests
// order by (epoch, version), and every family recovers its epoch.
TEST(ManifestTest, ObjectFamiliesAreDisjoint) {
  std::mt19937_64 rng(5);
  std::set<uint64_t> seen;
  for (int i = 0; i < 20000; ++i) {
    uint64_t epoch = 1 + rng() % 1000;
    uint64_t counter = 1 + rng() % 100000;
    uint64_t f = FlushFileNo(epoch, counter);
    uint64_t j = CompactionJobId(epoch, counter) | (rng() % 50);
    ObjectId m = ManifestObjectId(1, epoch, counter);
    EXPECT_FALSE(IsManifestObject({1, f}));
    EXPECT_FALSE(IsCompactionObject({1, f}));
    EXPECT_TRUE(IsCompactionObject({1, j}));
    EXPECT_FALSE(IsManifestObject({1, j}));
    EXPECT_TRUE(IsManifestObject(m));
    EXPECT_EQ(ObjectEpoch({1, f}), epoch);
    EXPECT_EQ(ObjectEpoch({1, j}), epoch);
    EXPECT_EQ(ObjectEpoch(m), epoch);
    EXPECT_NE(f, j);
    EXPECT_NE(f, m.file_no);
    EXPECT_NE(j, m.file_no);
  }
  EXPECT_LT(ManifestObjectId(1, 2, 999), ManifestObjectId(1, 3, 0));
  EXPECT_LT(ManifestObjectId(1, 3, 4), ManifestObjectId(1, 3, 5));
}

class LtcTest : public ::testing::Test {
 protected:
  void SetUp() override {
    net_ = SimNetwork::Create();
    for (int i = 0; i < 3; ++i) {
      std::string name = "stoc-" + std::to_string(i);
      auto s = StocServer::Open(StocOptions{}, net_->Endpoint(name));
      ASSERT_TRUE(s.ok());
      ASSERT_TRUE((*s)->Start(name).ok());
      stocs_.push_back(std::move(*s));
      stoc_names_.push_back(name);
    }
    client_ = std::make_shared<StocClient>(net_->Endpoint("probe"),
                                           milliseconds(5000));
  }

  LtcOptions SmallOptions(const std::string& name) {
    LtcOptions o;
    o.name = name;
    o.stocs = stoc_names_;
    o.memtable_bytes = 8 << 10;
    o.sst.block_size_bytes = 1024;
    o.policy.l0_trigger = 2;
    o.policy.level1_target_bytes = 32 << 10;
    o.policy.size_ratio = 4;
    o.max_output_bytes = 16 << 10;
    o.seed = 11;
    return o;
  }

  std::unique_ptr<Ltc> NewLtc(const std::string& name,
                              std::optional<LtcOptions> opts = {}) {
    auto ltc = std::make_unique<Ltc>(opts ? *opts : SmallOptions(name),
                                     net_->Endpoint(name));
    EXPECT_TRUE(ltc->Start(name).ok());
    return ltc;
  }

  static RangeDescriptor Whole(uint64_t epoch, uint32_t id = 0) {
    return RangeDescriptor{id, "", "", epoch};
  }

  // Every non-manifest object stored for `range` across all StoCs.
  std::map<ObjectId, std::string> StoredTables(uint32_t range) {
    std::map<ObjectId, std::string> out;
    for (const auto& s : stoc_names_) {
      auto objs = client_->ListObjects(s, range);
      EXPECT_TRUE(objs.ok());
      for (const auto& o : *objs) {
        if (!IsManifestObject(o.id)) out[o.id] = s;
      }
    }
    return out;
  }

  size_t StoredManifests(uint32_t range) {
    size_t n = 0;
    for (const auto& s : stoc_names_) {
      auto objs = client_->ListObjects(s, range);
      EXPECT_TRUE(objs.ok());
      for (const auto& o : *objs) n += IsManifestObject(o.id);
    }
    return n;
  }

  static std::string Key(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "key%06d", i);
    return buf;
  }

  std::shared_ptr<SimNetwork> net_;
  std::vector<std::unique_ptr<StocServer>> stocs_;
  std::vector<std::string> stoc_names_;
  std::shared_ptr<StocClient> client_;
};

void ExpectMatches(Ltc& ltc, const std::map<std::string, std::string>& oracle) {
  auto all = ltc.Scan("", "", 0);
  ASSERT_TRUE(all.ok()) << all.status().ToString();
  std::vector<KeyValue> want(oracle.begin(), oracle.end());
  EXPECT_EQ(all->rows, want);
  for (const auto& [k, v] : oracle) {
    auto got = ltc.Get(k);
    ASSERT_TRUE(got.ok()) << got.status().ToString();
    ASSERT_TRUE(got->has_value()) << k;
    EXPECT_EQ(**got, v);
  }
}

TEST_F(LtcTest, RandomWorkloadMatchesOracle) {
  auto ltc = NewLtc("ltc-0");
  ASSERT_TRUE(ltc->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  std::mt19937_64 rng(99);
  std::map<std::string, std::string> oracle;
  SeqNo last_seq = 0;
  for (int i = 0; i < 6000; ++i) {
    std::string key = testing::RandomKey(rng, 800);
    int op = static_cast<int>(rng() % 10);
    if (op < 6) {
      std::string value = testing::RandomValue(rng, 64);
      auto ack = ltc->Put(key, value);
      ASSERT_TRUE(ack.ok()) << ack.status().ToString();
      EXPECT_GT(ack->seq, last_seq);
      EXPECT_TRUE(ack->durable);
      last_seq = ack->seq;
      oracle[key] = value;
    } else if (op < 7) {
      ASSERT_TRUE(ltc->Delete(key).ok());
      oracle.erase(key);
    } else if (op < 9) {
      auto got = ltc->Get(key);
      ASSERT_TRUE(got.ok()) << got.status().ToString();
      auto it = oracle.find(key);
      ASSERT_EQ(got->has_value(), it != oracle.end()) << key;
      if (it != oracle.end()) EXPECT_EQ(**got, it->second);
    } else {
      std::string hi = testing::RandomKey(rng, 800);
      if (hi < key) std::swap(hi, key);
      size_t limit = rng() % 20;
      auto got = ltc->Scan(key, hi, limit);
      ASSERT_TRUE(got.ok()) << got.status().ToString();
      std::vector<KeyValue> want;
      for (auto it = oracle.lower_bound(key);
           it != oracle.end() && it->first < hi &&
           (limit == 0 || want.size() < limit);
           ++it) {
        want.emplace_back(it->first, it->second);
      }
      EXPECT_EQ(got->rows, want);
    }
  }
  ASSERT_TRUE(ltc->Quiesce(milliseconds(30000)).ok());
  LtcStats stats = ltc->Stats();
  EXPECT_GT(stats.flushes, 5u);
  EXPECT_GT(stats.compactions_applied, 0u);
  EXPECT_EQ(stats.backlog, 0u);
  ExpectMatches(*ltc, oracle);
  auto m = ltc->Manifest(0);
  ASSERT_TRUE(m.ok());
  EXPECT_TRUE(m->levels.CheckInvariants().ok());
}

TEST_F(LtcTest, NotOwnerOutsideRangeOrAtNewerEpoch) {
  auto ltc = NewLtc("ltc-0");
  ASSERT_TRUE(
      ltc->Adopt(RangeDescriptor{3, "m", "t", 2}, {"stoc-0"}, std::nullopt)
          .ok());
  EXPECT_TRUE(ltc->Put("a", "1").status().Is(Code::kNotOwner));
  EXPECT_TRUE(ltc->Get("t").status().Is(Code::kNotOwner));
  EXPECT_TRUE(ltc->Put("m", "1").ok());
  EXPECT_TRUE(ltc->Put("n", "1", 2).ok());
  EXPECT_TRUE(ltc->Put("n", "1", 1).ok());
  EXPECT_TRUE(ltc->Put("n", "1", 3).status().Is(Code::kNotOwner));
  auto scan = ltc->Scan("m", "", 0);
  ASSERT_TRUE(scan.ok());
  EXPECT_EQ(scan->range_upper, "t");
  EXPECT_EQ(scan->rows.size(), 2u);
}

TEST_F(LtcTest, FlushIsInvisibleToReaders) {
  auto ltc = NewLtc("ltc-0");
  ASSERT_TRUE(ltc->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  ASSERT_TRUE(ltc->FlushAll().ok());
  EXPECT_EQ(ltc->Stats().flushes, 0u);  // empty memtable: nothing to flush
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 50; ++i) {
    oracle[Key(i)] = "v" + std::to_string(i);
    ASSERT_TRUE(ltc->Put(Key(i), oracle[Key(i)]).ok());
  }
  ASSERT_TRUE(ltc->Delete(Key(7)).ok());
  oracle.erase(Key(7));
  ExpectMatches(*ltc, oracle);
  ASSERT_TRUE(ltc->FlushAll().ok());
  LtcStats stats = ltc->Stats();
  EXPECT_EQ(stats.flushes, 1u);
  EXPECT_EQ(stats.ranges[0].files_per_level[0], 1u);
  EXPECT_EQ(stats.ranges[0].memtable_bytes, 0u);
  ExpectMatches(*ltc, oracle);
  EXPECT_FALSE(ltc->Get(Key(7))->has_value());
}

TEST_F(LtcTest, DuplicateAndStaleCompactionResultsAreRejected) {
  LtcOptions o = SmallOptions("ltc-0");
  o.local_compaction = false;
  auto ltc = NewLtc("ltc-0", o);
  ASSERT_TRUE(ltc->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  std::map<std::string, std::string> oracle;
  for (int round = 0; round < 2; ++round) {
    for (int i = 0; i < 40; ++i) {
      std::string v = "r" + std::to_string(round) + "-" + std::to_string(i);
      oracle[Key(i * 3 + round)] = v;
      ASSERT_TRUE(ltc->Put(Key(i * 3 + round), v).ok());
    }
    ASSERT_TRUE(ltc->FlushAll().ok());
  }
  // No worker and no local compaction: the job waits in the backlog.
  std::vector<CompactionJob> jobs;
  for (int i = 0; i < 100 && jobs.empty(); ++i) {
    jobs = ltc->PendingJobs(0);
    std::this_thread::sleep_for(milliseconds(10));
  }
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(ltc->Backlog(), 1u);
  std::mt19937_64 rng(1);
  StocClient runner(net_->Endpoint("runner"), milliseconds(5000));
  auto result = ExecuteJob(jobs[0], runner, rng);
  ASSERT_TRUE(result.ok()) << result.status().ToString();

  CompactionResult stale = *result;
  stale.epoch = 0;
  EXPECT_TRUE(ltc->ApplyCompaction(0, stale).Is(Code::kStaleEpoch));
  // The stale path deleted the outputs; rerun to recreate them.
  result = ExecuteJob(jobs[0], runner, rng);
  ASSERT_TRUE(result.ok());
  ASSERT_TRUE(ltc->ApplyCompaction(0, *result).ok());
  EXPECT_EQ(ltc->Backlog(), 0u);
  EXPECT_TRUE(ltc->ApplyCompaction(0, *result).Is(Code::kUnknownJob));
  ExpectMatches(*ltc, oracle);
  auto m = ltc->Manifest(0);
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->levels.levels[0].size(), 0u);
  EXPECT_EQ(m->levels.levels[1].size(), result->outputs.size());
  // Inputs are gone from storage once the edit is persisted.
  for (const auto& in : jobs[0].inputs) {
    EXPECT_TRUE(client_->ObjectSize(in.stoc, in.id).status().Is(Code::kNotFound));
  }
}

TEST_F(LtcTest, RemoteWorkersCompact) {
  WorkerOptions wo;
  wo.max_concurrent = 2;
  WorkerServer worker(wo, net_->Endpoint("worker-0"));
  ASSERT_TRUE(worker.Start("worker-0").ok());
  LtcOptions o = SmallOptions("ltc-0");
  o.workers = {"worker-0"};
  o.local_compaction = false;
  auto ltc = NewLtc("ltc-0", o);
  ASSERT_TRUE(ltc->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  std::mt19937_64 rng(3);
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 3000; ++i) {
    std::string k = testing::RandomKey(rng, 500);
    std::string v = testing::RandomValue(rng, 48);
    oracle[k] = v;
    ASSERT_TRUE(ltc->Put(k, v).ok());
  }
  ASSERT_TRUE(ltc->Quiesce(milliseconds(30000)).ok());
  LtcStats stats = ltc->Stats();
  EXPECT_GT(stats.remote_jobs, 0u);
  EXPECT_EQ(stats.local_jobs, 0u);
  EXPECT_GT(worker.Stats().completed, 0u);
  ExpectMatches(*ltc, oracle);
  ltc->Stop();
  worker.Stop();
}

class ReleaseTest : public LtcTest,
                    public ::testing::WithParamInterface<size_t> {};

TEST_P(ReleaseTest, ReleaseThenAdoptElsewhere) {
  LtcOptions o = SmallOptions("ltc-a");
  o.handoff_flush_bytes = GetParam();
  auto a = NewLtc("ltc-a", o);
  auto b = NewLtc("ltc-b");
  ASSERT_TRUE(a->Adopt(Whole(1), {"stoc-1"}, std::nullopt).ok());
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 700; ++i) {
    oracle[Key(i % 450)] = "v" + std::to_string(i);
    ASSERT_TRUE(a->Put(Key(i % 450), oracle[Key(i % 450)]).ok());
  }
  auto m = a->Release(0);
  ASSERT_TRUE(m.ok()) << m.status().ToString();
  EXPECT_EQ(m->epoch, 1u);
  EXPECT_TRUE(a->Release(0).status().Is(Code::kNotOwner));
  EXPECT_TRUE(a->Get(Key(1)).status().Is(Code::kNotOwner));
  EXPECT_TRUE(a->Put(Key(1), "x").status().Is(Code::kNotOwner));

  ASSERT_TRUE(b->Adopt(Whole(2), {"stoc-1"}, *m).ok());
  ExpectMatches(*b, oracle);
  auto ack = b->Put(Key(1), "after");
  ASSERT_TRUE(ack.ok());
  oracle[Key(1)] = "after";
  ASSERT_TRUE(b->Quiesce(milliseconds(30000)).ok());
  ExpectMatches(*b, oracle);
  // Adopting again at an epoch that is not newer is refused.
  EXPECT_TRUE(
      a->Adopt(Whole(2), {"stoc-1"}, std::nullopt).Is(Code::kStaleEpoch));
}

// Flush-before-release (tail under the threshold) and log handoff.
INSTANTIATE_TEST_SUITE_P(Handoff, ReleaseTest,
                         ::testing::Values(size_t{1} << 20, size_t{0}));

TEST_F(LtcTest, CrashThenAdoptRecoversEveryAckedWrite) {
  LtcOptions o = SmallOptions("ltc-a");
  auto a = NewLtc("ltc-a", o);
  ASSERT_TRUE(a->Adopt(Whole(1), {"stoc-0", "stoc-2"}, std::nullopt).ok());
  std::mt19937_64 rng(8);
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 2500; ++i) {
    std::string k = testing::RandomKey(rng, 600);
    if (rng() % 8 == 0) {
      ASSERT_TRUE(a->Delete(k).ok());
      oracle.erase(k);
    } else {
      std::string v = testing::RandomValue(rng, 40);
      ASSERT_TRUE(a->Put(k, v).ok());
      oracle[k] = v;
    }
  }
  a->Stop();  // nothing flushed on the way down

  auto b = NewLtc("ltc-b");
  ASSERT_TRUE(b->Adopt(Whole(2), {"stoc-0", "stoc-2"}, std::nullopt).ok());
  ExpectMatches(*b, oracle);
  auto all = b->Scan("", "", 0);
  ASSERT_TRUE(all.ok());
  EXPECT_EQ(all->rows.size(), oracle.size());
}

TEST_F(LtcTest, NewerOwnerFencesOldOne) {
  auto a = NewLtc("ltc-a");
  auto b = NewLtc("ltc-b");
  ASSERT_TRUE(a->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  ASSERT_TRUE(a->Put("k1", "from-a").ok());
  // The coordinator believes a is dead and moves the range.
  ASSERT_TRUE(b->Adopt(Whole(2), {"stoc-0"}, std::nullopt).ok());
  EXPECT_TRUE(a->Put("k2", "late").status().Is(Code::kNotOwner));
  EXPECT_EQ(**b->Get("k1"), "from-a");
  EXPECT_FALSE(b->Get("k2")->has_value());
  EXPECT_TRUE(
      a->Adopt(Whole(1), {"stoc-0"}, std::nullopt).Is(Code::kStaleEpoch));
}

TEST_F(LtcTest, LogReplicaPartitionSurfacesUnavailable) {
  auto ltc = NewLtc("ltc-0");
  ASSERT_TRUE(
      ltc->Adopt(Whole(1), {"stoc-0", "stoc-1"}, std::nullopt).ok());
  ASSERT_TRUE(ltc->Put("a", "1").ok());
  net_->Partition("ltc-0", "stoc-1", milliseconds(60000));
  auto put = ltc->Put("b", "2");
  EXPECT_TRUE(put.status().Is(Code::kUnavailable)) << put.status().ToString();
  net_->HealAll();
  EXPECT_TRUE(ltc->Put("c", "3").ok());
  EXPECT_EQ(**ltc->Get("a"), "1");
  EXPECT_EQ(**ltc->Get("c"), "3");
}

TEST_F(LtcTest, GarbageCollectionLeavesExactlyTheLiveSet) {
  auto a = NewLtc("ltc-a");
  ASSERT_TRUE(a->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  std::mt19937_64 rng(21);
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 3000; ++i) {
    std::string k = testing::RandomKey(rng, 400);
    std::string v = testing::RandomValue(rng, 40);
    ASSERT_TRUE(a->Put(k, v).ok());
    oracle[k] = v;
  }
  // Crash mid-stream: jobs and flushes may leave unreferenced objects.
  a->Stop();
  // Plant an orphan of the dead epoch.
  ASSERT_TRUE(client_->PutObject("stoc-2", {0, FlushFileNo(1, 999999)}, "junk")
                  .ok());

  auto b = NewLtc("ltc-b");
  ASSERT_TRUE(b->Adopt(Whole(2), {"stoc-0"}, std::nullopt).ok());
  ASSERT_TRUE(b->Quiesce(milliseconds(30000)).ok());
  auto swept = b->SweepOrphans(0);
  ASSERT_TRUE(swept.ok());
  std::map<ObjectId, std::string> stored = StoredTables(0);
  auto render = [](const std::map<ObjectId, std::string>& m) {
    std::string out;
    for (const auto& [id, s] : m) out += id.ToString() + "@" + s + " ";
    return out;
  };
  EXPECT_EQ(render(stored), render(b->Placements()));
  EXPECT_EQ(StoredManifests(0), 1u);
  ExpectMatches(*b, oracle);
}

TEST_F(LtcTest, ConcurrentClientsSeeOwnWrites) {
  auto ltc = NewLtc("ltc-0");
  ASSERT_TRUE(ltc->Adopt(Whole(1), {"stoc-0"}, std::nullopt).ok());
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 400; ++i) {
        std::string k = "t" + std::to_string(t) + "-" + Key(i);
        std::string v = std::to_string(i);
        if (!ltc->Put(k, v).ok()) ++failures;
        auto got = ltc->Get(k);
        if (!got.ok() || !got->has_value() || **got != v) ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
  auto all = ltc->Scan("", "", 0);
  ASSERT_TRUE(all.ok());
  EXPECT_EQ(all->rows.size(), 1600u);
}

TEST_F(LtcTest, WireProtocolRoundTrip) {
  auto ltc = NewLtc("ltc-0");
  auto t = net_->Endpoint("client");
  std::string adopt;
  Whole(1).EncodeTo(&adopt);
  PutFixed32(&adopt, 1);
  PutBytes(&adopt, "stoc-0");
  PutFixed8(&adopt, 0);
  ASSERT_TRUE(
      CallBody(*t, "ltc-0", Opcode::kAdoptRange, 0, adopt, milliseconds(5000))
          .ok());
  std::string put;
  PutBytes(&put, "hello");
  PutBytes(&put, "world");
  auto ack = CallBody(*t, "ltc-0", Opcode::kPut, 1, put, milliseconds(5000));
  ASSERT_TRUE(ack.ok()) << ack.status().ToString();
  EXPECT_EQ(ack->size(), 9u);
  std::string get;
  PutBytes(&get, "hello");
  auto body = CallBody(*t, "ltc-0", Opcode::kGet, 1, get, milliseconds(5000));
  ASSERT_TRUE(body.ok());
  Decoder d(*body);
  bool found = false;
  std::string value;
  ASSERT_TRUE(d.GetBool(&found).ok());
  ASSERT_TRUE(d.GetBytes(&value).ok());
  EXPECT_TRUE(found);
  EXPECT_EQ(value, "world");
  auto stale = CallBody(*t, "ltc-0", Opcode::kGet, 5, get, milliseconds(5000));
  EXPECT_TRUE(stale.status().Is(Code::kNotOwner));
  auto stats =
      CallBody(*t, "ltc-0", Opcode::kLtcStats, 0, "", milliseconds(5000));
  ASSERT_TRUE(stats.ok());
  EXPECT_NE(stats->find("\"ranges\""), std::string::npos);
}

}  // namespace
}  // namespace dlsm
