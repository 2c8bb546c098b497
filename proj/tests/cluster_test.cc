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
#include <random>
#include <sstream>

#include "cluster/config.h"
#include "cluster/devcluster.h"
#include "cluster/status.h"

namespace dlsm {
namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compares against tests/golden/<name>; DLSM_UPDATE_GOLDEN=1 rewrites it.
void ExpectGolden(const std::string& name, const std::string& actual) {
  std::string path = std::string(DLSM_GOLDEN_DIR) + "/" + name;
  if (GetEnv("DLSM_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
  }
  EXPECT_EQ(actual, ReadFile(path)) << "golden file " << path;
}

EnvLookup FakeEnv(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = FakeEnv({});

// Property: parse(render(config)) == config for randomized configs.
TEST(ConfigTest, RenderParseRoundTrip) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    ClusterConfig c = MakeConfig(1 + rng() % 8, 1 + rng() % 4, rng() % 3,
                                 rng() % 2 ? "sim" : "tcp", 20000);
    c.n_ranges = static_cast<int>(c.ltcs.size() + rng() % 100);
    c.d = 1 + static_cast<int>(rng() % c.stocs.size());
    c.r = 1 + static_cast<int>(rng() % c.stocs.size());
    c.tier = rng() % 2 ? "memory" : "disk";
    c.data_dir = "/tmp/x" + std::to_string(rng() % 1000);
    c.seed = rng();
    c.latency.base_us = rng() % 1000;
    c.latency.jitter_us = rng() % 1000;
    c.ltc.cpu_cost_us = rng() % 500;
    c.ltc.local_compaction = c.workers.empty() || rng() % 2;
    c.worker.job_cost_us_per_kib = rng() % 50;
    ASSERT_TRUE(c.Validate().ok()) << c.ToJson();
    auto back = ClusterConfig::FromJson(c.ToJson());
    ASSERT_TRUE(back.ok()) << back.status().ToString();
    EXPECT_EQ(*back, c);
    auto loaded = LoadConfig(c.ToJson(), kNoEnv);
    ASSERT_TRUE(loaded.ok());
    EXPECT_EQ(*loaded, c);
  }
}

TEST(ConfigTest, EnvironmentOverridesLeaves) {
  auto c = LoadConfig(R"({"stocs": ["s0", "s1", "s2"], "workers": ["w0"]})",
                      FakeEnv({{"DLSM_N_RANGES", "16"},
                               {"DLSM_D", "3"},
                               {"DLSM_LTC_CPU_COST_US", "250"},
                               {"DLSM_LTC_LOCAL_COMPACTION", "false"},
                               {"DLSM_LTCS", "a,b"},
                               {"DLSM_LATENCY_STOC_US", "10000"},
                               {"DLSM_TIER", "memory"}}));
  ASSERT_TRUE(c.ok()) << c.status().ToString();
  EXPECT_EQ(c->n_ranges, 16);
  EXPECT_EQ(c->d, 3);
  EXPECT_EQ(c->ltc.cpu_cost_us, 250u);
  EXPECT_FALSE(c->ltc.local_compaction);
  EXPECT_EQ(c->ltcs, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c->latency.stoc_us, 10000u);
  EXPECT_EQ(c->stocs.size(), 3u);
}

TEST(ConfigTest, InvalidConfigsAreConfigErrors) {
  auto err = [](std::string_view json, const EnvLookup& env = kNoEnv) {
    return LoadConfig(json, env).status().code();
  };
  EXPECT_EQ(err(R"({"stocs": ["a"], "ltcs": ["a"]})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"d": 3})"), Code::kConfigError);  // two StoCs
  EXPECT_EQ(err(R"({"tier": "disk"})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"tier": "tape"})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"n_ranges": 0})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"colour": "blue"})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"ltc": {"colour": 1}})"), Code::kConfigError);
  EXPECT_EQ(err(R"({"n_ranges": "many"})"), Code::kConfigError);
  EXPECT_EQ(err("[1, 2"), Code::kConfigError);
  EXPECT_EQ(err(R"({"ltc": {"local_compaction": false}})"), Code::kConfigError);
  EXPECT_EQ(err("", FakeEnv({{"DLSM_N_RANGES", "12x"}})), Code::kConfigError);
  EXPECT_EQ(err("", FakeEnv({{"DLSM_SEED", "-4"}})), Code::kConfigError);
  EXPECT_EQ(err("", FakeEnv({{"DLSM_LTC_LOCAL_COMPACTION", "maybe"}})),
            Code::kConfigError);
  EXPECT_EQ(LoadConfigFile("/nonexistent/dlsm.json", kNoEnv).status().code(),
            Code::kConfigError);
}

TEST(DevClusterTest, MinimalClusterServes) {
  auto dc = DevCluster::Start(MakeConfig(1, 1, 1));
  ASSERT_TRUE(dc.ok()) << dc.status().ToString();
  auto client = (*dc)->NewClient("c");
  ASSERT_TRUE(client->Put("hello", "world").ok());
  auto v = client->Get("hello");
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v->value_or(""), "world");
}

TEST(DevClusterTest, DiskStocRestartKeepsData) {
  auto dir = std::filesystem::temp_directory_path() /
             ("dlsm_dc_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  ClusterConfig c = MakeConfig(2, 1, 0);
  c.tier = "disk";
  c.data_dir = dir.string();
  c.n_ranges = 4;
  c.ltc.memtable_bytes = 16 << 10;
  c.heartbeat_ms = 50;
  auto dc = DevCluster::Start(c);
  ASSERT_TRUE(dc.ok()) << dc.status().ToString();
  auto client = (*dc)->NewClient("c");
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 1500; ++i) {
    std::string k = "key" + std::to_string(i * 7919 % 100000);
    std::string v = std::string(40, 'a' + i % 26);
    ASSERT_TRUE(client->Put(k, v).ok());
    oracle[k] = v;
  }
  // StoC restart, then LTC restart: the new LTC process recovers every
  // range from manifests and logs kept on disk.
  ASSERT_TRUE((*dc)->KillStoc(0).ok());
  ASSERT_TRUE((*dc)->RestartStoc(0).ok());
  ASSERT_TRUE((*dc)->KillStoc(1).ok());
  ASSERT_TRUE((*dc)->RestartStoc(1).ok());
  ASSERT_TRUE((*dc)->KillLtc("ltc-0").ok());
  ASSERT_TRUE((*dc)->RestartLtc("ltc-0").ok());
  for (const auto& [k, v] : oracle) {
    auto got = client->Get(k);
    ASSERT_TRUE(got.ok()) << got.status().ToString();
    ASSERT_TRUE(got->has_value()) << k;
    EXPECT_EQ(**got, v);
  }
  dc->reset();
  std::filesystem::remove_all(dir);
}

TEST(StatusTest, FreshClusterMatchesGolden) {
  ClusterConfig c = MakeConfig(2, 2, 0);
  c.n_ranges = 4;
  c.r = 2;
  auto dc = DevCluster::Start(c);
  ASSERT_TRUE(dc.ok());
  auto st = CollectStatus((*dc)->NewTransport("status"), c.coordinator,
                          std::chrono::seconds(5));
  ASSERT_TRUE(st.ok()) << st.status().ToString();
  ExpectGolden("status_fresh.txt", FormatStatus(*st));
}

TEST(StatusTest, AddLtcShowsNewOwner) {
  ClusterConfig c = MakeConfig(2, 2, 0);
  c.n_ranges = 6;
  auto dc = DevCluster::Start(c);
  ASSERT_TRUE(dc.ok());
  auto added = (*dc)->AddLtc();
  ASSERT_TRUE(added.ok()) << added.status().ToString();
  auto st = CollectStatus((*dc)->NewTransport("status"), c.coordinator,
                          std::chrono::seconds(5));
  ASSERT_TRUE(st.ok());
  std::string text = FormatStatus(*st);
  // floor(6 / 3) = 2 ranges now belong to the new LTC.
  EXPECT_NE(text.find(*added + "  healthy  2"), std::string::npos) << text;
  EXPECT_EQ(FormatStatus(*st), text);
  EXPECT_FALSE(CollectStatus((*dc)->NewTransport("status2"), "nowhere",
                             std::chrono::seconds(1))
                   .ok());
}

}  // namespace
}  // namespace dlsm
