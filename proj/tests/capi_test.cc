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

#include "dlsm/dlsm.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace {

std::string Take(char* s) {
  std::string out = s != nullptr ? s : "";
  dlsm_free(s);
  return out;
}

dlsm_config* Parse(const std::string& json) {
  dlsm_config* c = nullptr;
  char* err = nullptr;
  int rc = dlsm_config_parse(json.c_str(), &c, &err);
  EXPECT_EQ(rc, DLSM_OK) << Take(err);
  return c;
}

TEST(CApiTest, CodeNames) {
  EXPECT_STREQ(dlsm_code_name(DLSM_OK), "OK");
  EXPECT_STREQ(dlsm_code_name(DLSM_NOT_OWNER), "NotOwner");
  EXPECT_STREQ(dlsm_code_name(DLSM_CONFIG_ERROR), "ConfigError");
}

TEST(CApiTest, ConfigRenderParseRoundTrip) {
  dlsm_config* a = Parse(R"({"n_ranges": 8, "stocs": ["s0", "s1", "s2"]})");
  ASSERT_NE(a, nullptr);
  std::string rendered = Take(dlsm_config_render(a));
  dlsm_config* b = Parse(rendered);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(Take(dlsm_config_render(b)), rendered);
  dlsm_config_destroy(a);
  dlsm_config_destroy(b);
}

TEST(CApiTest, ConfigErrorsCarryMessages) {
  dlsm_config* c = nullptr;
  char* err = nullptr;
  EXPECT_EQ(dlsm_config_parse(R"({"no_such_field": 1})", &c, &err),
            DLSM_CONFIG_ERROR);
  EXPECT_NE(Take(err).find("no_such_field"), std::string::npos);
  EXPECT_EQ(c, nullptr);

  err = nullptr;
  EXPECT_EQ(dlsm_config_load("/nonexistent/dlsm.json", &c, &err),
            DLSM_CONFIG_ERROR);
  EXPECT_FALSE(Take(err).empty());

  EXPECT_EQ(dlsm_config_parse(nullptr, &c, nullptr), DLSM_INVALID_ARGUMENT);
}

TEST(CApiTest, DevclusterPutGetDelete) {
  dlsm_config* config = Parse(
      R"({"n_ranges": 4, "stocs": ["stoc-0", "stoc-1"], "ltcs": ["ltc-0"]})");
  dlsm_cluster* cluster = nullptr;
  char* err = nullptr;
  ASSERT_EQ(dlsm_devcluster_start(config, &cluster, &err), DLSM_OK)
      << Take(err);
  dlsm_client* client = nullptr;
  ASSERT_EQ(dlsm_devcluster_client(cluster, &client, &err), DLSM_OK);

  ASSERT_EQ(dlsm_put(client, "k\0ey", 4, "v", 1, &err), DLSM_OK) << Take(err);
  char* value = nullptr;
  size_t len = 0;
  int found = 0;
  ASSERT_EQ(dlsm_get(client, "k\0ey", 4, &value, &len, &found, &err), DLSM_OK);
  EXPECT_EQ(found, 1);
  EXPECT_EQ(std::string(value, len), "v");
  dlsm_free(value);

  ASSERT_EQ(dlsm_delete(client, "k\0ey", 4, &err), DLSM_OK);
  ASSERT_EQ(dlsm_get(client, "k\0ey", 4, &value, &len, &found, &err), DLSM_OK);
  EXPECT_EQ(found, 0);
  EXPECT_EQ(value, nullptr);

  char* text = nullptr;
  ASSERT_EQ(dlsm_devcluster_status(cluster, &text, &err), DLSM_OK);
  EXPECT_NE(Take(text).find("ltc-0"), std::string::npos);

  char* added = nullptr;
  ASSERT_EQ(dlsm_devcluster_add_ltc(cluster, &added, &err), DLSM_OK)
      << Take(err);
  std::string added_name = Take(added);
  EXPECT_EQ(added_name, "ltc-1");
  ASSERT_EQ(dlsm_devcluster_remove_ltc(cluster, "ltc-0", &err), DLSM_OK)
      << Take(err);
  EXPECT_EQ(dlsm_devcluster_remove_ltc(cluster, "ltc-1", &err), DLSM_LAST_LTC);
  Take(err);

  dlsm_client_close(client);
  dlsm_devcluster_stop(cluster);
  dlsm_config_destroy(config);
}

TEST(CApiTest, ServersOverSockets) {
  std::string json = R"({"transport": "tcp", "n_ranges": 2, "d": 1,
    "coordinator": "127.0.0.1:0", "stocs": ["127.0.0.1:0"],
    "ltcs": ["127.0.0.1:0"]})";
  dlsm_config* config = Parse(json);
  char* err = nullptr;
  dlsm_server* stoc = nullptr;
  ASSERT_EQ(dlsm_server_start(config, "stoc", 0, &stoc, &err), DLSM_OK)
      << Take(err);
  std::string stoc_addr = dlsm_server_address(stoc);
  EXPECT_NE(stoc_addr, "127.0.0.1:0");

  // The LTC learns the StoC's bound address from a second config.
  dlsm_config* with_stoc = Parse(R"({"transport": "tcp", "n_ranges": 2,
    "d": 1, "coordinator": "127.0.0.1:0", "stocs": [")" + stoc_addr +
                                 R"("], "ltcs": ["127.0.0.1:0"]})");
  dlsm_server* ltc = nullptr;
  ASSERT_EQ(dlsm_server_start(with_stoc, "ltc", 0, &ltc, &err), DLSM_OK)
      << Take(err);
  std::string ltc_addr = dlsm_server_address(ltc);

  dlsm_config* full = Parse(R"({"transport": "tcp", "n_ranges": 2, "d": 1,
    "coordinator": "127.0.0.1:0", "stocs": [")" + stoc_addr +
                            R"("], "ltcs": [")" + ltc_addr + R"("]})");
  dlsm_server* coord = nullptr;
  ASSERT_EQ(dlsm_server_start(full, "coord", 0, &coord, &err), DLSM_OK)
      << Take(err);
  std::string coord_addr = dlsm_server_address(coord);

  dlsm_client* client = nullptr;
  ASSERT_EQ(dlsm_client_open(coord_addr.c_str(), &client, &err), DLSM_OK)
      << Take(err);
  ASSERT_EQ(dlsm_put(client, "a", 1, "1", 1, &err), DLSM_OK) << Take(err);
  char* value = nullptr;
  size_t len = 0;
  int found = 0;
  ASSERT_EQ(dlsm_get(client, "a", 1, &value, &len, &found, &err), DLSM_OK);
  EXPECT_EQ(std::string(value, len), "1");
  dlsm_free(value);

  char* text = nullptr;
  ASSERT_EQ(dlsm_cluster_status(coord_addr.c_str(), &text, &err), DLSM_OK)
      << Take(err);
  EXPECT_NE(Take(text).find(ltc_addr), std::string::npos);

  EXPECT_EQ(dlsm_server_start(full, "ltc", 5, &ltc, &err), DLSM_CONFIG_ERROR);
  Take(err);
  EXPECT_EQ(dlsm_server_start(full, "router", 0, &ltc, &err),
            DLSM_CONFIG_ERROR);
  Take(err);

  dlsm_client_close(client);
  dlsm_server_stop(coord);
  dlsm_server_stop(ltc);
  dlsm_server_stop(stoc);
  dlsm_config_destroy(full);
  dlsm_config_destroy(with_stoc);
  dlsm_config_destroy(config);
}

TEST(CApiTest, BenchRunVerifyWritesReport) {
  auto dir = std::filesystem::temp_directory_path() / "dlsm_capi_bench";
  std::filesystem::remove_all(dir);
  const char* spec = R"({"read_fraction": 0.5, "key_count": 500,
    "value_size_bytes": 16, "ops": 2000, "duration_s": 0,
    "client_threads": 2, "verify": true})";
  char* summary = nullptr;
  char* err = nullptr;
  ASSERT_EQ(dlsm_bench_run(spec, nullptr, nullptr, dir.c_str(), &summary, &err),
            DLSM_OK)
      << Take(err);
  EXPECT_NE(Take(summary).find("mismatches"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "plot.gp"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.md"));

  EXPECT_EQ(dlsm_bench_run(R"({"read_fraction": 2})", nullptr, nullptr,
                           dir.c_str(), nullptr, &err),
            DLSM_CONFIG_ERROR);
  Take(err);
  std::filesystem::remove_all(dir);
}

}  // namespace
