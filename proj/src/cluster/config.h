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

#ifndef DLSM_CLUSTER_CONFIG_H_
#define DLSM_CLUSTER_CONFIG_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "common/status.h"

namespace dlsm {

// Cluster layout and tuning. Rendered as JSON; every leaf can be overridden
// by an environment variable DLSM_<PATH>, where PATH is the upper-cased
// field path joined by '_' (e.g. DLSM_N_RANGES, DLSM_LTC_CPU_COST_US).
// List fields take comma-separated values.
struct ClusterConfig {
  std::string transport = "sim";  // "sim" | "tcp"
  std::string coordinator = "coord";
  std::vector<std::string> stocs = {"stoc-0", "stoc-1"};
  std::vector<std::string> ltcs = {"ltc-0"};
  std::vector<std::string> workers;

  int n_ranges = 64;
  int d = 2;
  int r = 1;                       // log replicas per range
  std::string tier = "memory";     // "memory" | "disk"
  std::string data_dir;            // required for the disk tier
  uint64_t seed = 1;

  struct Latency {
    uint64_t base_us = 0;          // simulator one-way latency
    uint64_t jitter_us = 0;        // mean of the exponential jitter
    uint64_t stoc_us = 0;          // injected at every StoC

    friend bool operator==(const Latency&, const Latency&) = default;
  } latency;

  struct Ltc {
    uint64_t memtable_bytes = 4u << 20;
    int max_immutables = 4;
    uint64_t max_output_bytes = 4u << 20;
    uint64_t block_size_bytes = 4096;
    int l0_trigger = 4;
    uint64_t level1_target_bytes = 64u << 20;
    int size_ratio = 10;
    bool local_compaction = true;
    uint64_t cpu_cost_us = 0;
    int cpu_cores = 1;
    uint64_t report_interval_ms = 1000;

    friend bool operator==(const Ltc&, const Ltc&) = default;
  } ltc;

  struct Worker {
    int max_concurrent = 1;
    uint64_t job_fixed_cost_us = 0;
    uint64_t job_cost_us_per_kib = 0;

    friend bool operator==(const Worker&, const Worker&) = default;
  } worker;

  uint64_t heartbeat_ms = 500;
  int missed_heartbeats = 3;
  uint64_t rpc_timeout_ms = 10000;

  // Addresses are unique and every parameter is within bounds.
  Status Validate() const;

  std::string ToJson() const;
  // Parses JSON; fields absent from the document keep their defaults.
  // Unknown fields are ConfigError.
  static Result<ClusterConfig> FromJson(std::string_view json);

  friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

// Names components "stoc-i", "ltc-i", "worker-i" (sim) or assigns
// consecutive loopback ports from base_port (tcp).
ClusterConfig MakeConfig(int n_stocs, int n_ltcs, int n_workers,
                         const std::string& transport = "sim",
                         int base_port = 0);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
std::optional<std::string> GetEnv(const std::string& name);

// Applies DLSM_<PATH> overrides to a JSON document (empty = defaults),
// then parses and validates it.
Result<ClusterConfig> LoadConfig(std::string_view json,
                                 const EnvLookup& env = GetEnv);
Result<ClusterConfig> LoadConfigFile(const std::string& path,
                                     const EnvLookup& env = GetEnv);

}  // namespace dlsm

#endif  // DLSM_CLUSTER_CONFIG_H_
