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

#ifndef DLSM_BENCH_ELASTICITY_H_
#define DLSM_BENCH_ELASTICITY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bench/metrics.h"
#include "common/status.h"

namespace dlsm {

struct ElasticityOptions {
  int start_ltcs = 1;
  int max_ltcs = 4;
  int stocs = 4;
  int n_ranges = 64;
  std::string transport = "sim";
  // Emulated LTC compute per client op, on one core, so a single LTC
  // saturates at 10^6 / cpu_cost_us ops/s.
  uint64_t cpu_cost_us = 400;
  int clients_per_ltc = 10;
  double write_fraction = 0.5;
  uint64_t key_count = 100000;
  uint32_t value_size_bytes = 100;
  // Saturation: per-second p99 above factor x unloaded p99 for
  // sustain_s consecutive seconds.
  double saturation_factor = 5.0;
  int sustain_s = 5;
  int unloaded_s = 3;
  int measure_s = 5;
  int max_phase_s = 20;
  uint64_t seed = 1;
};

struct ElasticityPhase {
  int ltcs = 0;
  int clients = 0;
  bool saturated = false;
  double throughput = 0;  // mean ops/s over the measured seconds
  double p99_us = 0;      // mean per-second p99 over the measured seconds
  uint32_t first_second = 0;
  uint32_t last_second = 0;
};

struct ElasticityResult {
  RunMetrics metrics;                  // whole time series
  double unloaded_p99_us = 0;
  std::vector<ElasticityPhase> phases;  // rising, then falling
  int membership_changes = 0;
  // Table placement compared right before and after every change.
  bool placements_unchanged = true;
  size_t tables_checked = 0;
  std::string placement_diff;
};

// Drives load up, adding an LTC each time the cluster saturates, then
// lowers it, removing LTCs one at a time, on a devcluster.
Result<ElasticityResult> RunElasticity(const ElasticityOptions& options);

std::string ElasticitySummary(const ElasticityResult& r);

// EmitReport plus phases.csv.
Status EmitElasticityReport(const ElasticityResult& r, const std::string& dir);

}  // namespace dlsm

#endif  // DLSM_BENCH_ELASTICITY_H_
