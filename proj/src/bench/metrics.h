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

#ifndef DLSM_BENCH_METRICS_H_
#define DLSM_BENCH_METRICS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "common/status.h"

namespace dlsm {

struct Percentiles {
  double p50_us = 0;
  double p90_us = 0;
  double p99_us = 0;

  friend bool operator==(const Percentiles&, const Percentiles&) = default;
};

// Nearest-rank percentiles of latencies in microseconds. Sorts in place.
Percentiles ComputePercentiles(std::vector<uint32_t>& latencies_us);

struct SecondSample {
  uint32_t second = 0;       // 1-based
  uint64_t ops = 0;
  uint64_t errors = 0;
  Percentiles latency;
  uint64_t backlog = 0;      // outstanding compaction jobs
  uint32_t ltcs = 0;         // healthy LTCs in the view
  double utilization = 0;    // mean emulated CPU utilization over LTCs

  friend bool operator==(const SecondSample&, const SecondSample&) = default;
};

struct RunMetrics {
  double duration_s = 0;
  uint64_t ops = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;
  uint64_t scans = 0;
  uint64_t deletes = 0;
  uint64_t found = 0;        // reads that returned a value
  uint64_t errors = 0;
  uint64_t mismatches = 0;   // verify mode only
  std::vector<std::string> mismatch_examples;
  Percentiles latency;
  Percentiles put_latency;
  Percentiles get_latency;
  std::vector<SecondSample> seconds;
  std::map<std::string, double> ltc_utilization;

  double Throughput() const { return duration_s > 0 ? ops / duration_s : 0; }

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// One row per sampled second under a fixed header.
std::string MetricsCsv(const RunMetrics& m);
// gnuplot script plotting throughput, p99 and backlog from metrics.csv.
std::string PlotScript(const std::string& title);
std::string SummaryMarkdown(const RunMetrics& m, const std::string& title);

// Writes metrics.csv, plot.gp and summary.md under dir (created if
// missing). Output depends only on the arguments.
Status EmitReport(const RunMetrics& m, const std::string& dir,
                  const std::string& title = "dlsm benchmark");

}  // namespace dlsm

#endif  // DLSM_BENCH_METRICS_H_
