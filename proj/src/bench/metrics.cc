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

#include "bench/metrics.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dlsm {

namespace {

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

std::string Format(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  int n = std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf, std::min<size_t>(n < 0 ? 0 : n, sizeof(buf) - 1));
}

Status WriteFile(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.close();
  if (!out) return IoError("cannot write " + path.string());
  return Status::OK();
}

}  // namespace

Percentiles ComputePercentiles(std::vector<uint32_t>& v) {
  Percentiles p;
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  auto rank = [&](double q) {
    auto k = static_cast<size_t>(std::ceil(q * v.size()));
    return static_cast<double>(v[std::clamp<size_t>(k, 1, v.size()) - 1]);
  };
  p.p50_us = rank(0.50);
  p.p90_us = rank(0.90);
  p.p99_us = rank(0.99);
  return p;
}

std::string MetricsCsv(const RunMetrics& m) {
  std::string out =
      "second,ops_per_sec,errors,p50_us,p90_us,p99_us,backlog,ltcs,"
      "utilization\n";
  for (const auto& s : m.seconds) {
    out += Format("%u,%" PRIu64 ",%" PRIu64 ",%.0f,%.0f,%.0f,%" PRIu64
                  ",%u,%.4f\n",
                  s.second, s.ops, s.errors, s.latency.p50_us,
                  s.latency.p90_us, s.latency.p99_us, s.backlog, s.ltcs,
                  s.utilization);
  }
  return out;
}

std::string PlotScript(const std::string& title) {
  std::string t = title;
  std::replace(t.begin(), t.end(), '"', '\'');
  return "set datafile separator ','\n"
         "set terminal pngcairo size 1200,800\n"
         "set output 'metrics.png'\n"
         "set multiplot layout 3,1 title \"" + t + "\"\n"
         "set xlabel 'second'\n"
         "set ylabel 'ops/s'\n"
         "plot 'metrics.csv' using 1:2 skip 1 with steps title 'throughput'\n"
         "set ylabel 'p99 (us)'\n"
         "plot 'metrics.csv' using 1:6 skip 1 with lines title 'p99'\n"
         "set ylabel 'jobs'\n"
         "plot 'metrics.csv' using 1:7 skip 1 with lines title 'backlog', "
         "'' using 1:8 skip 1 with steps title 'LTCs'\n"
         "unset multiplot\n";
}

std::string SummaryMarkdown(const RunMetrics& m, const std::string& title) {
  std::string out = "# " + title + "\n\n";
  out += "| metric | value |\n|---|---|\n";
  out += Format("| duration_s | %.3f |\n", m.duration_s);
  out += Format("| ops | %" PRIu64 " |\n", m.ops);
  out += Format("| throughput_ops_per_sec | %.1f |\n", m.Throughput());
  out += Format("| reads | %" PRIu64 " |\n", m.reads);
  out += Format("| reads_found | %" PRIu64 " |\n", m.found);
  out += Format("| writes | %" PRIu64 " |\n", m.writes);
  out += Format("| deletes | %" PRIu64 " |\n", m.deletes);
  out += Format("| scans | %" PRIu64 " |\n", m.scans);
  out += Format("| errors | %" PRIu64 " |\n", m.errors);
  out += Format("| mismatches | %" PRIu64 " |\n", m.mismatches);
  out += Format("| p50_us | %.0f |\n", m.latency.p50_us);
  out += Format("| p90_us | %.0f |\n", m.latency.p90_us);
  out += Format("| p99_us | %.0f |\n", m.latency.p99_us);
  out += Format("| put_p99_us | %.0f |\n", m.put_latency.p99_us);
  out += Format("| get_p99_us | %.0f |\n", m.get_latency.p99_us);
  if (!m.ltc_utilization.empty()) {
    out += "\n| LTC | utilization |\n|---|---|\n";
    for (const auto& [ltc, u] : m.ltc_utilization) {
      out += Format("| %s | %.4f |\n", ltc.c_str(), u);
    }
  }
  if (!m.mismatch_examples.empty()) {
    out += "\n## Mismatches\n\n";
    for (const auto& e : m.mismatch_examples) out += "- " + e + "\n";
  }
  return out;
}

Status EmitReport(const RunMetrics& m, const std::string& dir,
                  const std::string& title) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return IoError("cannot create " + dir + ": " + ec.message());
  std::filesystem::path base(dir);
  DLSM_RETURN_IF_ERROR(WriteFile(base / "metrics.csv", MetricsCsv(m)));
  DLSM_RETURN_IF_ERROR(WriteFile(base / "plot.gp", PlotScript(title)));
  DLSM_RETURN_IF_ERROR(
      WriteFile(base / "summary.md", SummaryMarkdown(m, title)));
  return Status::OK();
}

}  // namespace dlsm
