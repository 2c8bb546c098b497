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

#ifndef DLSM_COORD_VIEW_H_
#define DLSM_COORD_VIEW_H_

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "ltc/manifest.h"

namespace dlsm {

struct LtcInfo {
  std::string address;  // also the LTC's identity
  bool healthy = true;

  friend bool operator==(const LtcInfo&, const LtcInfo&) = default;
};

struct Assignment {
  RangeDescriptor desc;
  std::string ltc;
  std::vector<std::string> log_stocs;  // log_stocs[0] is the home StoC

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Published, immutable snapshot of who serves what.
struct ClusterView {
  uint64_t version = 0;
  std::vector<LtcInfo> ltcs;
  std::vector<std::string> stocs;
  std::vector<Assignment> ranges;  // ordered by lower bound

  // The unique assignment whose range contains key.
  const Assignment* Route(std::string_view key) const;
  const Assignment* Find(uint32_t range_id) const;
  const LtcInfo* FindLtc(std::string_view address) const;
  std::vector<uint32_t> RangesOf(std::string_view ltc) const;
  size_t HealthyLtcs() const;

  // Ranges tile the key space and every owner is a listed LTC.
  Status CheckPartition() const;

  std::string Encode() const;
  static Result<ClusterView> Decode(std::string_view bytes);

  friend bool operator==(const ClusterView&, const ClusterView&) = default;
};

// Splits the key space into n contiguous ranges at uniform two-byte
// prefixes, deals them round-robin over `ltcs` and gives range i the log
// StoCs stocs[(i + j) % m] for j < log_replicas. All epochs start at 1.
Result<ClusterView> Bootstrap(int n_ranges, const std::vector<std::string>& ltcs,
                              const std::vector<std::string>& stocs,
                              int log_replicas);

// Lower bound of range i of n under the uniform two-byte split.
std::string UniformSplitPoint(int i, int n);

struct Move {
  uint32_t range_id = 0;
  std::string from;
  std::string to;

  friend bool operator==(const Move&, const Move&) = default;
};

using RangeLoad = std::map<uint32_t, double>;

// Moves floor(n / (k + 1)) ranges to the new LTC, where k counts healthy
// members. Each step takes the hottest range (ties: lowest range_id) among
// donors owning at least two more ranges than the newcomer.
Result<std::vector<Move>> PlanAddLtc(const ClusterView& view,
                                     const std::string& ltc,
                                     const RangeLoad& load);

// Hands every range of `ltc`, hottest first, to the healthy survivor with
// the fewest ranges, then the least load, then the smallest address.
Result<std::vector<Move>> PlanRemoveLtc(const ClusterView& view,
                                        const std::string& ltc,
                                        const RangeLoad& load);

// Same placement rule for the ranges of an LTC declared dead. Returns
// nothing when no healthy LTC is left.
std::vector<Move> PlanFailover(const ClusterView& view, const std::string& dead,
                               const RangeLoad& load);

// Applies moves: new owners, epochs bumped on moved ranges only, version
// bumped once.
ClusterView ApplyMoves(const ClusterView& view, const std::vector<Move>& moves);

// Per-range request rate, smoothed with a 10 s time constant. Ranges whose
// last report is older than the staleness bound read as unloaded.
class LoadTracker {
 public:
  using Clock = std::chrono::steady_clock;

  explicit LoadTracker(
      std::chrono::milliseconds time_constant = std::chrono::seconds(10),
      std::chrono::milliseconds stale_after = std::chrono::seconds(10))
      : tau_(time_constant), stale_after_(stale_after) {}

  void Report(uint32_t range_id, double ops_per_sec, Clock::time_point now);
  RangeLoad Loads(Clock::time_point now) const;
  void Forget(uint32_t range_id) { entries_.erase(range_id); }

 private:
  struct Entry {
    double ewma = 0;
    Clock::time_point updated;
  };
  std::chrono::milliseconds tau_;
  std::chrono::milliseconds stale_after_;
  std::map<uint32_t, Entry> entries_;
};

}  // namespace dlsm

#endif  // DLSM_COORD_VIEW_H_
