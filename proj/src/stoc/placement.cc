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

#include "stoc/placement.h"

#include <algorithm>
#include <tuple>

namespace dlsm {

Result<size_t> SelectPowerOfD(const std::vector<StocCandidate>& candidates,
                              int d, std::mt19937_64& rng) {
  if (candidates.empty()) {
    return Status(Code::kNoCandidates, "no StoC candidates");
  }
  if (d < 1) return InvalidArgumentError("d must be >= 1");
  size_t n = candidates.size();
  size_t k = std::min(static_cast<size_t>(d), n);
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  // Partial Fisher-Yates: the first k slots are a uniform sample.
  for (size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  size_t best = idx[0];
  auto key = [&](size_t i) {
    return std::make_tuple(candidates[i].stats.outstanding_requests,
                           candidates[i].stats.ewma_latency_us);
  };
  for (size_t i = 1; i < k; ++i) {
    if (key(idx[i]) < key(best)) best = idx[i];
  }
  return best;
}

std::vector<StocCandidate> CandidatesFromBoard(
    const std::vector<std::string>& stocs, const StocStatsBoard* board,
    const std::vector<std::string>& exclude) {
  std::vector<StocCandidate> out;
  for (const auto& s : stocs) {
    if (std::find(exclude.begin(), exclude.end(), s) != exclude.end()) continue;
    out.push_back(StocCandidate{s, board ? board->Get(s) : StocStats{}});
  }
  return out;
}

}  // namespace dlsm
