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

#ifndef DLSM_STOC_PLACEMENT_H_
#define DLSM_STOC_PLACEMENT_H_

#include <random>
#include <string>
#include <vector>

#include "stoc/stoc.h"

namespace dlsm {

struct StocCandidate {
  std::string address;
  StocStats stats;
};

// Samples d distinct candidates uniformly and returns the index of the one
// with the smallest (outstanding_requests, ewma_latency_us). Ties go to the
// earlier sample.
Result<size_t> SelectPowerOfD(const std::vector<StocCandidate>& candidates,
                              int d, std::mt19937_64& rng);

// Candidates for `stocs` with the stats currently on the board, minus the
// addresses in `exclude`.
std::vector<StocCandidate> CandidatesFromBoard(
    const std::vector<std::string>& stocs, const StocStatsBoard* board,
    const std::vector<std::string>& exclude = {});

}  // namespace dlsm

#endif  // DLSM_STOC_PLACEMENT_H_
