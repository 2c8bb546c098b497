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

#ifndef DLSM_CLUSTER_STATUS_H_
#define DLSM_CLUSTER_STATUS_H_

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include "coord/view.h"
#include "stoc/stoc.h"
#include "transport/transport.h"

namespace dlsm {

struct LtcStatus {
  bool reachable = false;
  uint64_t ranges = 0;
  uint64_t backlog = 0;
  uint64_t flushes = 0;
  uint64_t compactions = 0;
};

struct ClusterStatus {
  ClusterView view;
  std::map<std::string, LtcStatus> ltcs;
  std::map<std::string, std::optional<StocStats>> stocs;
};

// Fetches the view from the coordinator, then every LTC's and StoC's
// stats. Unreachable members are reported, not fatal.
Result<ClusterStatus> CollectStatus(std::shared_ptr<Transport> transport,
                                    const std::string& coordinator,
                                    std::chrono::milliseconds timeout);

// Fixed-layout text: members sorted by address, ranges by lower bound,
// keys in hex. Latency figures are left out so the output is stable.
std::string FormatStatus(const ClusterStatus& status);

}  // namespace dlsm

#endif  // DLSM_CLUSTER_STATUS_H_
