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

#ifndef DLSM_COORD_COORDINATOR_H_
#define DLSM_COORD_COORDINATOR_H_

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "coord/view.h"
#include "stoc/stoc.h"
#include "transport/transport.h"

namespace dlsm {

// Object range reserved for persisted coordinator state.
inline constexpr uint32_t kCoordinatorRangeId = 0xFFFFFFFF;

struct CoordinatorOptions {
  int n_ranges = 64;
  int log_replicas = 1;
  std::vector<std::string> ltcs;   // initial members
  std::vector<std::string> stocs;
  std::string state_stoc;          // defaults to stocs[0]
  std::chrono::milliseconds heartbeat_interval{500};
  int missed_heartbeats = 3;
  std::chrono::milliseconds rpc_timeout{10000};
  std::chrono::milliseconds load_time_constant{10000};
  std::chrono::milliseconds load_stale_after{10000};
};

// Owns the range assignment. View changes are serialized; readers get the
// latest published immutable view.
class Coordinator {
 public:
  Coordinator(CoordinatorOptions options, std::shared_ptr<Transport> transport);
  ~Coordinator();

  // Resumes from persisted state if any, otherwise bootstraps and asks
  // every LTC to adopt its ranges. Then starts heartbeating.
  Status Start(const std::string& address, std::string* bound = nullptr);
  void Stop();

  std::shared_ptr<const ClusterView> View() const;
  Status ReportLoad(const LoadReport& report);
  RangeLoad Loads() const;

  Status AddLtc(const std::string& ltc);
  Status RemoveLtc(const std::string& ltc);

  // One failure-detection and reconciliation round.
  void HeartbeatOnce();

  const std::string& address() const { return address_; }

 private:
  Status Publish(ClusterView next);
  Result<std::optional<ClusterView>> LoadPersisted();
  Status AdoptOn(const Assignment& a, std::optional<RangeManifest> manifest);
  Result<RangeManifest> ReleaseOn(const std::string& ltc, uint32_t range_id);
  Result<std::vector<RangeDescriptor>> Heartbeat(const std::string& ltc);
  // Moves one range; publishes the outcome. Caller holds change_mu_.
  Status ExecuteMove(const Move& m, bool owner_dead);
  Status SetHealth(const std::string& ltc, bool healthy);
  void Failover(const std::string& ltc);
  void HeartbeatLoop();
  void RegisterHandlers();

  CoordinatorOptions options_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<StocClient> stoc_;
  Dispatcher dispatcher_;
  std::string address_;

  std::mutex change_mu_;
  mutable std::mutex view_mu_;
  std::shared_ptr<const ClusterView> view_;

  mutable std::mutex load_mu_;
  LoadTracker loads_;

  std::map<std::string, int> misses_;  // heartbeat thread only

  std::atomic<bool> stopping_{false};
  std::mutex hb_mu_;
  std::condition_variable hb_cv_;
  std::thread heartbeat_;
};

}  // namespace dlsm

#endif  // DLSM_COORD_COORDINATOR_H_
