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

#ifndef DLSM_CLUSTER_DEVCLUSTER_H_
#define DLSM_CLUSTER_DEVCLUSTER_H_

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "client/client.h"
#include "cluster/config.h"
#include "coord/coordinator.h"
#include "ltc/ltc.h"
#include "stoc/stoc.h"
#include "transport/sim_network.h"
#include "worker/worker.h"

namespace dlsm {

// Component options derived from a cluster config.
StocOptions StocOptionsFor(const ClusterConfig& c, size_t index);
LtcOptions LtcOptionsFor(const ClusterConfig& c, const std::string& name);
WorkerOptions WorkerOptionsFor(const ClusterConfig& c, size_t index);
CoordinatorOptions CoordinatorOptionsFor(const ClusterConfig& c);

// Every component of a cluster in one process, over the simulator or
// loopback sockets. Components can be killed and restarted individually.
class DevCluster {
 public:
  static Result<std::unique_ptr<DevCluster>> Start(const ClusterConfig& config);
  ~DevCluster();

  void Shutdown();

  const ClusterConfig& config() const { return config_; }
  // Null on the socket transport.
  SimNetwork* sim() const { return sim_.get(); }

  std::shared_ptr<Transport> NewTransport(const std::string& node);
  std::unique_ptr<Client> NewClient(const std::string& node,
                                    ClientOptions options = {});

  Coordinator& coordinator() { return *coordinator_; }

  Status KillStoc(size_t index);
  Status RestartStoc(size_t index);
  Status KillLtc(const std::string& name);
  Status RestartLtc(const std::string& name);
  Status KillWorker(size_t index);
  Status RestartWorker(size_t index);

  // Starts a fresh LTC and has the coordinator admit it.
  Result<std::string> AddLtc();
  // Drains `name` through the coordinator, then stops it.
  Status RemoveLtc(const std::string& name);

  std::vector<std::string> LiveLtcs() const;
  Ltc* ltc(const std::string& name) const;
  WorkerServer* worker(size_t index) const;
  StocServer* stoc(size_t index) const;

  // Every table object on every live StoC, mapped to its StoC. Manifests
  // and coordinator state are excluded.
  Result<std::map<ObjectId, std::string>> Placements();
  // Flushes every LTC and waits for compactions to settle.
  Status QuiesceAll(std::chrono::milliseconds timeout);
  // Outstanding compaction jobs over all live LTCs.
  uint64_t Backlog() const;

 private:
  explicit DevCluster(ClusterConfig config);

  Status StartStoc(size_t index);
  Status StartWorker(size_t index);
  Status StartLtc(const std::string& address, std::string* bound);

  ClusterConfig config_;
  std::shared_ptr<SimNetwork> sim_;
  std::vector<std::unique_ptr<StocServer>> stocs_;
  std::vector<std::unique_ptr<WorkerServer>> workers_;
  mutable std::mutex ltc_mu_;
  std::map<std::string, std::unique_ptr<Ltc>> ltcs_;
  int next_ltc_ = 0;
  std::unique_ptr<Coordinator> coordinator_;
  std::shared_ptr<StocClient> probe_;
  bool shut_down_ = false;
};

}  // namespace dlsm

#endif  // DLSM_CLUSTER_DEVCLUSTER_H_
