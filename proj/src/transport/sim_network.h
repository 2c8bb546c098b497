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

#ifndef DLSM_TRANSPORT_SIM_NETWORK_H_
#define DLSM_TRANSPORT_SIM_NETWORK_H_

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "transport/transport.h"

namespace dlsm {

struct SimOptions {
  uint64_t seed = 1;
  // One-way latency on every directed edge: base + Exp(mean = jitter).
  std::chrono::microseconds base_latency{0};
  std::chrono::microseconds jitter_mean{0};
};

// In-process network. Requests are encoded and decoded through the frame
// codec exactly as on sockets, then handed to the destination's handler on
// the caller's thread after the sampled one-way delay. Latency draws come
// from a per-edge generator seeded by (seed, from, to), so the sequence of
// delays on an edge is reproducible.
class SimNetwork : public std::enable_shared_from_this<SimNetwork> {
 public:
  static std::shared_ptr<SimNetwork> Create(SimOptions options = {});

  // Transport for the node called `node`.
  std::shared_ptr<Transport> Endpoint(const std::string& node);

  // Overrides latency on the directed edge from -> to.
  void SetEdgeLatency(const std::string& from, const std::string& to,
                      std::chrono::microseconds base,
                      std::chrono::microseconds jitter_mean);

  // Calls between a and b (either direction) fail with ConnectionFailed
  // until `duration` has elapsed. A zero duration is a no-op.
  void Partition(const std::string& a, const std::string& b,
                 std::chrono::milliseconds duration);
  void HealAll();

  bool IsListening(const std::string& address) const;

  // Internal; used by endpoints.
  Result<Frame> Deliver(const std::string& from, const std::string& to,
                        const Frame& request,
                        std::chrono::milliseconds timeout);
  Status Listen(const std::string& address, Handler handler);
  void Unlisten(const std::string& address);

 private:
  explicit SimNetwork(SimOptions options) : options_(options) {}

  struct Edge {
    std::chrono::microseconds base;
    std::chrono::microseconds jitter_mean;
    std::mt19937_64 rng;
  };

  std::chrono::microseconds SampleDelay(const std::string& from,
                                        const std::string& to);
  bool Partitioned(const std::string& a, const std::string& b) const;

  struct Listener {
    Handler handler;
    int inflight = 0;  // guarded by mu_
  };

  SimOptions options_;
  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  std::map<std::string, std::shared_ptr<Listener>> listeners_;
  std::map<std::pair<std::string, std::string>, Edge> edges_;
  std::map<std::pair<std::string, std::string>,
           std::chrono::steady_clock::time_point>
      partitions_;
};

}  // namespace dlsm

#endif  // DLSM_TRANSPORT_SIM_NETWORK_H_
