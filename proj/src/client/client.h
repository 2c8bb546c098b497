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

#ifndef DLSM_CLIENT_CLIENT_H_
#define DLSM_CLIENT_CLIENT_H_

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coord/view.h"
#include "ltc/ltc.h"
#include "transport/transport.h"

namespace dlsm {

struct ClientOptions {
  std::chrono::milliseconds rpc_timeout{5000};
  // Total time a single operation may spend retrying after view changes.
  std::chrono::milliseconds retry_deadline{30000};
};

// Routes requests by a cached view. NotOwner and connection failures
// refresh the view from the coordinator and retry with backoff.
// Thread-safe.
class Client {
 public:
  Client(std::shared_ptr<Transport> transport, std::string coordinator,
         ClientOptions options = {});

  Status Refresh();

  Result<PutAck> Put(std::string_view key, std::string_view value);
  Result<PutAck> Delete(std::string_view key);
  Result<std::optional<std::string>> Get(std::string_view key);
  // Rows with lower <= key < upper (empty upper = unbounded), at most
  // `limit` of them (0 = unlimited), across range boundaries.
  Result<std::vector<std::pair<std::string, std::string>>> Scan(
      std::string_view lower, std::string_view upper, uint32_t limit);

  Result<std::string> LtcStats(const std::string& ltc);
  Status AddLtc(const std::string& ltc);
  Status RemoveLtc(const std::string& ltc);

  std::shared_ptr<const ClusterView> view() const;
  uint64_t retries() const { return retries_.load(); }

 private:
  // Calls `op` on the owner of `key`, retrying on routing failures.
  Result<std::string> Routed(std::string_view key, Opcode op,
                             const std::string& payload);

  std::shared_ptr<Transport> transport_;
  std::string coordinator_;
  ClientOptions options_;
  mutable std::mutex mu_;
  std::shared_ptr<const ClusterView> view_;
  std::atomic<uint64_t> retries_{0};
};

// True for failures that a fresh view may cure.
bool IsRoutingError(const Status& s);

}  // namespace dlsm

#endif  // DLSM_CLIENT_CLIENT_H_
