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

#include "transport/sim_network.h"

#include <algorithm>
#include <atomic>
#include <thread>

#include "common/coding.h"

namespace dlsm {

namespace {

class SimEndpoint : public Transport {
 public:
  SimEndpoint(std::shared_ptr<SimNetwork> net, std::string node)
      : net_(std::move(net)), node_(std::move(node)) {}

  Result<Frame> Call(const std::string& to, Frame request,
                     std::chrono::milliseconds timeout) override {
    request.request_id = next_id_.fetch_add(1) + 1;
    return net_->Deliver(node_, to, request, timeout);
  }

  Status Listen(const std::string& address, Handler handler,
                std::string* bound) override {
    DLSM_RETURN_IF_ERROR(net_->Listen(address, std::move(handler)));
    if (bound != nullptr) *bound = address;
    return Status::OK();
  }

  void Unlisten(const std::string& address) override {
    net_->Unlisten(address);
  }

  std::string name() const override { return node_; }

 private:
  std::shared_ptr<SimNetwork> net_;
  std::string node_;
  std::atomic<uint64_t> next_id_{0};
};

std::pair<std::string, std::string> Unordered(const std::string& a,
                                              const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

std::shared_ptr<SimNetwork> SimNetwork::Create(SimOptions options) {
  return std::shared_ptr<SimNetwork>(new SimNetwork(options));
}

std::shared_ptr<Transport> SimNetwork::Endpoint(const std::string& node) {
  return std::make_shared<SimEndpoint>(shared_from_this(), node);
}

void SimNetwork::SetEdgeLatency(const std::string& from, const std::string& to,
                                std::chrono::microseconds base,
                                std::chrono::microseconds jitter_mean) {
  std::lock_guard<std::mutex> l(mu_);
  SampleDelay(from, to);  // materialize the edge with its seeded generator
  Edge& e = edges_.at({from, to});
  e.base = base;
  e.jitter_mean = jitter_mean;
}

std::chrono::microseconds SimNetwork::SampleDelay(const std::string& from,
                                                  const std::string& to) {
  auto key = std::make_pair(from, to);
  auto it = edges_.find(key);
  if (it == edges_.end()) {
    uint64_t seed = Mix64(options_.seed ^ Hash64(from, 0x51) ^
                          Mix64(Hash64(to, 0x7a)));
    it = edges_
             .emplace(key, Edge{options_.base_latency, options_.jitter_mean,
                                std::mt19937_64(seed)})
             .first;
  }
  Edge& e = it->second;
  auto d = e.base;
  if (e.jitter_mean.count() > 0) {
    std::exponential_distribution<double> exp(
        1.0 / static_cast<double>(e.jitter_mean.count()));
    d += std::chrono::microseconds(static_cast<int64_t>(exp(e.rng)));
  }
  return d;
}

void SimNetwork::Partition(const std::string& a, const std::string& b,
                           std::chrono::milliseconds duration) {
  if (duration.count() <= 0) return;
  std::lock_guard<std::mutex> l(mu_);
  partitions_[Unordered(a, b)] = std::chrono::steady_clock::now() + duration;
}

void SimNetwork::HealAll() {
  std::lock_guard<std::mutex> l(mu_);
  partitions_.clear();
}

bool SimNetwork::Partitioned(const std::string& a, const std::string& b) const {
  auto it = partitions_.find(Unordered(a, b));
  return it != partitions_.end() &&
         std::chrono::steady_clock::now() < it->second;
}

bool SimNetwork::IsListening(const std::string& address) const {
  std::lock_guard<std::mutex> l(mu_);
  return listeners_.count(address) > 0;
}

Status SimNetwork::Listen(const std::string& address, Handler handler) {
  std::lock_guard<std::mutex> l(mu_);
  if (listeners_.count(address)) {
    return AlreadyExistsError("address in use: " + address);
  }
  auto listener = std::make_shared<Listener>();
  listener->handler = std::move(handler);
  listeners_[address] = std::move(listener);
  return Status::OK();
}

// Handlers running on this thread, so that a handler may stop its own
// listener without waiting for itself.
namespace {
thread_local std::vector<const void*> serving;
}  // namespace

void SimNetwork::Unlisten(const std::string& address) {
  std::unique_lock<std::mutex> l(mu_);
  auto it = listeners_.find(address);
  if (it == listeners_.end()) return;
  std::shared_ptr<Listener> listener = it->second;
  listeners_.erase(it);
  int own = static_cast<int>(
      std::count(serving.begin(), serving.end(), listener.get()));
  idle_cv_.wait(l, [&] { return listener->inflight <= own; });
}

Result<Frame> SimNetwork::Deliver(const std::string& from,
                                  const std::string& to, const Frame& request,
                                  std::chrono::milliseconds timeout) {
  auto start = std::chrono::steady_clock::now();
  auto deadline = start + timeout;
  DLSM_ASSIGN_OR_RETURN(std::string wire, EncodeFrame(request));

  std::shared_ptr<Listener> handler;
  std::chrono::microseconds there, back;
  {
    std::lock_guard<std::mutex> l(mu_);
    if (Partitioned(from, to)) {
      return Status(Code::kConnectionFailed, from + " <-> " + to + " partitioned");
    }
    auto it = listeners_.find(to);
    if (it == listeners_.end()) {
      return Status(Code::kConnectionFailed, "no listener at " + to);
    }
    handler = it->second;
    ++handler->inflight;
    there = SampleDelay(from, to);
    back = SampleDelay(to, from);
  }

  auto release = [&] {
    std::lock_guard<std::mutex> l(mu_);
    --handler->inflight;
    idle_cv_.notify_all();
  };
  if (start + there > deadline) {
    release();
    std::this_thread::sleep_until(deadline);
    return Status(Code::kTimeout, "call to " + to + " timed out");
  }
  if (there.count() > 0) std::this_thread::sleep_for(there);
  Result<Frame> delivered = DecodeFrame(wire);
  if (!delivered.ok()) {
    release();
    return delivered.status();
  }
  serving.push_back(handler.get());
  Frame response = handler->handler(*delivered);
  serving.pop_back();
  release();

  Result<std::string> resp_wire = EncodeFrame(response);
  if (!resp_wire.ok()) {
    resp_wire = EncodeFrame(MakeResponse(*delivered, resp_wire.status()));
    if (!resp_wire.ok()) return resp_wire.status();
  }
  auto now = std::chrono::steady_clock::now();
  if (now + back > deadline) {
    std::this_thread::sleep_until(std::max(now, deadline));
    return Status(Code::kTimeout, "call to " + to + " timed out");
  }
  if (back.count() > 0) std::this_thread::sleep_for(back);
  {
    std::lock_guard<std::mutex> l(mu_);
    if (Partitioned(from, to)) {
      return Status(Code::kConnectionFailed, "response lost to partition");
    }
  }
  return DecodeFrame(*resp_wire);
}

}  // namespace dlsm
