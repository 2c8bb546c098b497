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

#include "cluster/devcluster.h"

#include <filesystem>

#include "transport/tcp_transport.h"

namespace dlsm {

namespace {

std::string DirName(const std::string& address) {
  std::string out;
  for (char c : address) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

StocOptions StocOptionsFor(const ClusterConfig& c, size_t index) {
  StocOptions o;
  o.store.tier = c.tier == "disk" ? Tier::kDisk : Tier::kMemory;
  if (o.store.tier == Tier::kDisk) {
    o.store.dir = (std::filesystem::path(c.data_dir) /
                   DirName(c.stocs.at(index))).string();
  }
  o.inject_latency_us = c.latency.stoc_us;
  o.seed = Mix64(c.seed ^ (0x5000 + index));
  return o;
}

LtcOptions LtcOptionsFor(const ClusterConfig& c, const std::string& name) {
  LtcOptions o;
  o.name = name;
  o.stocs = c.stocs;
  o.workers = c.workers;
  o.coordinator = c.coordinator;
  o.d = c.d;
  o.memtable_bytes = c.ltc.memtable_bytes;
  o.max_immutables = static_cast<size_t>(c.ltc.max_immutables);
  o.sst.block_size_bytes = c.ltc.block_size_bytes;
  o.policy.l0_trigger = c.ltc.l0_trigger;
  o.policy.level1_target_bytes = c.ltc.level1_target_bytes;
  o.policy.size_ratio = c.ltc.size_ratio;
  o.max_output_bytes = c.ltc.max_output_bytes;
  o.local_compaction = c.ltc.local_compaction;
  o.cpu_cost_us = c.ltc.cpu_cost_us;
  o.cpu_cores = c.ltc.cpu_cores;
  o.seed = Mix64(c.seed ^ Hash64(name));
  o.rpc_timeout = std::chrono::milliseconds(c.rpc_timeout_ms);
  o.report_interval = std::chrono::milliseconds(c.ltc.report_interval_ms);
  return o;
}

WorkerOptions WorkerOptionsFor(const ClusterConfig& c, size_t index) {
  WorkerOptions o;
  o.max_concurrent = c.worker.max_concurrent;
  o.job_fixed_cost_us = c.worker.job_fixed_cost_us;
  o.job_cost_us_per_kib = c.worker.job_cost_us_per_kib;
  o.seed = Mix64(c.seed ^ (0x7000 + index));
  o.stoc_timeout = std::chrono::milliseconds(c.rpc_timeout_ms);
  return o;
}

CoordinatorOptions CoordinatorOptionsFor(const ClusterConfig& c) {
  CoordinatorOptions o;
  o.n_ranges = c.n_ranges;
  o.log_replicas = c.r;
  o.ltcs = c.ltcs;
  o.stocs = c.stocs;
  o.heartbeat_interval = std::chrono::milliseconds(c.heartbeat_ms);
  o.missed_heartbeats = c.missed_heartbeats;
  o.rpc_timeout = std::chrono::milliseconds(c.rpc_timeout_ms);
  return o;
}

DevCluster::DevCluster(ClusterConfig config) : config_(std::move(config)) {}

Result<std::unique_ptr<DevCluster>> DevCluster::Start(
    const ClusterConfig& config) {
  DLSM_RETURN_IF_ERROR(config.Validate());
  std::unique_ptr<DevCluster> c(new DevCluster(config));
  if (config.transport == "sim") {
    SimOptions so;
    so.seed = config.seed;
    so.base_latency = std::chrono::microseconds(config.latency.base_us);
    so.jitter_mean = std::chrono::microseconds(config.latency.jitter_us);
    c->sim_ = SimNetwork::Create(so);
  }
  c->probe_ = std::make_shared<StocClient>(
      c->NewTransport("devcluster-probe"),
      std::chrono::milliseconds(config.rpc_timeout_ms));
  c->stocs_.resize(config.stocs.size());
  for (size_t i = 0; i < config.stocs.size(); ++i) {
    DLSM_RETURN_IF_ERROR(c->StartStoc(i));
  }
  c->workers_.resize(config.workers.size());
  for (size_t i = 0; i < config.workers.size(); ++i) {
    DLSM_RETURN_IF_ERROR(c->StartWorker(i));
  }
  for (const auto& name : config.ltcs) {
    DLSM_RETURN_IF_ERROR(c->StartLtc(name, nullptr));
  }
  c->next_ltc_ = static_cast<int>(config.ltcs.size());
  c->coordinator_ = std::make_unique<Coordinator>(
      CoordinatorOptionsFor(config), c->NewTransport(config.coordinator));
  DLSM_RETURN_IF_ERROR(c->coordinator_->Start(config.coordinator));
  return c;
}

DevCluster::~DevCluster() { Shutdown(); }

void DevCluster::Shutdown() {
  if (shut_down_) return;
  shut_down_ = true;
  if (coordinator_) coordinator_->Stop();
  {
    std::lock_guard<std::mutex> l(ltc_mu_);
    for (auto& [_, ltc] : ltcs_) ltc->Stop();
    ltcs_.clear();
  }
  for (auto& w : workers_) {
    if (w) w->Stop();
  }
  workers_.clear();
  for (auto& s : stocs_) {
    if (s) s->Stop();
  }
  stocs_.clear();
}

std::shared_ptr<Transport> DevCluster::NewTransport(const std::string& node) {
  if (sim_) return sim_->Endpoint(node);
  return NewTcpTransport(node);
}

std::unique_ptr<Client> DevCluster::NewClient(const std::string& node,
                                              ClientOptions options) {
  return std::make_unique<Client>(NewTransport(node), config_.coordinator,
                                  options);
}

Status DevCluster::StartStoc(size_t i) {
  StocOptions o = StocOptionsFor(config_, i);
  if (o.store.tier == Tier::kDisk) {
    std::error_code ec;
    std::filesystem::create_directories(o.store.dir, ec);
    if (ec) return IoError("cannot create " + o.store.dir + ": " + ec.message());
  }
  DLSM_ASSIGN_OR_RETURN(auto server,
                        StocServer::Open(o, NewTransport(config_.stocs[i])));
  DLSM_RETURN_IF_ERROR(server->Start(config_.stocs[i]));
  stocs_[i] = std::move(server);
  return Status::OK();
}

Status DevCluster::StartWorker(size_t i) {
  auto w = std::make_unique<WorkerServer>(WorkerOptionsFor(config_, i),
                                          NewTransport(config_.workers[i]));
  DLSM_RETURN_IF_ERROR(w->Start(config_.workers[i]));
  workers_[i] = std::move(w);
  return Status::OK();
}

Status DevCluster::StartLtc(const std::string& address, std::string* bound) {
  bool ephemeral = address.ends_with(":0");
  auto ltc = std::make_unique<Ltc>(
      LtcOptionsFor(config_, ephemeral ? "" : address),
      NewTransport(address));
  std::string actual;
  DLSM_RETURN_IF_ERROR(ltc->Start(address, &actual));
  if (bound != nullptr) *bound = actual;
  std::lock_guard<std::mutex> l(ltc_mu_);
  ltcs_[actual] = std::move(ltc);
  return Status::OK();
}

Status DevCluster::KillStoc(size_t i) {
  if (i >= stocs_.size() || !stocs_[i]) return NotFoundError("no such StoC");
  stocs_[i]->Stop();
  stocs_[i].reset();
  return Status::OK();
}

Status DevCluster::RestartStoc(size_t i) {
  if (i >= stocs_.size()) return NotFoundError("no such StoC");
  if (stocs_[i]) return Status::OK();
  return StartStoc(i);
}

Status DevCluster::KillLtc(const std::string& name) {
  std::unique_ptr<Ltc> victim;
  {
    std::lock_guard<std::mutex> l(ltc_mu_);
    auto it = ltcs_.find(name);
    if (it == ltcs_.end()) return NotFoundError("no such LTC " + name);
    victim = std::move(it->second);
    ltcs_.erase(it);
  }
  victim->Stop();
  return Status::OK();
}

Status DevCluster::RestartLtc(const std::string& name) {
  {
    std::lock_guard<std::mutex> l(ltc_mu_);
    if (ltcs_.count(name) != 0) return Status::OK();
  }
  return StartLtc(name, nullptr);
}

Status DevCluster::KillWorker(size_t i) {
  if (i >= workers_.size() || !workers_[i]) return NotFoundError("no such worker");
  workers_[i]->Stop();
  workers_[i].reset();
  return Status::OK();
}

Status DevCluster::RestartWorker(size_t i) {
  if (i >= workers_.size()) return NotFoundError("no such worker");
  if (workers_[i]) return Status::OK();
  return StartWorker(i);
}

Result<std::string> DevCluster::AddLtc() {
  std::string address;
  if (sim_) {
    std::lock_guard<std::mutex> l(ltc_mu_);
    do {
      address = "ltc-" + std::to_string(next_ltc_++);
    } while (ltcs_.count(address) != 0);
  } else {
    address = "127.0.0.1:0";
  }
  std::string bound;
  DLSM_RETURN_IF_ERROR(StartLtc(address, &bound));
  Status s = coordinator_->AddLtc(bound);
  if (!s.ok()) {
    (void)KillLtc(bound);
    return s;
  }
  return bound;
}

Status DevCluster::RemoveLtc(const std::string& name) {
  DLSM_RETURN_IF_ERROR(coordinator_->RemoveLtc(name));
  return KillLtc(name);
}

std::vector<std::string> DevCluster::LiveLtcs() const {
  std::lock_guard<std::mutex> l(ltc_mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : ltcs_) out.push_back(name);
  return out;
}

Ltc* DevCluster::ltc(const std::string& name) const {
  std::lock_guard<std::mutex> l(ltc_mu_);
  auto it = ltcs_.find(name);
  return it == ltcs_.end() ? nullptr : it->second.get();
}

WorkerServer* DevCluster::worker(size_t i) const {
  return i < workers_.size() ? workers_[i].get() : nullptr;
}

StocServer* DevCluster::stoc(size_t i) const {
  return i < stocs_.size() ? stocs_[i].get() : nullptr;
}

Result<std::map<ObjectId, std::string>> DevCluster::Placements() {
  std::map<ObjectId, std::string> out;
  for (size_t i = 0; i < stocs_.size(); ++i) {
    if (!stocs_[i]) continue;
    DLSM_ASSIGN_OR_RETURN(std::vector<ObjectInfo> objs,
                          probe_->ListObjects(config_.stocs[i], std::nullopt));
    for (const auto& o : objs) {
      if (o.id.range_id == kCoordinatorRangeId || IsManifestObject(o.id)) {
        continue;
      }
      out[o.id] = config_.stocs[i];
    }
  }
  return out;
}

Status DevCluster::QuiesceAll(std::chrono::milliseconds timeout) {
  std::vector<Ltc*> live;
  {
    std::lock_guard<std::mutex> l(ltc_mu_);
    for (auto& [_, ltc] : ltcs_) live.push_back(ltc.get());
  }
  for (Ltc* ltc : live) DLSM_RETURN_IF_ERROR(ltc->Quiesce(timeout));
  return Status::OK();
}

uint64_t DevCluster::Backlog() const {
  std::lock_guard<std::mutex> l(ltc_mu_);
  uint64_t total = 0;
  for (const auto& [_, ltc] : ltcs_) total += ltc->Backlog();
  return total;
}

}  // namespace dlsm
