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

#include "coord/coordinator.h"

#include <set>

namespace dlsm {

Coordinator::Coordinator(CoordinatorOptions options,
                         std::shared_ptr<Transport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      stoc_(std::make_shared<StocClient>(transport_, options_.rpc_timeout)),
      loads_(options_.load_time_constant, options_.load_stale_after) {
  if (options_.state_stoc.empty() && !options_.stocs.empty()) {
    options_.state_stoc = options_.stocs[0];
  }
  RegisterHandlers();
}

Coordinator::~Coordinator() { Stop(); }

Status Coordinator::Start(const std::string& address, std::string* bound) {
  if (options_.stocs.empty()) return Status(Code::kConfigError, "no StoCs");
  DLSM_ASSIGN_OR_RETURN(std::optional<ClusterView> persisted, LoadPersisted());
  std::string actual;
  DLSM_RETURN_IF_ERROR(transport_->Listen(
      address, dispatcher_.AsHandler(), &actual));
  address_ = actual;
  if (bound != nullptr) *bound = actual;
  if (persisted) {
    std::lock_guard<std::mutex> l(view_mu_);
    view_ = std::make_shared<const ClusterView>(std::move(*persisted));
  } else {
    auto view = Bootstrap(options_.n_ranges, options_.ltcs, options_.stocs,
                          options_.log_replicas);
    if (!view.ok()) {
      transport_->Unlisten(address_);
      return view.status();
    }
    for (const auto& a : view->ranges) {
      Status s = AdoptOn(a, std::nullopt);
      if (!s.ok()) {
        transport_->Unlisten(address_);
        return s.Annotate("bootstrap adopt of range " +
                          std::to_string(a.desc.range_id));
      }
    }
    Status s = Publish(std::move(view).value());
    if (!s.ok()) {
      transport_->Unlisten(address_);
      return s;
    }
  }
  heartbeat_ = std::thread([this] { HeartbeatLoop(); });
  return Status::OK();
}

void Coordinator::Stop() {
  if (stopping_.exchange(true)) return;
  {
    std::lock_guard<std::mutex> l(hb_mu_);
    hb_cv_.notify_all();
  }
  if (heartbeat_.joinable()) heartbeat_.join();
  if (!address_.empty()) transport_->Unlisten(address_);
}

std::shared_ptr<const ClusterView> Coordinator::View() const {
  std::lock_guard<std::mutex> l(view_mu_);
  return view_;
}

Status Coordinator::Publish(ClusterView next) {
  DLSM_RETURN_IF_ERROR(next.CheckPartition());
  auto current = View();
  if (current != nullptr && next.version <= current->version) {
    next.version = current->version + 1;
  }
  ObjectId id{kCoordinatorRangeId, next.version};
  auto put = stoc_->PutObject(options_.state_stoc, id, next.Encode());
  if (!put.ok() && !put.status().Is(Code::kAlreadyExists)) {
    return put.status().Annotate("persisting view");
  }
  {
    std::lock_guard<std::mutex> l(view_mu_);
    view_ = std::make_shared<const ClusterView>(std::move(next));
  }
  if (current != nullptr) {
    (void)stoc_->DeleteObject(options_.state_stoc,
                              ObjectId{kCoordinatorRangeId, current->version});
  }
  return Status::OK();
}

Result<std::optional<ClusterView>> Coordinator::LoadPersisted() {
  DLSM_ASSIGN_OR_RETURN(
      std::vector<ObjectInfo> objs,
      stoc_->ListObjects(options_.state_stoc, kCoordinatorRangeId));
  std::optional<ObjectId> best;
  for (const auto& o : objs) {
    if (!best || o.id > *best) best = o.id;
  }
  if (!best) return std::optional<ClusterView>();
  DLSM_ASSIGN_OR_RETURN(std::string bytes,
                        stoc_->GetObject(options_.state_stoc, *best, 0,
                                         UINT64_MAX));
  DLSM_ASSIGN_OR_RETURN(ClusterView v, ClusterView::Decode(bytes));
  return std::optional<ClusterView>(std::move(v));
}

Status Coordinator::AdoptOn(const Assignment& a,
                            std::optional<RangeManifest> manifest) {
  std::string payload;
  a.desc.EncodeTo(&payload);
  PutFixed32(&payload, static_cast<uint32_t>(a.log_stocs.size()));
  for (const auto& s : a.log_stocs) PutBytes(&payload, s);
  PutFixed8(&payload, manifest ? 1 : 0);
  if (manifest) PutBytes(&payload, manifest->Encode());
  return CallBody(*transport_, a.ltc, Opcode::kAdoptRange, a.desc.epoch,
                  std::move(payload), options_.rpc_timeout)
      .status();
}

Result<RangeManifest> Coordinator::ReleaseOn(const std::string& ltc,
                                             uint32_t range_id) {
  std::string payload;
  PutFixed32(&payload, range_id);
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport_, ltc, Opcode::kReleaseRange, 0,
                                 std::move(payload), options_.rpc_timeout));
  Decoder d(body);
  std::string_view bytes;
  DLSM_RETURN_IF_ERROR(d.GetBytes(&bytes));
  return RangeManifest::Decode(bytes);
}

Result<std::vector<RangeDescriptor>> Coordinator::Heartbeat(
    const std::string& ltc) {
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport_, ltc, Opcode::kHeartbeat, 0, "",
                                 options_.heartbeat_interval));
  Decoder d(body);
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  std::vector<RangeDescriptor> out(n);
  for (auto& r : out) DLSM_RETURN_IF_ERROR(RangeDescriptor::DecodeFrom(&d, &r));
  return out;
}

Status Coordinator::ExecuteMove(const Move& m, bool owner_dead) {
  auto view = View();
  const Assignment* current = view->Find(m.range_id);
  if (current == nullptr) {
    return InvalidArgumentError("unknown range " + std::to_string(m.range_id));
  }
  std::optional<RangeManifest> manifest;
  if (!owner_dead) {
    auto released = ReleaseOn(current->ltc, m.range_id);
    // An unreachable owner is treated as dead: adoption below reads the log
    // at a newer epoch, which fences it.
    if (released.ok()) manifest = std::move(released).value();
  }
  Assignment next = *current;
  next.ltc = m.to;
  ++next.desc.epoch;
  Status s = AdoptOn(next, std::move(manifest));
  if (!s.ok()) {
    if (owner_dead) return s;
    Assignment back = *current;
    back.desc.epoch += 2;
    if (!AdoptOn(back, std::nullopt).ok()) return s;
    next = back;
  }
  ClusterView updated = *view;
  for (auto& a : updated.ranges) {
    if (a.desc.range_id == m.range_id) a = next;
  }
  ++updated.version;
  DLSM_RETURN_IF_ERROR(Publish(std::move(updated)));
  return s;
}

Status Coordinator::SetHealth(const std::string& ltc, bool healthy) {
  auto view = View();
  ClusterView next = *view;
  bool found = false;
  for (auto& l : next.ltcs) {
    if (l.address != ltc) continue;
    found = true;
    if (l.healthy == healthy) return Status::OK();
    l.healthy = healthy;
  }
  if (!found) next.ltcs.push_back(LtcInfo{ltc, healthy});
  ++next.version;
  return Publish(std::move(next));
}

Status Coordinator::AddLtc(const std::string& ltc) {
  std::lock_guard<std::mutex> l(change_mu_);
  auto view = View();
  if (view == nullptr) return UnavailableError("coordinator not started");
  DLSM_ASSIGN_OR_RETURN(std::vector<Move> plan,
                        PlanAddLtc(*view, ltc, Loads()));
  auto alive = Heartbeat(ltc);
  if (!alive.ok()) {
    return UnavailableError("new LTC unreachable: " + alive.status().ToString());
  }
  DLSM_RETURN_IF_ERROR(SetHealth(ltc, true));
  for (const auto& m : plan) DLSM_RETURN_IF_ERROR(ExecuteMove(m, false));
  return Status::OK();
}

Status Coordinator::RemoveLtc(const std::string& ltc) {
  std::lock_guard<std::mutex> l(change_mu_);
  auto view = View();
  if (view == nullptr) return UnavailableError("coordinator not started");
  const LtcInfo* victim = view->FindLtc(ltc);
  bool dead = victim != nullptr && !victim->healthy;
  DLSM_ASSIGN_OR_RETURN(std::vector<Move> plan,
                        PlanRemoveLtc(*view, ltc, Loads()));
  for (const auto& m : plan) DLSM_RETURN_IF_ERROR(ExecuteMove(m, dead));
  ClusterView next = *View();
  std::erase_if(next.ltcs, [&](const LtcInfo& i) { return i.address == ltc; });
  ++next.version;
  return Publish(std::move(next));
}

Status Coordinator::ReportLoad(const LoadReport& report) {
  auto view = View();
  if (view == nullptr || view->FindLtc(report.ltc) == nullptr) {
    return Status(Code::kUnknownLtc, "unknown LTC " + report.ltc);
  }
  auto now = LoadTracker::Clock::now();
  std::lock_guard<std::mutex> l(load_mu_);
  for (const auto& [range, ops] : report.ops_per_sec) {
    loads_.Report(range, ops, now);
  }
  return Status::OK();
}

RangeLoad Coordinator::Loads() const {
  std::lock_guard<std::mutex> l(load_mu_);
  return loads_.Loads(LoadTracker::Clock::now());
}

void Coordinator::Failover(const std::string& ltc) {
  std::lock_guard<std::mutex> l(change_mu_);
  if (!SetHealth(ltc, false).ok()) return;
  for (const auto& m : PlanFailover(*View(), ltc, Loads())) {
    (void)ExecuteMove(m, true);
  }
}

void Coordinator::HeartbeatOnce() {
  auto view = View();
  if (view == nullptr) return;
  std::map<std::string, std::vector<RangeDescriptor>> owned;
  std::map<uint32_t, uint64_t> max_epoch;
  std::vector<std::string> dead;
  for (const auto& ltc : view->ltcs) {
    auto hb = Heartbeat(ltc.address);
    if (hb.ok()) {
      misses_[ltc.address] = 0;
      for (const auto& r : *hb) {
        max_epoch[r.range_id] = std::max(max_epoch[r.range_id], r.epoch);
      }
      owned[ltc.address] = std::move(hb).value();
      continue;
    }
    int& m = misses_[ltc.address];
    if (++m >= options_.missed_heartbeats) dead.push_back(ltc.address);
  }
  for (const auto& ltc : dead) {
    const LtcInfo* info = View()->FindLtc(ltc);
    if (info == nullptr) continue;
    if (info->healthy || !View()->RangesOf(ltc).empty()) Failover(ltc);
  }
  if (owned.empty()) return;
  // Reconcile: a live LTC that lost a range (e.g. it restarted) adopts it
  // again at a fresh epoch.
  std::unique_lock<std::mutex> l(change_mu_, std::try_to_lock);
  if (!l.owns_lock()) return;
  for (const auto& [ltc, ranges] : owned) {
    const LtcInfo* info = View()->FindLtc(ltc);
    if (info == nullptr) continue;
    if (!info->healthy) (void)SetHealth(ltc, true);
    std::set<std::pair<uint32_t, uint64_t>> have;
    for (const auto& r : ranges) have.emplace(r.range_id, r.epoch);
    for (uint32_t id : View()->RangesOf(ltc)) {
      auto current = View();
      const Assignment* a = current->Find(id);
      if (have.count({id, a->desc.epoch}) != 0) continue;
      Assignment next = *a;
      next.desc.epoch = std::max(a->desc.epoch, max_epoch[id]) + 1;
      if (!AdoptOn(next, std::nullopt).ok()) continue;
      ClusterView updated = *current;
      for (auto& x : updated.ranges) {
        if (x.desc.range_id == id) x = next;
      }
      ++updated.version;
      (void)Publish(std::move(updated));
    }
  }
}

void Coordinator::HeartbeatLoop() {
  while (!stopping_) {
    {
      std::unique_lock<std::mutex> l(hb_mu_);
      hb_cv_.wait_for(l, options_.heartbeat_interval,
                      [&] { return stopping_.load(); });
    }
    if (stopping_) return;
    HeartbeatOnce();
  }
}

void Coordinator::RegisterHandlers() {
  dispatcher_.Register(Opcode::kPing, [](const Frame&) -> Result<std::string> {
    return std::string();
  });
  dispatcher_.Register(Opcode::kGetView, [this](const Frame&)
                                             -> Result<std::string> {
    auto view = View();
    if (view == nullptr) return UnavailableError("no view published yet");
    return view->Encode();
  });
  dispatcher_.Register(Opcode::kReportLoad, [this](const Frame& f)
                                                -> Result<std::string> {
    DLSM_ASSIGN_OR_RETURN(LoadReport r, LoadReport::Decode(f.payload));
    DLSM_RETURN_IF_ERROR(ReportLoad(r));
    return std::string();
  });
  dispatcher_.Register(Opcode::kAddLtc, [this](const Frame& f)
                                            -> Result<std::string> {
    Decoder d(f.payload);
    std::string ltc;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&ltc));
    DLSM_RETURN_IF_ERROR(AddLtc(ltc));
    return std::string();
  });
  dispatcher_.Register(Opcode::kRemoveLtc, [this](const Frame& f)
                                               -> Result<std::string> {
    Decoder d(f.payload);
    std::string ltc;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&ltc));
    DLSM_RETURN_IF_ERROR(RemoveLtc(ltc));
    return std::string();
  });
}

}  // namespace dlsm
