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

#include "coord/view.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace dlsm {

const Assignment* ClusterView::Route(std::string_view key) const {
  auto it = std::upper_bound(
      ranges.begin(), ranges.end(), key,
      [](std::string_view k, const Assignment& a) { return k < a.desc.lower; });
  if (it == ranges.begin()) return nullptr;
  --it;
  return it->desc.Contains(key) ? &*it : nullptr;
}

const Assignment* ClusterView::Find(uint32_t range_id) const {
  for (const auto& a : ranges) {
    if (a.desc.range_id == range_id) return &a;
  }
  return nullptr;
}

const LtcInfo* ClusterView::FindLtc(std::string_view address) const {
  for (const auto& l : ltcs) {
    if (l.address == address) return &l;
  }
  return nullptr;
}

std::vector<uint32_t> ClusterView::RangesOf(std::string_view ltc) const {
  std::vector<uint32_t> out;
  for (const auto& a : ranges) {
    if (a.ltc == ltc) out.push_back(a.desc.range_id);
  }
  return out;
}

size_t ClusterView::HealthyLtcs() const {
  return std::count_if(ltcs.begin(), ltcs.end(),
                       [](const LtcInfo& l) { return l.healthy; });
}

Status ClusterView::CheckPartition() const {
  if (ranges.empty()) return CorruptionError("view has no ranges");
  if (!ranges.front().desc.lower.empty()) {
    return CorruptionError("first range does not start at the empty key");
  }
  for (size_t i = 0; i < ranges.size(); ++i) {
    const auto& d = ranges[i].desc;
    bool last = i + 1 == ranges.size();
    if (last != d.upper.empty()) {
      return CorruptionError("only the last range may be unbounded");
    }
    if (!last && ranges[i + 1].desc.lower != d.upper) {
      return CorruptionError("gap or overlap after range " +
                             std::to_string(d.range_id));
    }
    if (!d.upper.empty() && d.lower >= d.upper) {
      return CorruptionError("empty range " + std::to_string(d.range_id));
    }
    if (FindLtc(ranges[i].ltc) == nullptr) {
      return CorruptionError("range owned by unknown LTC " + ranges[i].ltc);
    }
    if (ranges[i].log_stocs.empty()) {
      return CorruptionError("range without log StoCs");
    }
  }
  return Status::OK();
}

std::string ClusterView::Encode() const {
  std::string out;
  PutFixed64(&out, version);
  PutFixed32(&out, static_cast<uint32_t>(ltcs.size()));
  for (const auto& l : ltcs) {
    PutBytes(&out, l.address);
    PutFixed8(&out, l.healthy ? 1 : 0);
  }
  PutFixed32(&out, static_cast<uint32_t>(stocs.size()));
  for (const auto& s : stocs) PutBytes(&out, s);
  PutFixed32(&out, static_cast<uint32_t>(ranges.size()));
  for (const auto& a : ranges) {
    a.desc.EncodeTo(&out);
    PutBytes(&out, a.ltc);
    PutFixed32(&out, static_cast<uint32_t>(a.log_stocs.size()));
    for (const auto& s : a.log_stocs) PutBytes(&out, s);
  }
  return out;
}

Result<ClusterView> ClusterView::Decode(std::string_view bytes) {
  Decoder d(bytes);
  ClusterView v;
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&v.version));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  v.ltcs.resize(n);
  for (auto& l : v.ltcs) {
    DLSM_RETURN_IF_ERROR(d.GetBytes(&l.address));
    DLSM_RETURN_IF_ERROR(d.GetBool(&l.healthy));
  }
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  v.stocs.resize(n);
  for (auto& s : v.stocs) DLSM_RETURN_IF_ERROR(d.GetBytes(&s));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  v.ranges.resize(n);
  for (auto& a : v.ranges) {
    DLSM_RETURN_IF_ERROR(RangeDescriptor::DecodeFrom(&d, &a.desc));
    DLSM_RETURN_IF_ERROR(d.GetBytes(&a.ltc));
    uint32_t m = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&m));
    a.log_stocs.resize(m);
    for (auto& s : a.log_stocs) DLSM_RETURN_IF_ERROR(d.GetBytes(&s));
  }
  if (!d.empty()) return CorruptionError("trailing bytes in view");
  return v;
}

std::string UniformSplitPoint(int i, int n) {
  if (i <= 0) return std::string();
  uint32_t v = static_cast<uint32_t>((uint64_t{65536} * i) / n);
  std::string out(2, '\0');
  out[0] = static_cast<char>(v >> 8);
  out[1] = static_cast<char>(v & 0xFF);
  return out;
}

Result<ClusterView> Bootstrap(int n_ranges,
                              const std::vector<std::string>& ltcs,
                              const std::vector<std::string>& stocs,
                              int log_replicas) {
  if (ltcs.empty()) return Status(Code::kConfigError, "no LTCs");
  if (n_ranges < static_cast<int>(ltcs.size()) || n_ranges > 65536) {
    return Status(Code::kConfigError,
                  "need |ltcs| <= n_ranges <= 65536, got n_ranges=" +
                      std::to_string(n_ranges));
  }
  if (stocs.empty()) return Status(Code::kConfigError, "no StoCs");
  if (log_replicas < 1 || log_replicas > static_cast<int>(stocs.size())) {
    return Status(Code::kConfigError, "log replicas must be in [1, |stocs|]");
  }
  ClusterView v;
  v.version = 1;
  for (const auto& l : ltcs) {
    if (v.FindLtc(l) != nullptr) {
      return Status(Code::kConfigError, "duplicate LTC " + l);
    }
    v.ltcs.push_back(LtcInfo{l, true});
  }
  v.stocs = stocs;
  for (int i = 0; i < n_ranges; ++i) {
    Assignment a;
    a.desc.range_id = static_cast<uint32_t>(i);
    a.desc.lower = UniformSplitPoint(i, n_ranges);
    a.desc.upper = i + 1 < n_ranges ? UniformSplitPoint(i + 1, n_ranges) : "";
    a.desc.epoch = 1;
    a.ltc = ltcs[i % ltcs.size()];
    for (int j = 0; j < log_replicas; ++j) {
      a.log_stocs.push_back(stocs[(i + j) % stocs.size()]);
    }
    v.ranges.push_back(std::move(a));
  }
  return v;
}

namespace {

double LoadOf(const RangeLoad& load, uint32_t range_id) {
  auto it = load.find(range_id);
  return it == load.end() ? 0.0 : it->second;
}

// Hottest first, then lowest range_id.
bool Hotter(const RangeLoad& load, uint32_t a, uint32_t b) {
  double la = LoadOf(load, a), lb = LoadOf(load, b);
  if (la != lb) return la > lb;
  return a < b;
}

// Places `ranges` one by one on the healthy LTC (other than `leaving`)
// with the smallest (count, load, address).
std::vector<Move> Spread(const ClusterView& view, const std::string& leaving,
                         const RangeLoad& load) {
  std::vector<uint32_t> ranges = view.RangesOf(leaving);
  std::sort(ranges.begin(), ranges.end(),
            [&](uint32_t a, uint32_t b) { return Hotter(load, a, b); });
  struct Target {
    size_t count = 0;
    double load = 0;
  };
  std::map<std::string, Target> targets;
  for (const auto& l : view.ltcs) {
    if (l.healthy && l.address != leaving) targets[l.address];
  }
  if (targets.empty()) return {};
  for (const auto& a : view.ranges) {
    auto it = targets.find(a.ltc);
    if (it == targets.end()) continue;
    ++it->second.count;
    it->second.load += LoadOf(load, a.desc.range_id);
  }
  std::vector<Move> moves;
  for (uint32_t r : ranges) {
    auto best = targets.begin();
    for (auto it = targets.begin(); it != targets.end(); ++it) {
      if (std::tie(it->second.count, it->second.load, it->first) <
          std::tie(best->second.count, best->second.load, best->first)) {
        best = it;
      }
    }
    ++best->second.count;
    best->second.load += LoadOf(load, r);
    moves.push_back(Move{r, leaving, best->first});
  }
  return moves;
}

}  // namespace

Result<std::vector<Move>> PlanAddLtc(const ClusterView& view,
                                     const std::string& ltc,
                                     const RangeLoad& load) {
  const LtcInfo* existing = view.FindLtc(ltc);
  if (existing != nullptr && existing->healthy) {
    return Status(Code::kAlreadyMember, ltc + " is already a member");
  }
  std::map<std::string, std::vector<uint32_t>> owned;
  for (const auto& l : view.ltcs) {
    if (l.healthy) owned[l.address];
  }
  for (const auto& a : view.ranges) {
    auto it = owned.find(a.ltc);
    if (it != owned.end()) it->second.push_back(a.desc.range_id);
  }
  size_t k = owned.size();
  size_t quota = view.ranges.size() / (k + 1);
  std::vector<Move> moves;
  while (moves.size() < quota) {
    std::optional<std::pair<uint32_t, std::string>> pick;
    for (const auto& [donor, ranges] : owned) {
      if (ranges.size() < moves.size() + 2) continue;
      for (uint32_t r : ranges) {
        if (!pick || Hotter(load, r, pick->first)) pick.emplace(r, donor);
      }
    }
    if (!pick) break;
    auto& from = owned[pick->second];
    from.erase(std::find(from.begin(), from.end(), pick->first));
    moves.push_back(Move{pick->first, pick->second, ltc});
  }
  return moves;
}

Result<std::vector<Move>> PlanRemoveLtc(const ClusterView& view,
                                        const std::string& ltc,
                                        const RangeLoad& load) {
  const LtcInfo* victim = view.FindLtc(ltc);
  if (victim == nullptr) return Status(Code::kUnknownLtc, "unknown LTC " + ltc);
  size_t survivors = view.HealthyLtcs() - (victim->healthy ? 1 : 0);
  if (survivors == 0) {
    return Status(Code::kLastLtc, "cannot remove the last LTC");
  }
  return Spread(view, ltc, load);
}

std::vector<Move> PlanFailover(const ClusterView& view, const std::string& dead,
                               const RangeLoad& load) {
  return Spread(view, dead, load);
}

ClusterView ApplyMoves(const ClusterView& view, const std::vector<Move>& moves) {
  ClusterView next = view;
  next.version = view.version + 1;
  for (const auto& m : moves) {
    for (auto& a : next.ranges) {
      if (a.desc.range_id != m.range_id) continue;
      a.ltc = m.to;
      ++a.desc.epoch;
    }
    if (next.FindLtc(m.to) == nullptr) next.ltcs.push_back(LtcInfo{m.to, true});
  }
  return next;
}

void LoadTracker::Report(uint32_t range_id, double ops_per_sec,
                         Clock::time_point now) {
  auto it = entries_.find(range_id);
  if (it == entries_.end() || now - it->second.updated > stale_after_) {
    entries_[range_id] = Entry{ops_per_sec, now};
    return;
  }
  double dt = std::chrono::duration<double>(now - it->second.updated).count();
  double tau = std::chrono::duration<double>(tau_).count();
  double alpha = tau > 0 ? 1.0 - std::exp(-dt / tau) : 1.0;
  it->second.ewma += alpha * (ops_per_sec - it->second.ewma);
  it->second.updated = now;
}

RangeLoad LoadTracker::Loads(Clock::time_point now) const {
  RangeLoad out;
  for (const auto& [id, e] : entries_) {
    if (now - e.updated <= stale_after_) out[id] = e.ewma;
  }
  return out;
}

}  // namespace dlsm
