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

#include "cluster/status.h"

#include <nlohmann/json.hpp>

namespace dlsm {

namespace {

std::string Hex(std::string_view s, const char* empty) {
  if (s.empty()) return empty;
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

// Left-aligned columns separated by two spaces; no trailing blanks.
std::string Table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()));
    for (size_t i = 0; i < r.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
    }
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace

Result<ClusterStatus> CollectStatus(std::shared_ptr<Transport> transport,
                                    const std::string& coordinator,
                                    std::chrono::milliseconds timeout) {
  ClusterStatus st;
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport, coordinator, Opcode::kGetView, 0,
                                 "", timeout));
  DLSM_ASSIGN_OR_RETURN(st.view, ClusterView::Decode(body));
  for (const auto& l : st.view.ltcs) {
    LtcStatus ls;
    auto stats = CallBody(*transport, l.address, Opcode::kLtcStats, 0, "",
                          timeout);
    if (stats.ok()) {
      auto j = nlohmann::json::parse(*stats, nullptr, false);
      if (!j.is_discarded()) {
        ls.reachable = true;
        ls.ranges = j.value("ranges", nlohmann::json::array()).size();
        ls.backlog = j.value("backlog", uint64_t{0});
        ls.flushes = j.value("flushes", uint64_t{0});
        ls.compactions = j.value("compactions_applied", uint64_t{0});
      }
    }
    st.ltcs[l.address] = ls;
  }
  StocClient stoc(transport, timeout);
  for (const auto& s : st.view.stocs) {
    auto stats = stoc.Stats(s);
    st.stocs[s] = stats.ok() ? std::optional<StocStats>(*stats) : std::nullopt;
  }
  return st;
}

std::string FormatStatus(const ClusterStatus& st) {
  std::string out = "view version " + std::to_string(st.view.version) + "\n\n";
  std::vector<std::vector<std::string>> ltcs = {
      {"LTC", "HEALTH", "ASSIGNED", "SERVING", "BACKLOG", "FLUSHES",
       "COMPACTIONS"}};
  std::vector<LtcInfo> members = st.view.ltcs;
  std::sort(members.begin(), members.end(),
            [](const LtcInfo& a, const LtcInfo& b) {
              return a.address < b.address;
            });
  for (const auto& l : members) {
    auto it = st.ltcs.find(l.address);
    bool up = it != st.ltcs.end() && it->second.reachable;
    auto num = [&](uint64_t LtcStatus::*f) {
      return up ? std::to_string(it->second.*f) : std::string("-");
    };
    ltcs.push_back({l.address, l.healthy ? "healthy" : "failed",
                    std::to_string(st.view.RangesOf(l.address).size()),
                    num(&LtcStatus::ranges), num(&LtcStatus::backlog),
                    num(&LtcStatus::flushes), num(&LtcStatus::compactions)});
  }
  out += Table(ltcs) + "\n";

  std::vector<std::vector<std::string>> stocs = {{"STOC", "OBJECTS", "BYTES"}};
  std::vector<std::string> names = st.view.stocs;
  std::sort(names.begin(), names.end());
  for (const auto& s : names) {
    auto it = st.stocs.find(s);
    if (it == st.stocs.end() || !it->second) {
      stocs.push_back({s, "unreachable", "-"});
    } else {
      stocs.push_back({s, std::to_string(it->second->object_count),
                       std::to_string(it->second->bytes_stored)});
    }
  }
  out += Table(stocs) + "\n";

  std::vector<std::vector<std::string>> ranges = {
      {"RANGE", "LOWER", "UPPER", "EPOCH", "LTC", "LOG_STOCS"}};
  for (const auto& a : st.view.ranges) {
    std::string logs;
    for (const auto& s : a.log_stocs) logs += (logs.empty() ? "" : ",") + s;
    ranges.push_back({std::to_string(a.desc.range_id),
                      Hex(a.desc.lower, "-inf"), Hex(a.desc.upper, "+inf"),
                      std::to_string(a.desc.epoch), a.ltc, logs});
  }
  out += Table(ranges);
  return out;
}

}  // namespace dlsm
