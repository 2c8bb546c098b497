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

#include "client/client.h"

#include <thread>

namespace dlsm {

bool IsRoutingError(const Status& s) {
  switch (s.code()) {
    case Code::kNotOwner:
    case Code::kStaleEpoch:
    case Code::kConnectionFailed:
    case Code::kTimeout:
    case Code::kUnavailable:
      return true;
    default:
      return false;
  }
}

Client::Client(std::shared_ptr<Transport> transport, std::string coordinator,
               ClientOptions options)
    : transport_(std::move(transport)),
      coordinator_(std::move(coordinator)),
      options_(options) {}

Status Client::Refresh() {
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport_, coordinator_, Opcode::kGetView,
                                 0, "", options_.rpc_timeout));
  DLSM_ASSIGN_OR_RETURN(ClusterView v, ClusterView::Decode(body));
  std::lock_guard<std::mutex> l(mu_);
  if (view_ == nullptr || v.version >= view_->version) {
    view_ = std::make_shared<const ClusterView>(std::move(v));
  }
  return Status::OK();
}

std::shared_ptr<const ClusterView> Client::view() const {
  std::lock_guard<std::mutex> l(mu_);
  return view_;
}

Result<std::string> Client::Routed(std::string_view key, Opcode op,
                                   const std::string& payload) {
  auto deadline = std::chrono::steady_clock::now() + options_.retry_deadline;
  auto backoff = std::chrono::milliseconds(1);
  Status last;
  for (;;) {
    auto v = view();
    if (v == nullptr) {
      last = Refresh();
    } else {
      const Assignment* a = v->Route(key);
      if (a == nullptr) return InternalError("view does not cover key");
      auto r = CallBody(*transport_, a->ltc, op, a->desc.epoch, payload,
                        options_.rpc_timeout);
      if (r.ok() || !IsRoutingError(r.status())) return r;
      last = r.status();
      ++retries_;
      (void)Refresh();
    }
    if (std::chrono::steady_clock::now() + backoff > deadline) {
      return last.ok() ? UnavailableError("retry deadline exceeded") : last;
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, std::chrono::milliseconds(50));
  }
}

namespace {

Result<PutAck> DecodeAck(const std::string& body) {
  Decoder d(body);
  PutAck ack;
  bool durable = false;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&ack.seq));
  DLSM_RETURN_IF_ERROR(d.GetBool(&durable));
  ack.durable = durable;
  return ack;
}

}  // namespace

Result<PutAck> Client::Put(std::string_view key, std::string_view value) {
  std::string payload;
  PutBytes(&payload, key);
  PutBytes(&payload, value);
  DLSM_ASSIGN_OR_RETURN(std::string body, Routed(key, Opcode::kPut, payload));
  return DecodeAck(body);
}

Result<PutAck> Client::Delete(std::string_view key) {
  std::string payload;
  PutBytes(&payload, key);
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        Routed(key, Opcode::kDelete, payload));
  return DecodeAck(body);
}

Result<std::optional<std::string>> Client::Get(std::string_view key) {
  std::string payload;
  PutBytes(&payload, key);
  DLSM_ASSIGN_OR_RETURN(std::string body, Routed(key, Opcode::kGet, payload));
  Decoder d(body);
  bool found = false;
  DLSM_RETURN_IF_ERROR(d.GetBool(&found));
  if (!found) return std::optional<std::string>();
  std::string value;
  DLSM_RETURN_IF_ERROR(d.GetBytes(&value));
  return std::optional<std::string>(std::move(value));
}

Result<std::vector<std::pair<std::string, std::string>>> Client::Scan(
    std::string_view lower, std::string_view upper, uint32_t limit) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string cursor(lower);
  for (;;) {
    std::string payload;
    PutBytes(&payload, cursor);
    PutBytes(&payload, upper);
    uint32_t want = limit == 0 ? 0 : limit - static_cast<uint32_t>(out.size());
    PutFixed32(&payload, want);
    DLSM_ASSIGN_OR_RETURN(std::string body,
                          Routed(cursor, Opcode::kScan, payload));
    Decoder d(body);
    uint32_t n = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
    for (uint32_t i = 0; i < n; ++i) {
      std::string k, v;
      DLSM_RETURN_IF_ERROR(d.GetBytes(&k));
      DLSM_RETURN_IF_ERROR(d.GetBytes(&v));
      out.emplace_back(std::move(k), std::move(v));
    }
    std::string range_upper;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&range_upper));
    if (limit != 0 && out.size() >= limit) break;
    if (range_upper.empty()) break;
    if (!upper.empty() && range_upper >= upper) break;
    cursor = std::move(range_upper);
  }
  return out;
}

Result<std::string> Client::LtcStats(const std::string& ltc) {
  return CallBody(*transport_, ltc, Opcode::kLtcStats, 0, "",
                  options_.rpc_timeout);
}

Status Client::AddLtc(const std::string& ltc) {
  std::string payload;
  PutBytes(&payload, ltc);
  auto r = CallBody(*transport_, coordinator_, Opcode::kAddLtc, 0,
                    std::move(payload), std::chrono::minutes(10));
  (void)Refresh();
  return r.status();
}

Status Client::RemoveLtc(const std::string& ltc) {
  std::string payload;
  PutBytes(&payload, ltc);
  auto r = CallBody(*transport_, coordinator_, Opcode::kRemoveLtc, 0,
                    std::move(payload), std::chrono::minutes(10));
  (void)Refresh();
  return r.status();
}

}  // namespace dlsm
