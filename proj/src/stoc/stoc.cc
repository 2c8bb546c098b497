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

#include "stoc/stoc.h"

#include <thread>

namespace dlsm {

namespace {

void PutId(std::string* out, ObjectId id) {
  PutFixed32(out, id.range_id);
  PutFixed64(out, id.file_no);
}

Status GetId(Decoder* d, ObjectId* id) {
  DLSM_RETURN_IF_ERROR(d->GetFixed32(&id->range_id));
  return d->GetFixed64(&id->file_no);
}

}  // namespace

void StocStats::EncodeTo(std::string* out) const {
  PutFixed64(out, outstanding_requests);
  PutFixed64(out, ewma_latency_us);
  PutFixed64(out, bytes_stored);
  PutFixed64(out, object_count);
}

Status StocStats::DecodeFrom(Decoder* d, StocStats* out) {
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&out->outstanding_requests));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&out->ewma_latency_us));
  DLSM_RETURN_IF_ERROR(d->GetFixed64(&out->bytes_stored));
  return d->GetFixed64(&out->object_count);
}

Result<std::unique_ptr<StocServer>> StocServer::Open(
    StocOptions options, std::shared_ptr<Transport> transport) {
  DLSM_ASSIGN_OR_RETURN(std::unique_ptr<ObjectStore> store,
                        ObjectStore::Open(options.store));
  return std::unique_ptr<StocServer>(
      new StocServer(std::move(options), std::move(transport), std::move(store)));
}

StocServer::StocServer(StocOptions options,
                       std::shared_ptr<Transport> transport,
                       std::unique_ptr<ObjectStore> store)
    : options_(std::move(options)), transport_(std::move(transport)),
      store_(std::move(store)), rng_(options_.seed) {
  Register();
}

StocServer::~StocServer() { Stop(); }

Status StocServer::Start(const std::string& address, std::string* bound) {
  std::string actual;
  DLSM_RETURN_IF_ERROR(transport_->Listen(
      address, [this](const Frame& f) { return Serve(f); }, &actual));
  address_ = actual;
  if (bound != nullptr) *bound = actual;
  return Status::OK();
}

void StocServer::Stop() {
  if (!address_.empty()) {
    transport_->Unlisten(address_);
    address_.clear();
  }
}

StocStats StocServer::Stats() const {
  StocStats s;
  {
    std::lock_guard<std::mutex> l(mu_);
    s.outstanding_requests = outstanding_;
    s.ewma_latency_us = static_cast<uint64_t>(ewma_us_ + 0.5);
  }
  s.bytes_stored = store_->bytes_stored();
  s.object_count = store_->object_count();
  return s;
}

void StocServer::SetInjectedLatency(uint64_t latency_us, uint64_t jitter_us) {
  std::lock_guard<std::mutex> l(mu_);
  options_.inject_latency_us = latency_us;
  options_.inject_jitter_us = jitter_us;
}

Frame StocServer::Serve(const Frame& request) {
  auto start = std::chrono::steady_clock::now();
  uint64_t delay_us;
  {
    std::lock_guard<std::mutex> l(mu_);
    ++outstanding_;
    delay_us = options_.inject_latency_us;
    if (options_.inject_jitter_us > 0) {
      std::exponential_distribution<double> exp(
          1.0 / static_cast<double>(options_.inject_jitter_us));
      delay_us += static_cast<uint64_t>(exp(rng_));
    }
  }
  if (delay_us > 0) {
    std::this_thread::sleep_for(std::chrono::microseconds(delay_us));
  }
  Frame resp = dispatcher_.Handle(request);
  double elapsed = std::chrono::duration<double, std::micro>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  {
    std::lock_guard<std::mutex> l(mu_);
    --outstanding_;
    if (!ewma_init_) {
      ewma_us_ = elapsed;
      ewma_init_ = true;
    } else {
      ewma_us_ += options_.ewma_alpha * (elapsed - ewma_us_);
    }
  }
  if (resp.kind & kResponseBit && resp.kind != static_cast<uint16_t>(Opcode::kError)) {
    // Successful responses carry [u16 0][u32 0] then the body; splice the
    // stats in front of the body.
    Decoder d(resp.payload);
    uint16_t code = 1;
    if (d.GetFixed16(&code).ok() && code == 0) {
      std::string stats;
      Stats().EncodeTo(&stats);
      resp.payload.insert(6, stats);
    }
  }
  return resp;
}

void StocServer::Register() {
  ObjectStore* st = store_.get();
  dispatcher_.Register(Opcode::kPutObject, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    ObjectId id;
    DLSM_RETURN_IF_ERROR(GetId(&d, &id));
    std::string_view bytes = d.rest();
    DLSM_ASSIGN_OR_RETURN(uint32_t crc, st->PutObject(id, bytes));
    std::string out;
    PutFixed32(&out, crc);
    PutFixed64(&out, bytes.size());
    return out;
  });
  dispatcher_.Register(Opcode::kGetObject, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    ObjectId id;
    uint64_t offset = 0, len = 0;
    DLSM_RETURN_IF_ERROR(GetId(&d, &id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&offset));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&len));
    return st->GetObject(id, offset, len);
  });
  dispatcher_.Register(Opcode::kObjectSize, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    ObjectId id;
    DLSM_RETURN_IF_ERROR(GetId(&d, &id));
    DLSM_ASSIGN_OR_RETURN(uint64_t size, st->ObjectSize(id));
    std::string out;
    PutFixed64(&out, size);
    return out;
  });
  dispatcher_.Register(Opcode::kDeleteObject, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    ObjectId id;
    DLSM_RETURN_IF_ERROR(GetId(&d, &id));
    DLSM_RETURN_IF_ERROR(st->DeleteObject(id));
    return std::string();
  });
  dispatcher_.Register(Opcode::kListObjects, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    bool has_range = false;
    uint32_t range = 0;
    DLSM_RETURN_IF_ERROR(d.GetBool(&has_range));
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&range));
    auto list = st->ListObjects(has_range ? std::optional<uint32_t>(range)
                                          : std::nullopt);
    std::string out;
    PutFixed32(&out, static_cast<uint32_t>(list.size()));
    for (const auto& o : list) {
      PutId(&out, o.id);
      PutFixed64(&out, o.size);
    }
    return out;
  });
  dispatcher_.Register(Opcode::kAppendLog, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    uint64_t log_id = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&log_id));
    DLSM_ASSIGN_OR_RETURN(uint64_t lsn, st->AppendLog(log_id, f.epoch, d.rest()));
    std::string out;
    PutFixed64(&out, lsn);
    return out;
  });
  size_t batch = options_.read_log_batch_bytes;
  dispatcher_.Register(Opcode::kReadLog, [st, batch](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    uint64_t log_id = 0, from = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&log_id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&from));
    bool more = false;
    DLSM_ASSIGN_OR_RETURN(std::vector<LogRecord> recs,
                          st->ReadLog(log_id, from, f.epoch, batch, &more));
    std::string out;
    PutFixed8(&out, more ? 1 : 0);
    PutFixed32(&out, static_cast<uint32_t>(recs.size()));
    for (const auto& r : recs) {
      PutFixed64(&out, r.lsn);
      PutBytes(&out, r.data);
    }
    return out;
  });
  dispatcher_.Register(Opcode::kTruncateLog, [st](const Frame& f) -> Result<std::string> {
    Decoder d(f.payload);
    uint64_t log_id = 0, upto = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&log_id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&upto));
    DLSM_RETURN_IF_ERROR(st->TruncateLog(log_id, upto, f.epoch));
    return std::string();
  });
  dispatcher_.Register(Opcode::kStocStats, [](const Frame&) -> Result<std::string> {
    return std::string();  // the stats prefix is the answer
  });
  dispatcher_.Register(Opcode::kPing, [](const Frame&) -> Result<std::string> {
    return std::string();
  });
}

void StocStatsBoard::Record(const std::string& stoc, const StocStats& stats) {
  std::lock_guard<std::mutex> l(mu_);
  entries_[stoc] = Entry{stats, std::chrono::steady_clock::now()};
}

StocStats StocStatsBoard::Get(const std::string& stoc) const {
  std::lock_guard<std::mutex> l(mu_);
  auto it = entries_.find(stoc);
  return it == entries_.end() ? StocStats{} : it->second.stats;
}

std::map<std::string, StocStatsBoard::Entry> StocStatsBoard::Snapshot() const {
  std::lock_guard<std::mutex> l(mu_);
  return entries_;
}

Result<std::string> StocClient::Call(const std::string& stoc, Opcode op,
                                     uint64_t epoch, std::string payload) {
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport_, stoc, op, epoch,
                                 std::move(payload), timeout_));
  Decoder d(body);
  StocStats stats;
  DLSM_RETURN_IF_ERROR(StocStats::DecodeFrom(&d, &stats));
  if (board_) board_->Record(stoc, stats);
  return body.substr(kStocStatsSize);
}

Result<uint32_t> StocClient::PutObject(const std::string& stoc, ObjectId id,
                                       std::string_view bytes) {
  std::string req;
  req.reserve(12 + bytes.size());
  PutId(&req, id);
  req.append(bytes);
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        Call(stoc, Opcode::kPutObject, 0, std::move(req)));
  Decoder d(body);
  uint32_t crc = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&crc));
  return crc;
}

Result<std::string> StocClient::GetObject(const std::string& stoc, ObjectId id,
                                          uint64_t offset, uint64_t len) {
  std::string req;
  PutId(&req, id);
  PutFixed64(&req, offset);
  PutFixed64(&req, len);
  return Call(stoc, Opcode::kGetObject, 0, std::move(req));
}

Result<uint64_t> StocClient::ObjectSize(const std::string& stoc, ObjectId id) {
  std::string req;
  PutId(&req, id);
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        Call(stoc, Opcode::kObjectSize, 0, std::move(req)));
  Decoder d(body);
  uint64_t size = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&size));
  return size;
}

Status StocClient::DeleteObject(const std::string& stoc, ObjectId id) {
  std::string req;
  PutId(&req, id);
  return Call(stoc, Opcode::kDeleteObject, 0, std::move(req)).status();
}

Result<std::vector<ObjectInfo>> StocClient::ListObjects(
    const std::string& stoc, std::optional<uint32_t> range) {
  std::string req;
  PutFixed8(&req, range.has_value() ? 1 : 0);
  PutFixed32(&req, range.value_or(0));
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        Call(stoc, Opcode::kListObjects, 0, std::move(req)));
  Decoder d(body);
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  std::vector<ObjectInfo> out(n);
  for (auto& o : out) {
    DLSM_RETURN_IF_ERROR(GetId(&d, &o.id));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&o.size));
  }
  return out;
}

Result<uint64_t> StocClient::AppendLog(const std::string& stoc, uint64_t log_id,
                                       uint64_t epoch, std::string_view record) {
  std::string req;
  PutFixed64(&req, log_id);
  req.append(record);
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        Call(stoc, Opcode::kAppendLog, epoch, std::move(req)));
  Decoder d(body);
  uint64_t lsn = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed64(&lsn));
  return lsn;
}

Result<std::vector<LogRecord>> StocClient::ReadLog(const std::string& stoc,
                                                   uint64_t log_id,
                                                   uint64_t from_lsn,
                                                   uint64_t epoch) {
  std::vector<LogRecord> out;
  for (;;) {
    std::string req;
    PutFixed64(&req, log_id);
    PutFixed64(&req, from_lsn);
    DLSM_ASSIGN_OR_RETURN(std::string body,
                          Call(stoc, Opcode::kReadLog, epoch, std::move(req)));
    Decoder d(body);
    uint8_t more = 0;
    uint32_t n = 0;
    DLSM_RETURN_IF_ERROR(d.GetFixed8(&more));
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
    for (uint32_t i = 0; i < n; ++i) {
      LogRecord r;
      DLSM_RETURN_IF_ERROR(d.GetFixed64(&r.lsn));
      DLSM_RETURN_IF_ERROR(d.GetBytes(&r.data));
      from_lsn = r.lsn + 1;
      out.push_back(std::move(r));
    }
    if (!more || n == 0) break;
  }
  return out;
}

Status StocClient::TruncateLog(const std::string& stoc, uint64_t log_id,
                               uint64_t upto_lsn, uint64_t epoch) {
  std::string req;
  PutFixed64(&req, log_id);
  PutFixed64(&req, upto_lsn);
  return Call(stoc, Opcode::kTruncateLog, epoch, std::move(req)).status();
}

Result<StocStats> StocClient::Stats(const std::string& stoc) {
  DLSM_ASSIGN_OR_RETURN(std::string body,
                        CallBody(*transport_, stoc, Opcode::kStocStats, 0, "",
                                 timeout_));
  Decoder d(body);
  StocStats stats;
  DLSM_RETURN_IF_ERROR(StocStats::DecodeFrom(&d, &stats));
  if (board_) board_->Record(stoc, stats);
  return stats;
}

Result<std::string> StocSource::Read(uint64_t offset, uint64_t len) const {
  return client_->GetObject(stoc_, id_, offset, len);
}

}  // namespace dlsm
