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

#ifndef DLSM_STOC_STOC_H_
#define DLSM_STOC_STOC_H_

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "common/coding.h"
#include "lsm/sstable.h"
#include "stoc/store.h"
#include "transport/transport.h"

namespace dlsm {

struct StocStats {
  uint64_t outstanding_requests = 0;
  uint64_t ewma_latency_us = 0;
  uint64_t bytes_stored = 0;
  uint64_t object_count = 0;

  void EncodeTo(std::string* out) const;
  static Status DecodeFrom(Decoder* d, StocStats* out);

  friend bool operator==(const StocStats&, const StocStats&) = default;
};

inline constexpr size_t kStocStatsSize = 32;

struct StocOptions {
  StoreOptions store;
  // Added to every request before it is served.
  uint64_t inject_latency_us = 0;
  uint64_t inject_jitter_us = 0;  // mean of an exponential jitter
  uint64_t seed = 1;
  double ewma_alpha = 0.2;
  // Upper bound on the payload returned by one READ_LOG.
  size_t read_log_batch_bytes = 4u << 20;
};

// Serves an ObjectStore over the frame protocol. Every successful response
// body starts with the server's StocStats so callers learn load for free.
// The server never interprets object contents: reads are raw
// (offset, length) fetches.
class StocServer {
 public:
  static Result<std::unique_ptr<StocServer>> Open(
      StocOptions options, std::shared_ptr<Transport> transport);
  ~StocServer();

  // Starts serving; *bound receives the actual address.
  Status Start(const std::string& address, std::string* bound = nullptr);
  void Stop();

  StocStats Stats() const;
  ObjectStore& store() { return *store_; }
  const std::string& address() const { return address_; }

  void SetInjectedLatency(uint64_t latency_us, uint64_t jitter_us);

 private:
  StocServer(StocOptions options, std::shared_ptr<Transport> transport,
             std::unique_ptr<ObjectStore> store);
  void Register();
  Frame Serve(const Frame& request);

  StocOptions options_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<ObjectStore> store_;
  Dispatcher dispatcher_;
  std::string address_;

  mutable std::mutex mu_;
  uint64_t outstanding_ = 0;
  double ewma_us_ = 0;
  bool ewma_init_ = false;
  std::mt19937_64 rng_;
};

// Latest load figures seen per StoC, fed by piggybacked stats.
class StocStatsBoard {
 public:
  struct Entry {
    StocStats stats;
    std::chrono::steady_clock::time_point updated;
  };

  void Record(const std::string& stoc, const StocStats& stats);
  // Unknown StoCs report zero load.
  StocStats Get(const std::string& stoc) const;
  std::map<std::string, Entry> Snapshot() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

// Client stub for the StoC protocol.
class StocClient {
 public:
  StocClient(std::shared_ptr<Transport> transport,
             std::chrono::milliseconds timeout,
             std::shared_ptr<StocStatsBoard> board = nullptr)
      : transport_(std::move(transport)), timeout_(timeout),
        board_(std::move(board)) {}

  Result<uint32_t> PutObject(const std::string& stoc, ObjectId id,
                             std::string_view bytes);
  Result<std::string> GetObject(const std::string& stoc, ObjectId id,
                                uint64_t offset, uint64_t len);
  Result<uint64_t> ObjectSize(const std::string& stoc, ObjectId id);
  Status DeleteObject(const std::string& stoc, ObjectId id);
  Result<std::vector<ObjectInfo>> ListObjects(const std::string& stoc,
                                              std::optional<uint32_t> range);
  Result<uint64_t> AppendLog(const std::string& stoc, uint64_t log_id,
                             uint64_t epoch, std::string_view record);
  // Reads the whole tail from from_lsn, batching as needed.
  Result<std::vector<LogRecord>> ReadLog(const std::string& stoc,
                                         uint64_t log_id, uint64_t from_lsn,
                                         uint64_t epoch);
  Status TruncateLog(const std::string& stoc, uint64_t log_id,
                     uint64_t upto_lsn, uint64_t epoch);
  Result<StocStats> Stats(const std::string& stoc);

  const std::shared_ptr<Transport>& transport() const { return transport_; }
  const std::shared_ptr<StocStatsBoard>& board() const { return board_; }

 private:
  Result<std::string> Call(const std::string& stoc, Opcode op, uint64_t epoch,
                           std::string payload);

  std::shared_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<StocStatsBoard> board_;
};

// Table bytes fetched from a StoC on demand.
class StocSource : public RandomAccessSource {
 public:
  StocSource(std::shared_ptr<StocClient> client, std::string stoc, ObjectId id,
             uint64_t size)
      : client_(std::move(client)), stoc_(std::move(stoc)), id_(id),
        size_(size) {}

  Result<std::string> Read(uint64_t offset, uint64_t len) const override;
  uint64_t size() const override { return size_; }

 private:
  std::shared_ptr<StocClient> client_;
  std::string stoc_;
  ObjectId id_;
  uint64_t size_;
};

}  // namespace dlsm

#endif  // DLSM_STOC_STOC_H_
