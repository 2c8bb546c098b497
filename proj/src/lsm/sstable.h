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

#ifndef DLSM_LSM_SSTABLE_H_
#define DLSM_LSM_SSTABLE_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsm/bloom.h"
#include "lsm/iterator.h"
#include "lsm/types.h"

namespace dlsm {

// Table layout (all integers little-endian; see docs/formats.md):
//
//   [data blocks][bloom filter][block index][footer: 64 bytes]
//
// Tables are immutable once encoded. Entries are sorted by (key asc,
// seq desc) and no (key, seq) pair appears twice.

inline constexpr uint32_t kSstMagic = 0x4E4C534D;
inline constexpr uint32_t kSstFormatVersion = 1;
inline constexpr size_t kSstFooterSize = 64;
inline constexpr size_t kBlockTrailerSize = 8;

struct SstOptions {
  size_t block_size_bytes = 4096;
  int bloom_bits_per_key = 10;

  friend bool operator==(const SstOptions&, const SstOptions&) = default;
};

struct BlockHandle {
  std::string first_key;
  uint64_t offset = 0;
  uint32_t length = 0;  // includes the 8-byte trailer

  friend bool operator==(const BlockHandle&, const BlockHandle&) = default;
};

struct SstFooter {
  uint64_t index_offset = 0;
  uint32_t index_len = 0;
  uint64_t bloom_offset = 0;
  uint32_t bloom_len = 0;
  SeqNo min_seq = 0;
  SeqNo max_seq = 0;
  uint64_t entry_count = 0;
  uint32_t format_version = kSstFormatVersion;

  friend bool operator==(const SstFooter&, const SstFooter&) = default;
};

// What a manifest remembers about a table without opening it.
struct SstSummary {
  std::string min_key;
  std::string max_key;
  SeqNo min_seq = 0;
  SeqNo max_seq = 0;
  uint64_t entry_count = 0;
  uint64_t file_size = 0;

  friend bool operator==(const SstSummary&, const SstSummary&) = default;
};

// Fully decoded table.
struct SstContents {
  std::vector<Entry> entries;
  std::vector<BlockHandle> index;
  BloomFilter bloom;
  std::string max_key;
  SstFooter footer;

  SstSummary Summary(uint64_t file_size) const;

  friend bool operator==(const SstContents&, const SstContents&) = default;
};

struct EncodedSst {
  std::string bytes;
  SstSummary summary;
};

// Incremental encoder. Add() must be called in table order.
class SstBuilder {
 public:
  explicit SstBuilder(SstOptions options = {}) : options_(options) {}

  Status Add(const Entry& e);

  // Exact encoded size of the table if Finish() were called now.
  size_t CurrentSize() const;
  // Exact encoded size if e were added and then Finish() called.
  size_t SizeIfAdded(const Entry& e) const;

  size_t num_entries() const { return num_entries_; }
  bool empty() const { return num_entries_ == 0; }

  Result<EncodedSst> Finish();

 private:
  void CloseBlock();
  size_t FinalSize(size_t data_bytes, size_t index_entry_bytes,
                   size_t max_key_len, size_t n) const;

  SstOptions options_;
  std::string data_;
  std::string block_;
  uint32_t block_entries_ = 0;
  std::string block_first_key_;
  std::vector<BlockHandle> index_;
  size_t index_entry_bytes_ = 0;  // Σ encoded size of index entries
  std::vector<std::string> keys_;
  std::string last_key_;
  SeqNo last_seq_ = 0;
  SeqNo min_seq_ = 0;
  SeqNo max_seq_ = 0;
  size_t num_entries_ = 0;
  bool finished_ = false;
};

size_t EncodedEntrySize(const Entry& e);

// Encodes a complete table. Entries must be sorted and non-empty.
Result<EncodedSst> EncodeSst(std::span<const Entry> entries,
                             const SstOptions& options = {});

// Decodes and verifies every checksum in the table.
Result<SstContents> DecodeSst(std::string_view bytes);

Result<SstFooter> DecodeFooter(std::string_view footer_bytes);
std::string EncodeFooter(const SstFooter& footer);

// Byte-range access to an encoded table, wherever it lives.
class RandomAccessSource {
 public:
  virtual ~RandomAccessSource() = default;
  virtual Result<std::string> Read(uint64_t offset, uint64_t len) const = 0;
  virtual uint64_t size() const = 0;
};

class StringSource : public RandomAccessSource {
 public:
  explicit StringSource(std::string bytes)
      : bytes_(std::make_shared<const std::string>(std::move(bytes))) {}
  explicit StringSource(std::shared_ptr<const std::string> bytes)
      : bytes_(std::move(bytes)) {}

  Result<std::string> Read(uint64_t offset, uint64_t len) const override;
  uint64_t size() const override { return bytes_->size(); }

 private:
  std::shared_ptr<const std::string> bytes_;
};

class TableReader;

// Forward iterator over a table, fetching blocks lazily.
class TableIterator : public EntryIterator {
 public:
  explicit TableIterator(std::shared_ptr<const TableReader> table);

  void SeekToFirst();
  // Positions at the first entry with key >= target.
  void Seek(std::string_view target) override;
  void Next() override;
  bool Valid() const override {
    return status_.ok() && pos_ < block_entries_.size();
  }
  const Entry& entry() const override { return block_entries_[pos_]; }
  const Status& status() const override { return status_; }

 private:
  void LoadBlock(size_t block);
  void SkipEmpty();

  std::shared_ptr<const TableReader> table_;
  size_t block_ = 0;
  std::vector<Entry> block_entries_;
  size_t pos_ = 0;
  Status status_;
};

// Reads a table through a RandomAccessSource. Open() fetches the footer,
// filter and index once; lookups then cost at most a few block reads.
class TableReader : public std::enable_shared_from_this<TableReader> {
 public:
  static Result<std::shared_ptr<TableReader>> Open(
      std::shared_ptr<const RandomAccessSource> source);

  // Newest version of key, if present. Consults the bloom filter first.
  Result<std::optional<VersionedValue>> Get(std::string_view key) const;

  std::unique_ptr<TableIterator> NewIterator() const;

  Result<std::vector<Entry>> ReadBlock(size_t block) const;

  const SstFooter& footer() const { return footer_; }
  const std::vector<BlockHandle>& index() const { return index_; }
  const BloomFilter& bloom() const { return bloom_; }
  const std::string& min_key() const { return index_.front().first_key; }
  const std::string& max_key() const { return max_key_; }
  uint64_t file_size() const { return source_->size(); }

  // Number of data block fetches issued so far (instrumentation).
  uint64_t block_reads() const { return block_reads_.load(); }

 private:
  TableReader() = default;

  std::shared_ptr<const RandomAccessSource> source_;
  SstFooter footer_;
  BloomFilter bloom_;
  std::vector<BlockHandle> index_;
  std::string max_key_;
  mutable std::atomic<uint64_t> block_reads_{0};
};

// Parses a data block and verifies its trailer checksum.
Result<std::vector<Entry>> DecodeBlock(std::string_view block);

}  // namespace dlsm

#endif  // DLSM_LSM_SSTABLE_H_
